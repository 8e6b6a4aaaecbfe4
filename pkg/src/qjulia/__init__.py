"""Quaternionic Julia set renderer.

Orbit classification (escape time or cut-off rate) over 3-D slices of
quaternion space, plus an orthographic ray renderer for the resulting
voxel fields.
"""

from qjulia.quat import Quaternion

__all__ = ["Quaternion"]
__version__ = "0.1.0"
