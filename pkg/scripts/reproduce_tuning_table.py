#!/usr/bin/env python3
"""Print the escape-time tuning table for the Newton cubic map.

Sweeps threshold radius against iteration count over a 33^3 grid and
prints the fraction of voxels each cell would plot.  With a small radius
and few iterates the whole block looks "inside"; the useful settings are
the ones where the fraction stops moving.

Usage: python3 scripts/reproduce_tuning_table.py [--workers N]
"""

import argparse
import os
from pathlib import Path

from qjulia import field
from qjulia.config import parse_sweep

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "sweep_newton.json"


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    spec = parse_sweep(CONFIG.read_text())
    base = spec.base
    F = base.map.build()

    rows = {}
    for radius, max_iter in spec.cells():
        params = spec.cell_params(radius, max_iter)
        fld = field.scan(F, base.region, base.embedding, params, workers=args.workers)
        rows[(radius, max_iter)] = fld.fraction_plotted()

    radii = spec.radii
    print("fraction of voxels plotted (escape time, Newton cubic, 33^3)")
    print("maxIter  " + "".join(f"r={r:<8g}" for r in radii))
    for it in spec.iteration_counts:
        cells = "".join(f"{rows[(r, it)]:<10.4f}" for r in radii)
        print(f"{it:<9}{cells}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
