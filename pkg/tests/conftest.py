"""Shared test helpers."""

import math

from qjulia import quat
from qjulia.dynamics import (
    ClassifierMethod,
    ClassifierParams,
    PoleError,
    QRationalMap,
    eval_map,
)
from qjulia.quat import Quaternion


def threshold_margin(
    F: QRationalMap, seed: Quaternion, params: ClassifierParams
) -> float:
    """Smallest |decision statistic - radius| the classifier examines.

    Replays the orbit of seed under F and tracks how close the decision
    statistic (iterate norm for escape time, successive-iterate distance
    for cut-off rate) comes to the threshold over every step the
    classifier actually looks at.  Seeds with a tiny margin sit
    numerically on the plotted/unplotted fence, so equivalence and
    symmetry tests exclude them instead of demanding a particular side.
    """
    margin = math.inf
    p = seed
    for _ in range(params.max_iter):
        try:
            nxt = eval_map(F, p)
        except PoleError:
            return margin
        if not quat.is_finite(nxt):
            return margin
        if params.method is ClassifierMethod.ESCAPE_TIME:
            margin = min(margin, abs(quat.norm(nxt) - params.radius))
        else:
            d = quat.distance(nxt, p)
            margin = min(margin, abs(d - params.radius))
            if d < params.radius:
                return margin
        p = nxt
    return margin
