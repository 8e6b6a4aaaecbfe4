"""Independent complex-plane cross-check for the quaternion classifiers.

Everything numeric in this module is written against a plain (re, im)
pair on purpose: the whole point is to validate the quaternion pipeline
against separately written arithmetic, so nothing here may call into
``qjulia.quat`` or reuse iteration loops from ``qjulia.dynamics``.  Only
the outcome/parameter record types are shared so results compare 1:1.

Formulas deliberately follow the same evaluation order as the scalar
quaternion path (Horner evaluation, division as multiply-by-inverse),
which makes the two implementations agree to the last bit on the
complex slice rather than merely to a tolerance.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from qjulia.dynamics import ClassifierMethod, ClassifierParams, OutcomeKind

EPS_DIV = 1e-300


class Pole2d(ArithmeticError):
    pass


class Complex(NamedTuple):
    re: float
    im: float


C_ZERO = Complex(0.0, 0.0)
C_ONE = Complex(1.0, 0.0)

ComplexLike = Union[float, int, complex, Complex]


def as_complex(v: ComplexLike) -> Complex:
    if isinstance(v, Complex):
        return v
    if isinstance(v, complex):
        return Complex(v.real, v.imag)
    return Complex(float(v), 0.0)


def c_add(a: Complex, b: Complex) -> Complex:
    return Complex(a.re + b.re, a.im + b.im)


def c_sub(a: Complex, b: Complex) -> Complex:
    return Complex(a.re - b.re, a.im - b.im)


def c_mul(a: Complex, b: Complex) -> Complex:
    return Complex(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)


def c_inv(a: Complex) -> Complex:
    ns = a.re * a.re + a.im * a.im
    if not ns > EPS_DIV:
        raise Pole2d(f"norm_sq={ns!r}")
    return Complex(a.re / ns, -a.im / ns)


def c_abs(a: Complex) -> float:
    return math.sqrt(a.re * a.re + a.im * a.im)


def c_dist(a: Complex, b: Complex) -> float:
    dr = a.re - b.re
    di = a.im - b.im
    return math.sqrt(dr * dr + di * di)


def c_finite(a: Complex) -> bool:
    return math.isfinite(a.re) and math.isfinite(a.im)


class CMap(NamedTuple):
    """Rational map as ascending-degree coefficient tuples."""

    numerator: tuple[Complex, ...]
    denominator: tuple[Complex, ...]


def cmap(num: Sequence[ComplexLike], den: Sequence[ComplexLike] = (1.0,)) -> CMap:
    return CMap(
        tuple(as_complex(c) for c in num), tuple(as_complex(c) for c in den)
    )


def eval_cpoly(coeffs: tuple[Complex, ...], z: Complex) -> Complex:
    acc = coeffs[-1]
    for k in range(len(coeffs) - 2, -1, -1):
        acc = c_add(c_mul(acc, z), coeffs[k])
    return acc


def eval_cmap(F: CMap, z: Complex) -> Complex:
    num = eval_cpoly(F.numerator, z)
    den = eval_cpoly(F.denominator, z)
    return c_mul(num, c_inv(den))


class Outcome2d(NamedTuple):
    kind: OutcomeKind
    steps: int
    last: Optional[Complex] = None


def classify2d(F: CMap, seed: Complex, params: ClassifierParams) -> Outcome2d:
    """Complex twin of dynamics.classify; same decision rules throughout."""
    if params.method is ClassifierMethod.ESCAPE_TIME:
        z = seed
        first_out = 0
        for n in range(1, params.max_iter + 1):
            try:
                z = eval_cmap(F, z)
            except Pole2d:
                return Outcome2d(OutcomeKind.POLE_HIT, n)
            if not c_finite(z):
                return Outcome2d(OutcomeKind.ESCAPED, first_out if first_out else n)
            if first_out == 0 and c_abs(z) > params.radius:
                first_out = n
        if c_abs(z) > params.radius:
            return Outcome2d(OutcomeKind.ESCAPED, first_out)
        return Outcome2d(OutcomeKind.INDETERMINATE, params.max_iter, z)

    prev = seed
    for n in range(1, params.max_iter + 1):
        try:
            cur = eval_cmap(F, prev)
        except Pole2d:
            return Outcome2d(OutcomeKind.POLE_HIT, n)
        if not c_finite(cur):
            return Outcome2d(OutcomeKind.ESCAPED, n)
        if c_dist(cur, prev) < params.radius:
            return Outcome2d(OutcomeKind.CONVERGED, n, cur)
        prev = cur
    return Outcome2d(OutcomeKind.INDETERMINATE, params.max_iter, prev)


def is_plotted2d(outcome: Outcome2d, params: ClassifierParams) -> bool:
    if outcome.kind is OutcomeKind.POLE_HIT or outcome.kind is OutcomeKind.ESCAPED:
        return False
    if params.method is ClassifierMethod.ESCAPE_TIME:
        return outcome.kind is OutcomeKind.INDETERMINATE
    if outcome.kind is OutcomeKind.INDETERMINATE:
        return True
    return outcome.steps >= params.cutoff_count


def render_slice2d(
    F: CMap,
    window: tuple[float, float, float, float],
    resolution: tuple[int, int],
    params: ClassifierParams,
) -> np.ndarray:
    """Plotted-bit array over the window; bits[iy, ix], iy=0 at ymin.

    Samples window corners at min + i*delta, the same grid convention the
    volume scanner uses, so a 2-D slice and the matching 3-D mid-plane
    sample identical complex numbers.
    """
    xmin, xmax, ymin, ymax = window
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError("resolution components must be >= 2")
    if not (xmin < xmax and ymin < ymax):
        raise ValueError("window must have positive extent")
    dx = (xmax - xmin) / (nx - 1)
    dy = (ymax - ymin) / (ny - 1)
    bits = np.zeros((ny, nx), dtype=bool)
    for iy in range(ny):
        y = ymin + iy * dy
        for ix in range(nx):
            z = Complex(xmin + ix * dx, y)
            bits[iy, ix] = is_plotted2d(classify2d(F, z, params), params)
    return bits


def write_pgm(path, bits: np.ndarray) -> None:
    """Binary P5 bitmap, plotted pixels white; top image row = max y."""
    if bits.ndim != 2:
        raise ValueError("bits must be a 2-D array")
    ny, nx = bits.shape
    payload = np.where(bits[::-1, :], np.uint8(255), np.uint8(0))
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(payload.tobytes())
