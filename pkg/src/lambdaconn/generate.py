"""Seeded random instance generation for the verification suites and CLI.

All generators are deterministic in the seed and rejection-sample until the
defining constraints hold: ramified curves need a simple discriminant zero,
unramified matrix instances need a perfect-square leading discriminant so
the splitting stays rational.  Coefficients stay small integers (or halves
and quarters) so exact arithmetic stays desk-sized.
"""

import random

from gmpy2 import mpq

from . import series as S
from . import spectral as SP
from .abelianize import ScalarConnection
from .errors import InsufficientPrecision
from .gauge import Mat2, MatrixConnection
from .series import BiSeries, Truncation

PROFILES = ("ramified-matrix", "ramified-scalar", "unramified-matrix")


def _small(rng):
    return mpq(rng.randint(-4, 4), rng.choice([1, 2, 4]))


def _taylor(rng, trunc, chart, density=0.4, lam_min=0, lam_max=None):
    hi = trunc.lambda_order if lam_max is None else lam_max
    coeffs = {}
    for i in range(lam_min, hi):
        for j in range(trunc.z_order):
            if rng.random() < density:
                coeffs[(i, j)] = _small(rng)
    return BiSeries(trunc, chart, coeffs)


def random_ramified_curve(rng: random.Random, trunc: Truncation) -> SP.SpectralCurve:
    base = Truncation(trunc.z_order, trunc.lambda_order, 0)
    for _ in range(1000):
        t = _taylor(rng, base, S.CHART_BASE, lam_max=1)
        d = _taylor(rng, base, S.CHART_BASE, lam_max=1)
        curve = SP.SpectralCurve(t, d)
        try:
            if SP.classify_curve(curve) == SP.SMOOTH_RAMIFIED:
                return curve
        except InsufficientPrecision:
            continue
    raise RuntimeError("rejection sampling failed to find a ramified curve")


def _unimodular(rng, trunc):
    """Product of elementary shears: integral with integral inverse."""
    one = BiSeries.constant(trunc, S.CHART_BASE, 1)
    zero = BiSeries.zero(trunc, S.CHART_BASE)
    u = BiSeries(trunc, S.CHART_BASE,
                 {(0, j): mpq(rng.randint(-2, 2)) for j in range(2)})
    l = BiSeries(trunc, S.CHART_BASE,
                 {(0, j): mpq(rng.randint(-2, 2)) for j in range(2)})
    E = Mat2(one, u, zero, one)
    F = Mat2(one, zero, l, one)
    return E @ F


def ramified_matrix(rng: random.Random, trunc: Truncation) -> MatrixConnection:
    """Integral A realizing a random ramified curve at lambda^0."""
    curve = random_ramified_curve(rng, trunc)
    base = Truncation(trunc.z_order, trunc.lambda_order, 0)
    one = BiSeries.constant(base, S.CHART_BASE, 1)
    zero = BiSeries.zero(base, S.CHART_BASE)
    companion = Mat2(zero, -curve.d.with_trunc(base), one,
                     curve.t.with_trunc(base))
    U = _unimodular(rng, base)
    A0 = U.inverse() @ companion @ U
    # conjugation by a unimodular integral frame keeps entries integral
    A0 = Mat2(*(e.integral_part() for e in A0.entries()))
    tail = Mat2(*(_taylor(rng, base, S.CHART_BASE, density=0.25, lam_min=1)
                  for _ in range(4)))
    return MatrixConnection(A0 + tail, curve)


def ramified_scalar(rng: random.Random, trunc: Truncation,
                    curve: SP.SpectralCurve = None) -> ScalarConnection:
    """Normalized scalar connection on the cover: mForm - lambda/(2 zh) + tail.

    trunc is the cover-chart window; the curve window is derived from it so
    the canonical form fills the whole window.
    """
    base = Truncation((trunc.z_order + 1) // 2, trunc.lambda_order, 0)
    if curve is None:
        curve = random_ramified_curve(rng, base)
    chart = SP.build_cover_chart(curve)
    t = Truncation(min(trunc.z_order, chart.mForm.trunc.z_order),
                   trunc.lambda_order, max(trunc.pole_cap, 1))
    a = chart.mForm.with_trunc(t) + \
        BiSeries.monomial(t, S.CHART_COVER, mpq(-1, 2), 1, -1) + \
        _taylor(rng, t, S.CHART_COVER, density=0.3, lam_min=1)
    return ScalarConnection(a, curve, chart, normalized=True)


def unramified_matrix(rng: random.Random, trunc: Truncation) -> MatrixConnection:
    """Integral A whose curve is unramified with rational eigenvalue split."""
    base = Truncation(trunc.z_order, trunc.lambda_order, 0)
    while True:
        alpha = _taylor(rng, base, S.CHART_BASE, lam_max=1) + rng.randint(1, 3)
        beta = _taylor(rng, base, S.CHART_BASE, lam_max=1) - rng.randint(1, 3)
        if (alpha - beta).coeff(0, 0) != 0:
            break
    t = alpha + beta
    d = alpha * beta
    curve = SP.SpectralCurve(t.with_trunc(base), d.with_trunc(base))
    one = BiSeries.constant(base, S.CHART_BASE, 1)
    zero = BiSeries.zero(base, S.CHART_BASE)
    companion = Mat2(zero, -curve.d, one, curve.t)
    U = _unimodular(rng, base)
    A0 = Mat2(*(e.integral_part() for e in (U.inverse() @ companion @ U).entries()))
    tail = Mat2(*(_taylor(rng, base, S.CHART_BASE, density=0.25, lam_min=1)
                  for _ in range(4)))
    return MatrixConnection(A0 + tail, curve)


def generate(profile: str, seed: int, trunc: Truncation):
    rng = random.Random(seed)
    if profile == "ramified-matrix":
        return ramified_matrix(rng, trunc)
    if profile == "ramified-scalar":
        return ramified_scalar(rng, trunc)
    if profile == "unramified-matrix":
        return unramified_matrix(rng, trunc)
    raise ValueError(f"unknown profile {profile!r}")
