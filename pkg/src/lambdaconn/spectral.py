"""Spectral curve data and the ramified double-cover chart.

A curve is the pair (t, d) cutting out xi^2 - t(z)xi + d(z) = 0.  When the
discriminant t^2 - 4d has a simple zero at the origin the two sheets meet
there, and the cover coordinate zh satisfies zh^2 = t^2 - 4d.  Everything
downstream (pullback, descent, the canonical one-form) is phrased through
that chart.
"""

from gmpy2 import mpq

from . import series as S
from .errors import InsufficientPrecision, NotSmoothRamified
from .series import BiSeries, Truncation

SMOOTH_RAMIFIED = "SmoothRamified"
UNRAMIFIED = "Unramified"
DEGENERATE = "Degenerate"


class SpectralCurve:
    """The pair (t, d): Taylor series in z with a shared window."""

    __slots__ = ("t", "d")

    def __init__(self, t: BiSeries, d: BiSeries):
        for name, s in (("t", t), ("d", d)):
            if s.chart != S.CHART_BASE:
                raise NotSmoothRamified(f"{name} must live on the base chart")
            if not s.is_pure_lambda0() or not s.is_integral():
                raise NotSmoothRamified(f"{name} must be a Taylor series in z")
        self.t = t
        self.d = d

    def discriminant(self) -> BiSeries:
        return self.t * self.t - 4 * self.d

    def __eq__(self, other):
        if not isinstance(other, SpectralCurve):
            return NotImplemented
        return (self.t - other.t).is_zero() and (self.d - other.d).is_zero()

    def __repr__(self):
        return f"SpectralCurve(t={self.t!r}, d={self.d!r})"


def classify_curve(curve: SpectralCurve) -> str:
    disc = curve.discriminant()
    if disc.is_zero():
        raise InsufficientPrecision(
            "discriminant vanishes through the whole z-window")
    v = disc.valuation()
    if v == 0:
        return UNRAMIFIED
    if v == 1:
        return SMOOTH_RAMIFIED
    return DEGENERATE


class CoverChart:
    """Double-cover chart of a smooth ramified curve.

    zOfZhat: z as an even series in zh, valuation 2.
    jacobian: dz/dzh, valuation 1, odd.
    discUnit: the unit u with t^2 - 4d = z u(z), base chart.
    mForm: coefficient of the canonical form against dzh, the eigenvalue
    branch (t + zh)/2 pulled back and converted from dz to dzh.
    """

    __slots__ = ("curve", "zOfZhat", "jacobian", "discUnit", "mForm")

    def __init__(self, curve, zOfZhat, jacobian, discUnit, mForm):
        self.curve = curve
        self.zOfZhat = zOfZhat
        self.jacobian = jacobian
        self.discUnit = discUnit
        self.mForm = mForm

    def pullback(self, f: BiSeries) -> BiSeries:
        """Base-chart series composed with zOfZhat."""
        return S.substitute(f, self.zOfZhat)

    def xi_plus(self) -> BiSeries:
        zh = BiSeries.monomial(self.zOfZhat.trunc, S.CHART_COVER, 1, 0, 1)
        return (self.pullback(self.curve.t) + zh) * mpq(1, 2)

    def xi_minus(self) -> BiSeries:
        zh = BiSeries.monomial(self.zOfZhat.trunc, S.CHART_COVER, 1, 0, 1)
        return (self.pullback(self.curve.t) - zh) * mpq(1, 2)


def build_cover_chart(curve: SpectralCurve) -> CoverChart:
    if classify_curve(curve) != SMOOTH_RAMIFIED:
        raise NotSmoothRamified(
            f"cover chart needs a SmoothRamified curve, got {classify_curve(curve)}")
    disc = curve.discriminant()
    disc_unit = disc.x_shift(-1)
    # solve z u(z) = zh^2: revert the simple zero, then plug in w = zh^2
    w_of_disc = S.revert(disc)
    t = w_of_disc.trunc
    zh_sq = BiSeries(Truncation(2 * t.z_order, t.lambda_order, 0),
                     S.CHART_COVER, {(0, 2): 1})
    z_of_zh = S.substitute(w_of_disc, zh_sq)
    jac = S.differentiate(z_of_zh)
    chart = CoverChart(curve, z_of_zh, jac, disc_unit, None)
    m_form = chart.xi_plus() * jac
    chart.mForm = m_form
    return chart


def sigma_conjugate(f: BiSeries) -> BiSeries:
    """Galois involution zh -> -zh on cover-chart series."""
    if f.chart != S.CHART_COVER:
        raise S.ChartMismatch("sigma acts on the cover chart")
    return BiSeries(f.trunc, f.chart,
                    {(i, j): (-c if j % 2 else c)
                     for (i, j), c in f.coeffs.items()}, f.zwin)


def sigma_conjugate_connection(a: BiSeries) -> BiSeries:
    """dzh-coefficient of the pulled-back form: a dzh -> a(-zh) d(-zh)."""
    return -sigma_conjugate(a)
