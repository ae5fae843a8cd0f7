"""Order-by-order diagonalization of lambda d/dx + A with split leading term.

When A0 has distinct eigenvalues whose difference is invertible in the
coefficient ring, the connection is formally gauge-equivalent to a diagonal
one: pick an eigenbasis at lambda^0, then at each lambda-order kill the
off-diagonal defect by a Sylvester solve (division by the eigenvalue
difference) while the diagonal defect accumulates into the result.

Exactness demands a rational square root of the discriminant; inputs whose
splitting field is a genuine extension are rejected, not approximated.
"""

from gmpy2 import isqrt, mpq

from . import series as S
from . import spectral as SP
from .errors import IrrationalSplitting, NotSemisimple, NotUnramified
from .series import BiSeries, Truncation


def sqrt_lambda0(a: BiSeries) -> BiSeries:
    """Rational series square root of a pure-lambda^0 Laurent series.

    Needs even valuation and a leading coefficient that is a square in Q;
    the branch with positive leading coefficient is returned.
    """
    if not a.is_pure_lambda0():
        raise IrrationalSplitting("square root expects a pure-lambda^0 series")
    if a.is_zero():
        raise NotSemisimple("eigenvalue difference vanishes within the window")
    v = a.valuation()
    if v % 2 != 0:
        raise IrrationalSplitting(f"odd valuation {v}: no series square root")
    c = a.coeff(0, v)
    num, den = c.numerator, c.denominator
    if num < 0:
        raise IrrationalSplitting(f"negative leading coefficient {c}")
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise IrrationalSplitting(f"leading coefficient {c} is not a rational square")
    root_c = mpq(rn, rd)
    # a = c x^v (1 + h); Newton for sqrt(1+h): s <- (s + (1+h)/s)/2
    h = (a * (1 / c)).x_shift(-v) - 1
    s = BiSeries.constant(h.trunc, a.chart, 1)
    target = 1 + h
    nw = h.trunc.z_order
    for _ in range(nw + 1):
        err = S._clip_n(s * s - target, nw)
        if err.is_zero():
            break
        s = S._clip_n(s - err * S.invert(2 * s), nw)
    return (s * root_c).x_shift(v // 2)


class DiagonalizationResult:
    """R with gauge(A, R) = D diagonal; sheets records the branch order."""

    __slots__ = ("R", "D", "sheets")

    def __init__(self, R, D, sheets):
        self.R = R
        self.D = D
        self.sheets = sheets


def _eigen_frame(A0, xi_p, xi_m):
    """Eigenvector columns of A0 for eigenvalues (xi_p, xi_m).

    Column for xi is (q, xi - p) when the top-right entry q has minimal
    valuation, else (xi - s, r) from the bottom row; avoids dividing by
    (or pivoting on) non-units later.
    """
    from .gauge import Mat2

    p, q, r, s_ = A0.a, A0.b, A0.c, A0.d
    vq = q.valuation() if not q.is_zero() else None
    vr = r.valuation() if not r.is_zero() else None
    if vq is None and vr is None:
        # diagonal A0: identity frame, branch order given by the inputs
        tr = A0.trace()
        if (p - xi_p).is_zero():
            return Mat2.identity(p.trunc, A0.chart), ("+", "-")
        return Mat2.identity(p.trunc, A0.chart), ("-", "+")
    if vr is None or (vq is not None and vq <= vr):
        return Mat2(q, q, xi_p - p, xi_m - p), ("+", "-")
    return Mat2(xi_p - s_, xi_m - s_, r, r), ("+", "-")


def diagonalize(conn, eigendiff: BiSeries | None = None) -> DiagonalizationResult:
    """Formal diagonalization of a MatrixConnection.

    eigendiff optionally supplies the eigenvalue difference xi_p - xi_m
    (with its sign fixing the branch); when omitted it is the canonical
    square root of the lambda^0 discriminant.
    """
    from .gauge import GaugeMatrix, Mat2, MatrixConnection, gauge_matrix

    A0 = conn.A.lambda_slice(0)
    tr = A0.trace()
    disc = tr * tr - 4 * A0.det()
    if eigendiff is None:
        eigendiff = sqrt_lambda0(disc)
    elif not (eigendiff * eigendiff - disc).is_zero():
        raise IrrationalSplitting("supplied eigendiff does not square to the discriminant")
    if eigendiff.is_zero():
        raise NotSemisimple("eigenvalue difference vanishes within the window")
    half = mpq(1, 2)
    xi_p = (tr + eigendiff) * half
    xi_m = (tr - eigendiff) * half

    R0, sheets = _eigen_frame(A0, xi_p, xi_m)
    R = R0
    current = gauge_matrix(conn, GaugeMatrix(R0))
    lam_order = current.A.common_trunc().lambda_order
    diff = current.A.a.lambda_slice(0) - current.A.d.lambda_slice(0)
    inv_diff = S.invert(diff)
    for j in range(1, lam_order):
        Aj = current.A.lambda_slice(j)
        if Aj.b.is_zero() and Aj.c.is_zero():
            continue
        zero = BiSeries.zero(Aj.b.trunc, conn.chart)
        Sj = Mat2(zero, -(Aj.b * inv_diff), Aj.c * inv_diff, zero)
        step = Mat2.identity(Sj.common_trunc(), conn.chart) + Sj.lambda_shift(j)
        current = gauge_matrix(current, GaugeMatrix(step))
        R = R @ step
    D = current.A
    return DiagonalizationResult(GaugeMatrix(R), MatrixConnection(D, conn.curve),
                                 sheets)


def split_unramified(conn):
    """Unramified split: A gauge-equivalent to diag(aPlus, aMinus) over C[[z]]."""
    if conn.curve is None or SP.classify_curve(conn.curve) != SP.UNRAMIFIED:
        raise NotUnramified("split_unramified needs an attached Unramified curve")
    res = diagonalize(conn)
    return res.D.A.a, res.D.A.d, res.R
