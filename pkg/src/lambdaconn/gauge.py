"""2x2 connection matrices, the lambda-gauge transform, and commutant algebra.

The convention fixed once and for all: the connection is (lambda d/dx + A)dx
acting on column vectors, and a frame change R sends A to

    R^{-1} A R + lambda R^{-1} dR/dx.

Every sign elsewhere in the package is a consequence of this formula.
"""

from gmpy2 import mpq

from . import series as S
from .errors import (
    ChartMismatch,
    CurveMismatch,
    NotInCommutant,
    NotInvertible,
    NotRegular,
)
from .series import BiSeries, Truncation


class Mat2:
    """Dense 2x2 matrix of BiSeries sharing one chart."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        chart = a.chart
        for s in (b, c, d):
            if s.chart != chart:
                raise ChartMismatch("matrix entries on different charts")
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls, trunc, chart):
        one = BiSeries.constant(trunc, chart, 1)
        zero = BiSeries.zero(trunc, chart)
        return cls(one, zero, zero, one)

    @classmethod
    def zero(cls, trunc, chart):
        z = BiSeries.zero(trunc, chart)
        return cls(z, z, z, z)

    @property
    def chart(self):
        return self.a.chart

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __add__(self, other):
        return Mat2(self.a + other.a, self.b + other.b,
                    self.c + other.c, self.d + other.d)

    def __sub__(self, other):
        return Mat2(self.a - other.a, self.b - other.b,
                    self.c - other.c, self.d - other.d)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def __matmul__(self, other):
        return Mat2(self.a * other.a + self.b * other.c,
                    self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c,
                    self.c * other.b + self.d * other.d)

    def scale(self, f):
        """Multiply every entry by a BiSeries or rational."""
        return Mat2(self.a * f, self.b * f, self.c * f, self.d * f)

    def trace(self):
        return self.a + self.d

    def det(self):
        return self.a * self.d - self.b * self.c

    def adjugate(self):
        return Mat2(self.d, -self.b, -self.c, self.a)

    def inverse(self):
        det = self.det()
        d0 = det.lambda_slice(0)
        if d0.is_zero():
            raise NotInvertible("determinant vanishes at lambda^0")
        return self.adjugate().scale(S.invert(det))

    def differentiate(self):
        return Mat2(*(S.differentiate(e) for e in self.entries()))

    def lambda_slice(self, i):
        return Mat2(*(e.lambda_slice(i) for e in self.entries()))

    def lambda_shift(self, k):
        return Mat2(*(e.lambda_shift(k) for e in self.entries()))

    def commutator(self, other):
        return (self @ other) - (other @ self)

    def is_zero(self):
        return all(e.is_zero() for e in self.entries())

    def is_integral(self):
        return all(e.is_integral() for e in self.entries())

    def polar_part(self):
        return Mat2(*(e.polar_part() for e in self.entries()))

    def with_trunc(self, trunc):
        return Mat2(*(e.with_trunc(trunc) for e in self.entries()))

    def common_trunc(self) -> Truncation:
        t = self.a.trunc
        for e in (self.b, self.c, self.d):
            t = t.meet(e.trunc)
        return t

    def __repr__(self):
        return f"Mat2({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"


class MatrixConnection:
    """A(x,lambda) representing (lambda d/dx + A)dx; optional attached curve."""

    __slots__ = ("A", "curve")

    def __init__(self, A: Mat2, curve=None):
        self.A = A
        self.curve = curve

    @property
    def chart(self):
        return self.A.chart


class GaugeMatrix:
    """Frame change R with lambda^0 determinant not identically zero."""

    __slots__ = ("R",)

    def __init__(self, R: Mat2):
        if R.det().lambda_slice(0).is_zero():
            raise NotInvertible("gauge matrix determinant vanishes at lambda^0")
        self.R = R


class ScalarGauge:
    """Rank-1 frame change r: a unit of the Laurent-lambda ring."""

    __slots__ = ("r",)

    def __init__(self, r: BiSeries):
        if r.lambda_slice(0).is_zero():
            raise NotInvertible("scalar gauge vanishes at lambda^0")
        self.r = r


def gauge_matrix(conn: MatrixConnection, gauge: GaugeMatrix) -> MatrixConnection:
    R = gauge.R
    if conn.chart != R.chart:
        raise ChartMismatch("gauge and connection on different charts")
    Rinv = R.inverse()
    new_A = (Rinv @ conn.A @ R) + (Rinv @ R.differentiate()).lambda_shift(1)
    return MatrixConnection(new_A, conn.curve)


def gauge_scalar(a: BiSeries, gauge: ScalarGauge) -> BiSeries:
    r = gauge.r
    if a.chart != r.chart:
        raise ChartMismatch("gauge and connection on different charts")
    dlog = S.invert(r) * S.differentiate(r)
    return a + dlog.lambda_shift(1)


def spectral_invariants(conn: MatrixConnection):
    tr = conn.A.trace()
    det = conn.A.det()
    if conn.curve is not None and conn.chart == S.CHART_BASE:
        if not (tr.lambda_slice(0) - conn.curve.t).is_zero():
            raise CurveMismatch("lambda^0 trace differs from t")
        if not (det.lambda_slice(0) - conn.curve.d).is_zero():
            raise CurveMismatch("lambda^0 determinant differs from d")
    return tr, det


def matrix_residue(conn: MatrixConnection):
    return [[S.residue_at_zero(conn.A.a), S.residue_at_zero(conn.A.b)],
            [S.residue_at_zero(conn.A.c), S.residue_at_zero(conn.A.d)]]


def commutant_decompose(B: Mat2, A0: Mat2):
    """Write B = f I + g A0 for B commuting with a regular A0.

    The pivot is the traceless part's entry of minimal valuation, tried in
    the fixed order b, c, a, so divisions stay by the most invertible entry.
    """
    half_tr = A0.trace() * mpq(1, 2)
    traceless = Mat2(A0.a - half_tr, A0.b, A0.c, A0.d - half_tr)
    candidates = [(traceless.b, B.b), (traceless.c, B.c),
                  (traceless.a, B.a - B.trace() * mpq(1, 2))]
    pivot = None
    for piv, rhs in candidates:
        if piv.is_zero():
            continue
        if pivot is None or piv.valuation() < pivot[0].valuation():
            pivot = (piv, rhs)
    if pivot is None:
        raise NotRegular("A0 is a multiple of the identity within the window")
    piv, rhs = pivot
    g = rhs * S.invert(piv)
    f = B.trace() * mpq(1, 2) - g * half_tr
    ident = Mat2.identity(B.common_trunc(), B.chart)
    recon = ident.scale(f) + A0.scale(g)
    if not (B - recon).is_zero():
        raise NotInCommutant("B does not commute with A0 within the window")
    return f, g


def solve_sylvester_offdiag(D0_diff: BiSeries, rhs: Mat2) -> Mat2:
    """Solve [diag(d1,d2), X] = rhs for off-diagonal X, rhs off-diagonal.

    D0_diff = d1 - d2 must be invertible; X is off-diagonal with
    X12 = rhs12 / (d1 - d2), X21 = -rhs21 / (d1 - d2).
    """
    inv = S.invert(D0_diff)
    zero = BiSeries.zero(rhs.common_trunc(), rhs.chart)
    return Mat2(zero, rhs.b * inv, -(rhs.c * inv), zero)


def solve_linear(rows, rhs, trunc, chart):
    """Exact Gaussian elimination over truncated Laurent series.

    rows: list of lists of BiSeries (coefficients), rhs: list of BiSeries.
    Returns a solution vector with free variables set to zero, or None if
    the system is inconsistent within the window.  Pivots are chosen by
    minimal valuation to keep divisions by the most unit-like entries.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    rows = [list(r) for r in rows]
    rhs = list(rhs)
    where = [-1] * n
    row = 0
    for col in range(n):
        best = None
        for r in range(row, m):
            e = rows[r][col]
            if e.is_zero():
                continue
            if best is None or e.valuation() < rows[best][col].valuation():
                best = r
        if best is None:
            continue
        rows[row], rows[best] = rows[best], rows[row]
        rhs[row], rhs[best] = rhs[best], rhs[row]
        inv = S.invert(rows[row][col])
        rows[row] = [e * inv for e in rows[row]]
        rhs[row] = rhs[row] * inv
        for r in range(m):
            if r == row:
                continue
            factor = rows[r][col]
            if factor.is_zero():
                continue
            rows[r] = [e - factor * p for e, p in zip(rows[r], rows[row])]
            rhs[r] = rhs[r] - factor * rhs[row]
        where[col] = row
        row += 1
        if row == m:
            break
    # consistency: remaining rows must have zero rhs
    for r in range(row, m):
        if not rhs[r].is_zero():
            return None
    sol = []
    zero = BiSeries.zero(trunc, chart)
    for col in range(n):
        sol.append(rhs[where[col]] if where[col] >= 0 else zero)
    return sol
