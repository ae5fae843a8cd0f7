"""Exact truncated bivariate series: the ring C((x))[[lambda]] at finite order.

A BiSeries keeps a sparse map (lambda-exponent, x-exponent) -> rational and an
honest window.  Precision in x is tracked per lambda-order: the coefficient of
lambda^i is vouched for below z-exponent zwin[i], and every operation
recomputes these bounds from the operands (a deep pole in a lambda-tail costs
precision only at the orders it actually touches).  The Truncation attached to
a value is the declared summary window used for construction, serialization
and transcendental-op targets.  Coefficients are exact rationals (gmpy2.mpq),
so all identities asserted elsewhere in the package are exact, not
approximate.

Two chart tags exist: "z" for the base disc and "zh" for the double cover.
Mixing charts raises ChartMismatch; `substitute` is the one sanctioned door
between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from gmpy2 import mpq

from .errors import (
    ChartMismatch,
    IllFormedSubstitution,
    NonRationalLogarithm,
    NotAUnit,
    NotSimpleZero,
    NotTopologicallyNilpotent,
    PrecisionExhausted,
    ResidueObstruction,
)

CHART_BASE = "z"
CHART_COVER = "zh"

# saturation bounds for per-order windows; CAP marks "exact by construction"
CAP = 10 ** 9
NEG = -(10 ** 9)

Q = mpq


def rat(value, den=None) -> mpq:
    """Exact rational from int, string "p/q", Fraction, or (num, den)."""
    if den is not None:
        return mpq(value, den)
    return mpq(value)


def _sat(w: int) -> int:
    return min(CAP, max(NEG, w))


@dataclass(frozen=True)
class Truncation:
    """Window of retained exponents: x in [-pole_cap, z_order), lambda in [0, lambda_order)."""

    z_order: int
    lambda_order: int
    pole_cap: int = 0

    def __post_init__(self):
        if self.z_order < 1:
            raise PrecisionExhausted(f"z_order must be >= 1, got {self.z_order}")
        if self.lambda_order < 1:
            raise ValueError(f"lambda_order must be >= 1, got {self.lambda_order}")
        if self.pole_cap < 0:
            raise ValueError(f"pole_cap must be >= 0, got {self.pole_cap}")

    def meet(self, other: "Truncation") -> "Truncation":
        return Truncation(
            min(self.z_order, other.z_order),
            min(self.lambda_order, other.lambda_order),
            max(self.pole_cap, other.pole_cap),
        )

    def contains(self, i: int, j: int) -> bool:
        return 0 <= i < self.lambda_order and -self.pole_cap <= j < self.z_order


class BiSeries:
    """Immutable truncated element of C((x))[[lambda]] with a chart tag."""

    __slots__ = ("trunc", "chart", "coeffs", "zwin")

    def __init__(self, trunc: Truncation, chart: str,
                 coeffs: Mapping[tuple[int, int], object] | None = None,
                 zwin: tuple[int, ...] | None = None):
        if chart not in (CHART_BASE, CHART_COVER):
            raise ChartMismatch(f"unknown chart tag {chart!r}")
        if zwin is None:
            zwin = (trunc.z_order,) * trunc.lambda_order
        else:
            zwin = tuple(_sat(w) for w in zwin)
            assert len(zwin) == trunc.lambda_order
        clean: dict[tuple[int, int], mpq] = {}
        if coeffs:
            lam = trunc.lambda_order
            p = trunc.pole_cap
            for (i, j), c in coeffs.items():
                if not (0 <= i < lam and -p <= j < zwin[i]):
                    continue
                c = mpq(c)
                if c != 0:
                    clean[(i, j)] = c
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "zwin", zwin)

    def __setattr__(self, name, value):
        raise AttributeError("BiSeries is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, trunc: Truncation, chart: str) -> "BiSeries":
        return cls(trunc, chart, None, (CAP,) * trunc.lambda_order)

    @classmethod
    def constant(cls, trunc: Truncation, chart: str, value) -> "BiSeries":
        return cls(trunc, chart, {(0, 0): mpq(value)},
                   (CAP,) * trunc.lambda_order)

    @classmethod
    def monomial(cls, trunc: Truncation, chart: str, value, lam: int = 0,
                 power: int = 0) -> "BiSeries":
        if power < -trunc.pole_cap:
            trunc = Truncation(trunc.z_order, trunc.lambda_order, -power)
        return cls(trunc, chart, {(lam, power): mpq(value)},
                   (CAP,) * trunc.lambda_order)

    @classmethod
    def from_taylor(cls, trunc: Truncation, chart: str,
                    coeffs: Iterable) -> "BiSeries":
        """Pure-lambda^0 Taylor series from a coefficient list [c0, c1, ...]."""
        return cls(trunc, chart, {(0, j): mpq(c) for j, c in enumerate(coeffs)})

    # -- structure queries -------------------------------------------------

    def knows(self, i: int, j: int) -> bool:
        """Whether the (lambda^i, x^j) coefficient is vouched for."""
        return (0 <= i < self.trunc.lambda_order
                and -self.trunc.pole_cap <= j < self.zwin[i])

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int, j: int) -> mpq:
        return self.coeffs.get((i, j), mpq(0))

    def valuation(self) -> int | None:
        """Minimal x-exponent present, or None for the zero series."""
        if not self.coeffs:
            return None
        return min(j for (_, j) in self.coeffs)

    def max_exponent(self) -> int | None:
        if not self.coeffs:
            return None
        return max(j for (_, j) in self.coeffs)

    def slice_val(self, i: int) -> int:
        """Effective valuation of the lambda^i slice: its minimum stored
        exponent, or its window when nothing is stored (zero to that depth)."""
        js = [j for (k, j) in self.coeffs if k == i]
        return min(js) if js else self.zwin[i]

    def is_pure_lambda0(self) -> bool:
        return all(i == 0 for (i, _) in self.coeffs)

    def is_integral(self) -> bool:
        """No pole terms within the window."""
        return all(j >= 0 for (_, j) in self.coeffs)

    def lambda_slice(self, i: int) -> "BiSeries":
        """Coefficient of lambda^i as a pure-lambda^0 series."""
        zwin = (self.zwin[i],) + (CAP,) * (self.trunc.lambda_order - 1)
        return BiSeries(self.trunc, self.chart,
                        {(0, j): c for (k, j), c in self.coeffs.items() if k == i},
                        zwin)

    def lambda_shift(self, k: int) -> "BiSeries":
        """Multiply by lambda^k (k may be negative); orders outside [0, L) drop."""
        lam = self.trunc.lambda_order
        zwin = []
        for i2 in range(lam):
            i = i2 - k
            if i < 0:
                zwin.append(CAP)      # exactly zero by construction
            elif i >= lam:
                zwin.append(NEG)      # content shifted in from beyond the window
            else:
                zwin.append(self.zwin[i])
        return BiSeries(self.trunc, self.chart,
                        {(i + k, j): c for (i, j), c in self.coeffs.items()},
                        tuple(zwin))

    def x_shift(self, k: int) -> "BiSeries":
        """Multiply by x^k exactly; the window shifts along."""
        t = Truncation(max(1, _sat(self.trunc.z_order + k)),
                       self.trunc.lambda_order,
                       max(0, self.trunc.pole_cap - k))
        return BiSeries(t, self.chart,
                        {(i, j + k): c for (i, j), c in self.coeffs.items()},
                        tuple(_sat(w + k) for w in self.zwin))

    def polar_part(self) -> "BiSeries":
        # positive part is zero by construction, so orders whose window
        # reaches 0 become exact
        zwin = tuple(CAP if w >= 0 else w for w in self.zwin)
        return BiSeries(self.trunc, self.chart,
                        {(i, j): c for (i, j), c in self.coeffs.items() if j < 0},
                        zwin)

    def integral_part(self) -> "BiSeries":
        return BiSeries(self.trunc, self.chart,
                        {(i, j): c for (i, j), c in self.coeffs.items() if j >= 0},
                        self.zwin)

    def with_trunc(self, trunc: Truncation) -> "BiSeries":
        """Reinterpret on a declared uniform window; entries outside drop."""
        return BiSeries(trunc, self.chart, self.coeffs)

    # -- dunder arithmetic -------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return (self.chart == other.chart and self.trunc == other.trunc
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.chart, self.trunc,
                     tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0]))))

    def __add__(self, other):
        if isinstance(other, BiSeries):
            return add(self, other)
        return add(self, BiSeries.constant(self.trunc, self.chart, other))

    __radd__ = __add__

    def __neg__(self):
        return BiSeries(self.trunc, self.chart,
                        {k: -c for k, c in self.coeffs.items()}, self.zwin)

    def __sub__(self, other):
        if isinstance(other, BiSeries):
            return add(self, -other)
        return add(self, BiSeries.constant(self.trunc, self.chart, -mpq(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, BiSeries):
            return mul(self, other)
        c = mpq(other)
        if c == 0:
            return BiSeries(self.trunc, self.chart, None, self.zwin)
        return BiSeries(self.trunc, self.chart,
                        {k: c * v for k, v in self.coeffs.items()}, self.zwin)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, BiSeries):
            return mul(self, invert(other))
        return self * (mpq(1) / mpq(other))

    def __repr__(self):
        if not self.coeffs:
            body = "0"
        else:
            terms = []
            for (i, j) in sorted(self.coeffs, key=lambda k: (k[0], k[1])):
                c = self.coeffs[(i, j)]
                t = str(c)
                if i:
                    t += f"*L^{i}"
                if j:
                    t += f"*{self.chart}^{j}"
                terms.append(t)
            body = " + ".join(terms)
        tr = self.trunc
        return (f"BiSeries[{self.chart}; N={tr.z_order}, L={tr.lambda_order}, "
                f"P={tr.pole_cap}]({body})")


def _require_same_chart(a: BiSeries, b: BiSeries):
    if a.chart != b.chart:
        raise ChartMismatch(f"chart {a.chart!r} vs {b.chart!r}")


def _summary_trunc(zwin, lam, coeffs) -> Truncation:
    n = max(1, _sat(min(zwin))) if zwin else 1
    p = max([0] + [-j for (_, j) in coeffs if j < 0])
    return Truncation(n, lam, p)


def _clip_n(s: BiSeries, n: int) -> BiSeries:
    """Clamp every per-order window (and the summary) to n."""
    zwin = tuple(min(w, n) for w in s.zwin)
    t = Truncation(min(s.trunc.z_order, n), s.trunc.lambda_order,
                   s.trunc.pole_cap)
    return BiSeries(t, s.chart, s.coeffs, zwin)


# -- ring operations -------------------------------------------------------

def add(a: BiSeries, b: BiSeries) -> BiSeries:
    _require_same_chart(a, b)
    lam = min(a.trunc.lambda_order, b.trunc.lambda_order)
    zwin = tuple(min(a.zwin[i], b.zwin[i]) for i in range(lam))
    out = dict(a.coeffs)
    for k, c in b.coeffs.items():
        s = out.get(k, mpq(0)) + c
        if s == 0:
            out.pop(k, None)
        else:
            out[k] = s
    out = {(i, j): c for (i, j), c in out.items() if i < lam and j < zwin[i]}
    t = Truncation(min(a.trunc.z_order, b.trunc.z_order), lam,
                   max(a.trunc.pole_cap, b.trunc.pole_cap))
    return BiSeries(t, a.chart, out, zwin)


def sub(a: BiSeries, b: BiSeries) -> BiSeries:
    return add(a, -b)


def mul(a: BiSeries, b: BiSeries) -> BiSeries:
    """Cauchy product, exact within the recomputed per-order windows.

    For output order i the product is complete below
    min over ia+ib=i of min(zwin_a[ia] + val_b[ib], zwin_b[ib] + val_a[ia]).
    """
    _require_same_chart(a, b)
    la, lb = a.trunc.lambda_order, b.trunc.lambda_order
    lam = min(la, lb)
    sva = [a.slice_val(i) for i in range(la)]
    svb = [b.slice_val(i) for i in range(lb)]
    zwa, zwb = a.zwin, b.zwin
    zwin = []
    for i in range(lam):
        w = CAP
        for ia in range(max(0, i - lb + 1), min(i, la - 1) + 1):
            ib = i - ia
            w = min(w, zwa[ia] + svb[ib], zwb[ib] + sva[ia])
        zwin.append(_sat(w))

    # group by lambda-order with sorted x-exponent lists for early clipping
    def grouped(s: BiSeries):
        g: dict[int, list[tuple[int, mpq]]] = {}
        for (i, j), c in s.coeffs.items():
            g.setdefault(i, []).append((j, c))
        for lst in g.values():
            lst.sort()
        return g

    ga, gb = grouped(a), grouped(b)
    out: dict[tuple[int, int], mpq] = {}
    for ia, ta in ga.items():
        for ib, tb in gb.items():
            i = ia + ib
            if i >= lam:
                continue
            n = zwin[i]
            for ja, ca in ta:
                for jb, cb in tb:
                    j = ja + jb
                    if j >= n:
                        break
                    key = (i, j)
                    s = out.get(key, mpq(0)) + ca * cb
                    if s == 0:
                        out.pop(key, None)
                    else:
                        out[key] = s
    return BiSeries(_summary_trunc(zwin, lam, out), a.chart, out, tuple(zwin))


def invert(a: BiSeries) -> BiSeries:
    """Multiplicative inverse; the lambda^0 part must be a nonzero Laurent series."""
    a0 = a.lambda_slice(0)
    if a0.is_zero():
        raise NotAUnit("lambda^0 part vanishes on the whole window")
    v = a0.valuation()
    c = a0.coeff(0, v)
    # leading-term division: a0 = c x^v (1 + h0) with h0 of valuation >= 1
    h0 = (a0 * (mpq(1) / c)).x_shift(-v) - 1
    nw = h0.zwin[0]
    geo = BiSeries.constant(h0.trunc, a.chart, 1)
    term = geo
    while True:
        term = _clip_n(mul(term, -h0), nw)
        if term.is_zero():
            break
        geo = add(geo, term)
    b0 = (geo * (mpq(1) / c)).x_shift(-v)
    # lambda-adic correction: a = a0 (1 + a0^{-1}(a - a0))
    h = mul(b0, a) - 1          # lambda-order >= 1
    res = BiSeries.constant(h.trunc, a.chart, 1)
    term = res
    for _ in range(a.trunc.lambda_order):
        term = mul(term, -h)
        if term.is_zero():
            break
        res = add(res, term)
    return mul(res, b0)


def differentiate(a: BiSeries) -> BiSeries:
    """Termwise d/dx; lambda is a constant of the coefficient ring."""
    t = Truncation(max(1, a.trunc.z_order - 1), a.trunc.lambda_order,
                   a.trunc.pole_cap + 1)
    return BiSeries(t, a.chart,
                    {(i, j - 1): c * j for (i, j), c in a.coeffs.items() if j != 0},
                    tuple(_sat(w - 1) for w in a.zwin))


def antidifferentiate(a: BiSeries) -> BiSeries:
    """Termwise primitive with zero constant term; x^-1 terms obstruct."""
    for i in range(a.trunc.lambda_order):
        if a.coeff(i, -1) != 0:
            raise ResidueObstruction(i)
    t = Truncation(_sat(a.trunc.z_order + 1), a.trunc.lambda_order,
                   max(0, a.trunc.pole_cap - 1))
    return BiSeries(t, a.chart,
                    {(i, j + 1): c / (j + 1) for (i, j), c in a.coeffs.items()},
                    tuple(_sat(w + 1) for w in a.zwin))


def _sum_of_powers(a: BiSeries, term_map) -> BiSeries:
    """1 + sum_{k>=1} term_map(k) * a^k, clipped to a's declared z-order."""
    nw = min(a.trunc.z_order, max(w for w in a.zwin))
    acc = BiSeries.constant(a.trunc, a.chart, 1)
    power = acc
    k = 0
    while True:
        k += 1
        power = _clip_n(mul(power, a), nw)
        # a zero power still carries window information: its products with
        # the unknown tails of a constrain what the sum can vouch for, so
        # merge the window and only stop once it no longer binds anything
        acc = add(acc, power * term_map(k))
        if power.is_zero() and all(pw >= aw
                                   for pw, aw in zip(power.zwin, acc.zwin)):
            break
        if k > 100000:
            raise PrecisionExhausted("power-series summation failed to terminate")
    return acc


def exp_series(a: BiSeries) -> BiSeries:
    """sum a^k / k!; needs the lambda^0 part to have strictly positive valuation."""
    a0 = a.lambda_slice(0)
    if not a0.is_zero() and a0.valuation() < 1:
        raise NotTopologicallyNilpotent(
            "lambda^0 part must vanish at x=0 for exp to converge")
    fact = [mpq(1)]

    def inv_factorial(k):
        while len(fact) <= k:
            fact.append(fact[-1] * len(fact))
        return mpq(1) / fact[k]

    return _sum_of_powers(a, inv_factorial)


def log_series(a: BiSeries) -> BiSeries:
    """log of 1 + h; the leading constant must be exactly 1 (kept rational)."""
    a0 = a.lambda_slice(0)
    if a0.is_zero():
        raise NotAUnit("lambda^0 part vanishes on the whole window")
    if a0.valuation() < 0 or a0.coeff(0, 0) == 0:
        raise NonRationalLogarithm(
            "lambda^0 part must be a unit of C[[x]] with constant term 1")
    if a0.coeff(0, 0) != 1:
        raise NonRationalLogarithm(
            f"leading constant {a0.coeff(0, 0)} != 1; factor it out first")
    h = a - 1
    out = _sum_of_powers(h, lambda k: mpq((-1) ** (k + 1), k)) - 1
    return out


def substitute(f: BiSeries, g: BiSeries) -> BiSeries:
    """f(g(x)); g must be pure lambda^0 with valuation >= 1 in the target chart."""
    if not g.is_pure_lambda0():
        raise IllFormedSubstitution("substitution target depends on lambda")
    vg = g.valuation()
    if vg is None or vg < 1:
        raise IllFormedSubstitution("substitution target must vanish at x=0")
    lam = f.trunc.lambda_order
    if f.is_zero():
        zwin = tuple(_sat(vg * w) for w in f.zwin)
        return BiSeries(_summary_trunc(zwin, lam, {}), g.chart, None, zwin)

    jmin, jmax = f.valuation(), f.max_exponent()
    gl = _with_lambda_order(g, lam)
    powers: dict[int, BiSeries] = {
        0: BiSeries.constant(Truncation(1, lam, 0), g.chart, 1)}
    acc = gl
    for k in range(1, max(jmax, 0) + 1):
        powers[k] = acc
        if k < jmax:
            acc = mul(acc, gl)
    if jmin < 0:
        gi = invert(gl)
        acc = gi
        for k in range(1, -jmin + 1):
            powers[-k] = acc
            if k < -jmin:
                acc = mul(acc, gi)

    out: dict[tuple[int, int], mpq] = {}
    zwin = []
    for i in range(lam):
        w = _sat(vg * f.zwin[i])
        for (k, j) in f.coeffs:
            if k == i:
                w = min(w, powers[j].zwin[0])
        zwin.append(w)
    for (i, j), c in f.coeffs.items():
        for (_, j2), c2 in powers[j].coeffs.items():
            if j2 >= zwin[i]:
                continue
            key = (i, j2)
            s = out.get(key, mpq(0)) + c * c2
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
    return BiSeries(_summary_trunc(zwin, lam, out), g.chart, out, tuple(zwin))


def _with_lambda_order(g: BiSeries, lam: int) -> BiSeries:
    """Extend a pure-lambda^0 series to lambda-order lam (higher orders exact)."""
    t = Truncation(g.trunc.z_order, lam, g.trunc.pole_cap)
    return BiSeries(t, g.chart, g.coeffs, (g.zwin[0],) + (CAP,) * (lam - 1))


def revert(g: BiSeries) -> BiSeries:
    """Compositional inverse W with W(g(x)) = x, by Newton iteration."""
    if not g.is_pure_lambda0():
        raise NotSimpleZero("reversion needs a pure-lambda^0 series")
    if g.valuation() != 1:
        raise NotSimpleZero("reversion needs valuation exactly 1")
    c = g.coeff(0, 1)
    n = min(g.trunc.z_order, g.zwin[0])
    if n < 1:
        raise PrecisionExhausted("nothing known about the series to revert")
    t = Truncation(n, g.trunc.lambda_order, 0)
    x = BiSeries.monomial(t, g.chart, 1, 0, 1)
    w = x * (mpq(1) / c)
    gp = differentiate(g)
    for _ in range(max(1, math.ceil(math.log2(n)) + 2)):
        err = _clip_n(substitute(g, w) - x, n)
        if err.is_zero():
            break
        w = _clip_n(w - mul(err, invert(substitute(gp, w))), n)
    zwin = (n,) + (CAP,) * (t.lambda_order - 1)
    return BiSeries(t, g.chart, w.coeffs, zwin)


def split_even_odd(f: BiSeries) -> tuple[BiSeries, BiSeries]:
    """f(x) = even(x^2) + x*odd(x^2) on the cover chart; outputs in w = x^2."""
    if f.chart != CHART_COVER:
        raise ChartMismatch("split_even_odd expects a cover-chart series")
    lam = f.trunc.lambda_order
    zwe = tuple(_sat((w + 1) // 2) for w in f.zwin)
    zwo = tuple(_sat(w // 2) for w in f.zwin)
    even: dict[tuple[int, int], mpq] = {}
    odd: dict[tuple[int, int], mpq] = {}
    for (i, j), c in f.coeffs.items():
        if j % 2 == 0:
            even[(i, j // 2)] = c
        else:
            odd[(i, (j - 1) // 2)] = c
    return (BiSeries(_summary_trunc(zwe, lam, even), CHART_BASE, even, zwe),
            BiSeries(_summary_trunc(zwo, lam, odd), CHART_BASE, odd, zwo))


def residue_at_zero(f: BiSeries, strict: bool = True) -> tuple[mpq, ...]:
    """The x^-1 coefficient at each lambda-order, as a lambda-polynomial.

    With strict=True, orders whose window does not reach the residue slot
    raise rather than silently reporting 0.
    """
    out = []
    for i in range(f.trunc.lambda_order):
        if f.zwin[i] < 0:
            if strict:
                raise PrecisionExhausted(
                    f"window at lambda-order {i} does not reach x^-1")
            out.append(mpq(0))
        else:
            out.append(f.coeff(i, -1))
    return tuple(out)
