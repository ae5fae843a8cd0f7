"""The disc-level correspondence between rank-2 and scalar lambda-connections.

Forward: pull a matrix connection back to the double cover, diagonalize it
there (the eigenvalue difference is zh times a unit, so the split always
exists), twist the residue of the lambda^1 term into [-1/2, 1/2), and gauge
away all deeper poles.  The result is a scalar connection with lambda^0 part
the canonical form and residue sequence (0, -1/2, 0, ...).

Backward: push a scalar connection forward along the cover using the basis
{1, zh}, producing a Laurent matrix over the base, then recover the unique
integral lattice order-by-order in lambda.  The lattice solve splits each
correction into an image-of-ad(A0) part (kills the current order's poles)
and a commutant part f + g A0 (arranges the next order's trace conditions);
the division (n + 1/2) D1 that drives the commutant solve is exactly where
the residue normalization -lambda/2 earns its keep.
"""

from gmpy2 import mpq

from . import series as S
from . import spectral as SP
from . import wasow as W
from .errors import (
    ConditionViolated,
    NoLattice,
    NonNormalizable,
    NotSmoothRamified,
)
from .gauge import (
    GaugeMatrix,
    Mat2,
    MatrixConnection,
    ScalarGauge,
    gauge_matrix,
    gauge_scalar,
    solve_linear,
    spectral_invariants,
)
from .series import BiSeries, Truncation


class ScalarConnection:
    """a(zh, lambda) against dzh on the cover of a smooth ramified curve."""

    __slots__ = ("a", "curve", "chart", "normalized")

    def __init__(self, a: BiSeries, curve: SP.SpectralCurve, chart=None,
                 normalized=False):
        if a.chart != S.CHART_COVER:
            raise NonNormalizable("chart", "scalar connection lives on the cover")
        self.a = a
        self.curve = curve
        self.chart = chart if chart is not None else SP.build_cover_chart(curve)
        self.normalized = normalized

    def residues(self):
        return S.residue_at_zero(self.a)


class PushforwardResult:
    __slots__ = ("Au", "higgsL0")

    def __init__(self, Au: MatrixConnection, higgsL0: Mat2):
        self.Au = Au
        self.higgsL0 = higgsL0


class LatticeResult:
    __slots__ = ("Phi", "Aintegral")

    def __init__(self, Phi: GaugeMatrix, Aintegral: MatrixConnection):
        self.Phi = Phi
        self.Aintegral = Aintegral


def _descend(f: BiSeries, disc: BiSeries):
    """Write a cover series as even + zh * odd with both parts over the base.

    The even variable w = zh^2 equals the discriminant as a function of z,
    so descending is split followed by substitution of w = t^2 - 4d.
    """
    even_w, odd_w = S.split_even_odd(f)
    return S.substitute(even_w, disc), S.substitute(odd_w, disc)


def pushforward_scalar(sc: ScalarConnection) -> PushforwardResult:
    ch = sc.chart
    disc = sc.curve.discriminant()
    dzh_dz = S.invert(ch.jacobian)
    zh = BiSeries.monomial(sc.a.trunc, S.CHART_COVER, 1, 0, 1)
    lam = BiSeries.constant(sc.a.trunc, S.CHART_COVER, 1).lambda_shift(1)
    # nabla(1) = a dzh, nabla(zh) = (lambda + a zh) dzh, both against dz
    col1 = sc.a * dzh_dz
    col2 = (lam + sc.a * zh) * dzh_dz
    e1, o1 = _descend(col1, disc)
    e2, o2 = _descend(col2, disc)
    Au = MatrixConnection(Mat2(e1, e2, o1, o2), sc.curve)
    higgs = Au.A.lambda_slice(0)
    return PushforwardResult(Au, higgs)


def _ell2(X: Mat2, C: Mat2) -> BiSeries:
    """tr(X C) for the fixed pairing matrix C = 2 A0 - t I."""
    return (X.a * C.a + X.b * C.c) + (X.c * C.b + X.d * C.d)


def _solve_ad(A0: Mat2, Y: Mat2):
    """Solve [A0, X] = Y; None when Y is outside the image within the window."""
    p, q, r, s_ = A0.entries()
    t = Y.common_trunc()
    chart = Y.chart
    zero = BiSeries.zero(t, chart)
    rows = [
        [zero, -r, q, zero],
        [-q, p - s_, zero, q],
        [r, zero, s_ - p, -r],
        [zero, r, -q, zero],
    ]
    rhs = [Y.a, Y.b, Y.c, Y.d]
    sol = solve_linear(rows, rhs, t, chart)
    if sol is None:
        return None
    return Mat2(*sol)


def _commutant_corrector(tau2: BiSeries, tau1: BiSeries, curve: SP.SpectralCurve):
    """Polar (f, g) with g' D + g D'/2 = -tau2 and 2f' + (g t)' = -tau1 mod Taylor.

    D = t^2 - 4d has a simple zero, so the triangular solve divides by
    (n + 1/2) D1, which never vanishes; tau residues must be absent for f.
    """
    disc = curve.discriminant()
    D1 = disc.coeff(0, 1)
    trunc = tau2.trunc
    depth = -tau2.valuation() if not tau2.is_zero() else 0
    g_coeffs = {}
    for n in range(-depth, 0):
        acc = -tau2.coeff(0, n)
        for m in range(2, n + 1 + depth + 1):
            k = n + 1 - m
            if k in g_coeffs:
                acc -= (mpq(k) + mpq(m, 2)) * g_coeffs[k] * disc.coeff(0, m)
        g_coeffs[n] = acc / ((mpq(n) + mpq(1, 2)) * D1)
    # g is a finite polar Laurent polynomial: exact by construction
    g = BiSeries(Truncation(trunc.z_order, trunc.lambda_order,
                            max(trunc.pole_cap, depth)),
                 S.CHART_BASE, {(0, n): c for n, c in g_coeffs.items()},
                 (S.CAP,) * trunc.lambda_order)
    gt_prime = S.differentiate(g * curve.t)
    f_prime = -(tau1 + gt_prime.polar_part()) * mpq(1, 2)
    f_prime = f_prime.polar_part()
    if f_prime.coeff(0, -1) != 0:
        raise NoLattice("residue obstruction in the trace condition")
    f = S.antidifferentiate(f_prime)
    return f, g


def find_integral_lattice(push: PushforwardResult) -> LatticeResult:
    Au = push.Au
    if Au.chart != S.CHART_BASE:
        raise NoLattice("lattice search runs over the base chart")
    A0 = Au.A.lambda_slice(0)
    if not A0.is_integral():
        raise NoLattice("lambda^0 part is not integral")
    spectral_invariants(MatrixConnection(A0, Au.curve))
    curve = Au.curve
    t_series = curve.t
    C = A0.scale(mpq(2)) - Mat2.identity(A0.common_trunc(), S.CHART_BASE).scale(t_series)

    current = Au
    lam_order = Au.A.common_trunc().lambda_order
    Phi = Mat2.identity(Au.A.common_trunc(), S.CHART_BASE)
    for j in range(1, lam_order):
        Dj = current.A.lambda_slice(j)
        polar = Dj.polar_part()
        if not polar.is_zero():
            ell1 = Dj.trace()
            ell2 = _ell2(Dj, C)
            if not ell1.polar_part().is_zero() or not ell2.polar_part().is_zero():
                raise NoLattice(
                    f"trace conditions fail at lambda-order {j}")
            # correct the commutant pairing by an integral traceless N2 so
            # that the target lands exactly in the image of ad A0
            tau = _ell2(polar, C) * mpq(1, 2)  # = tr(polar * A0), Taylor part
            N2 = _traceless_with_pairing(tau, C)
            Y = N2 - polar
            Sj = _solve_ad(A0, Y)
            if Sj is None:
                raise NoLattice(f"defect not in the image of ad A0 at order {j}")
            step = Mat2.identity(Sj.common_trunc(), S.CHART_BASE) + Sj.lambda_shift(j)
            current = gauge_matrix(current, GaugeMatrix(step))
            Phi = Phi @ step
            if not current.A.lambda_slice(j).is_integral():
                raise NoLattice(f"pole removal failed at lambda-order {j}")
        if j + 1 < lam_order:
            nxt = current.A.lambda_slice(j + 1)
            tau1 = nxt.trace().polar_part()
            tau2 = _ell2(nxt, C).polar_part()
            if tau1.is_zero() and tau2.is_zero():
                continue
            f, g = _commutant_corrector(tau2, tau1, curve)
            T = Mat2.identity(A0.common_trunc(), S.CHART_BASE).scale(f) + A0.scale(g)
            step = Mat2.identity(T.common_trunc(), S.CHART_BASE) + T.lambda_shift(j)
            current = gauge_matrix(current, GaugeMatrix(step))
            Phi = Phi @ step
    if not current.A.is_integral():
        raise NoLattice("result fails integrality within the window")
    return LatticeResult(GaugeMatrix(Phi), current)


def perturbation_breaks_lattice(lattice: LatticeResult, pert: Mat2) -> bool:
    """Whether post-composing the lattice gauge by I + lambda*pert loses
    integrality, so the perturbed gauge does not carry a second lattice.

    The check runs one lambda-order past the declared window. At the top
    declared order the derivative term of the extra factor is invisible and
    ad(A0) can send a polar pert to an integral matrix, so the verdict needs
    the next order; the polar content there does not involve the unknown top
    slice of Aintegral, which makes zero-padding it sound.
    """
    A = lattice.Aintegral.A
    t0 = A.common_trunc()
    lam = t0.lambda_order + 1
    t = Truncation(t0.z_order, lam, t0.pole_cap)

    def extend(e):
        te = Truncation(e.trunc.z_order, lam, e.trunc.pole_cap)
        zwin = e.zwin + (S.CAP,) * (lam - len(e.zwin))
        return BiSeries(te, e.chart, e.coeffs, zwin)

    Aext = Mat2(*(extend(e) for e in A.entries()))
    Q = Mat2(*(extend(e) for e in pert.entries()))
    R = Mat2.identity(t, S.CHART_BASE) + Q.lambda_shift(1)
    out = gauge_matrix(MatrixConnection(Aext), GaugeMatrix(R))
    return not out.A.is_integral()


def _traceless_with_pairing(tau: BiSeries, C: Mat2) -> Mat2:
    """Integral traceless N with tr(N C)/2... precisely tr(N * C/2) = tau.

    Some entry of C is a unit at z=0 (simple-zero condition), so one slot
    of N suffices.
    """
    trunc = tau.trunc
    zero = BiSeries.zero(trunc, S.CHART_BASE)
    if tau.is_zero():
        return Mat2(zero, zero, zero, zero)
    candidates = [
        ("c", C.b), ("b", C.c), ("a", C.a - C.d),
    ]
    best = None
    for slot, piv in candidates:
        if piv.is_zero():
            continue
        if best is None or piv.valuation() < best[1].valuation():
            best = (slot, piv)
    if best is None:
        raise NoLattice("pairing matrix degenerate within the window")
    slot, piv = best
    x = 2 * tau * S.invert(piv)
    if slot == "c":
        return Mat2(zero, zero, x, zero)
    if slot == "b":
        return Mat2(zero, x, zero, zero)
    return Mat2(x, zero, zero, -x)


def forward_abelianize(conn: MatrixConnection, curve: SP.SpectralCurve = None,
                       chart: SP.CoverChart = None):
    """Matrix connection over the base to a normalized scalar on the cover.

    Returns (ScalarConnection, witness GaugeMatrix on the cover) with
    gauge(pullback of conn, witness) = diag(raw scalar, second sheet).
    """
    if curve is None:
        curve = conn.curve
    if curve is None:
        raise NotSmoothRamified("forward abelianization needs a curve")
    if not conn.A.is_integral():
        raise ConditionViolated("input connection must be integral")
    spectral_invariants(MatrixConnection(conn.A.lambda_slice(0), curve))
    ch = chart if chart is not None else SP.build_cover_chart(curve)

    jac = ch.jacobian
    pulled = Mat2(*(S.substitute(e, ch.zOfZhat) * jac for e in conn.A.entries()))
    cover_conn = MatrixConnection(pulled)
    res = W.diagonalize(cover_conn)
    R = res.R.R
    D = res.D.A
    # fix the branch: the lambda^0 part of the first sheet must be mForm
    if not (D.a.lambda_slice(0) - ch.mForm).is_zero():
        swap = Mat2(BiSeries.zero(D.common_trunc(), S.CHART_COVER),
                    BiSeries.constant(D.common_trunc(), S.CHART_COVER, 1),
                    BiSeries.constant(D.common_trunc(), S.CHART_COVER, 1),
                    BiSeries.zero(D.common_trunc(), S.CHART_COVER))
        D = swap @ D @ swap
        R = R @ swap
    if not (D.a.lambda_slice(0) - ch.mForm).is_zero():
        raise ConditionViolated("no sheet matches the canonical form")
    a_raw = D.a

    k = 0
    if a_raw.trunc.lambda_order > 1:
        a1 = a_raw.lambda_slice(1)
        v1 = a1.valuation()
        if v1 is not None and v1 < -1:
            raise ConditionViolated(
                "lambda^1 part has a pole deeper than first order")
        rho = a1.coeff(0, -1)
        k = rho + mpq(1, 2)
        if k.denominator != 1:
            raise ConditionViolated(
                f"lambda^1 residue {rho} is not in -1/2 + Z")
        k = int(k)
    if k != 0:
        # lattice twist by zh^-k on the first sheet shifts the residue to -1/2
        twist = BiSeries.monomial(a_raw.trunc, S.CHART_COVER, 1, 1, -1) * (-k)
        a_raw = a_raw + twist
        tw_t = R.common_trunc()
        tw = Mat2(BiSeries.monomial(tw_t, S.CHART_COVER, 1, 0, -k),
                  BiSeries.zero(tw_t, S.CHART_COVER),
                  BiSeries.zero(tw_t, S.CHART_COVER),
                  BiSeries.constant(tw_t, S.CHART_COVER, 1))
        R = R @ tw
    sc, _ = normalize_scalar(a_raw, curve, ch)
    return sc, GaugeMatrix(R)


def normalize_scalar(a_raw: BiSeries, curve: SP.SpectralCurve,
                     chart: SP.CoverChart = None):
    """Gauge all poles beyond the residue normal form out of a raw scalar.

    Returns (normalized ScalarConnection, witness ScalarGauge r) with
    gauge_scalar(a_raw, r) the normalized series.
    """
    ch = chart if chart is not None else SP.build_cover_chart(curve)
    if not (a_raw.lambda_slice(0) - ch.mForm).is_zero():
        raise NonNormalizable("lambda0", "lambda^0 part is not the canonical form")
    lam_order = a_raw.trunc.lambda_order
    if lam_order > 1:
        a1 = a_raw.lambda_slice(1)
        v1 = a1.valuation()
        if v1 is not None and v1 < -1:
            raise NonNormalizable("lambda1-pole",
                                  "lambda^1 part has a pole deeper than first order")
        if a1.coeff(0, -1) != mpq(-1, 2):
            raise NonNormalizable("lambda1-residue",
                                  f"lambda^1 residue {a1.coeff(0, -1)} != -1/2")
    # orders decouple: lambda dlog exp(sum lambda^i rho_i) = sum lambda^(i+1) rho_i'
    u = BiSeries.zero(a_raw.trunc, S.CHART_COVER)
    for i in range(1, lam_order - 1):
        c = a_raw.lambda_slice(i + 1)
        pol = c.polar_part()
        if pol.is_zero():
            continue
        if pol.coeff(0, -1) != 0:
            raise NonNormalizable(
                "higher-residue",
                f"lambda^{i + 1} residue {pol.coeff(0, -1)} != 0")
        rho = S.antidifferentiate(-pol)
        u = u + rho.lambda_shift(i)
    if u.is_zero():
        r = BiSeries.constant(a_raw.trunc, S.CHART_COVER, 1)
        a_norm = a_raw
    else:
        r = S.exp_series(u)
        # lambda dlog exp(u) = lambda du/dzh exactly; applying the gauge
        # this way avoids the exp/invert products eating the z-window
        a_norm = a_raw + S.differentiate(u).lambda_shift(1)
    sc = ScalarConnection(a_norm, curve, ch, normalized=True)
    return sc, ScalarGauge(r)


def scalar_gauge_equivalent(a: ScalarConnection, b: ScalarConnection):
    """Decide a ~ b with witness r such that gauge_scalar(a, r) = b."""
    diff = b.a - a.a
    if not diff.lambda_slice(0).is_zero():
        return False, None
    res = S.residue_at_zero(diff)
    if any(c != 0 for c in res[1:]):
        return False, None
    # primitive per lambda-order; the witness is exp of the shifted primitive
    u = BiSeries.zero(diff.trunc, diff.chart)
    for i in range(1, diff.trunc.lambda_order):
        sl = diff.lambda_slice(i)
        if sl.is_zero():
            continue
        u = u + S.antidifferentiate(sl).lambda_shift(i - 1)
    u0 = u.lambda_slice(0)
    if not u0.is_zero() and u0.valuation() < 1:
        return False, None
    if u.is_zero():
        return True, ScalarGauge(BiSeries.constant(diff.trunc, diff.chart, 1))
    return True, ScalarGauge(S.exp_series(u))


def roundtrip_check(sc: ScalarConnection) -> dict:
    """Backward then forward; reports equivalence and all residue invariants."""
    push = pushforward_scalar(sc)
    lattice = find_integral_lattice(push)
    back, _ = forward_abelianize(lattice.Aintegral, sc.curve, sc.chart)
    equivalent, witness = scalar_gauge_equivalent(sc, back)
    report = {
        "equivalent": equivalent,
        "witness": witness,
        "input_residues": S.residue_at_zero(sc.a),
        "output_residues": S.residue_at_zero(back.a),
        "higgs_trace": push.higgsL0.trace(),
        "higgs_det": push.higgsL0.det(),
        "scalar": back,
        "lattice": lattice,
    }
    return report
