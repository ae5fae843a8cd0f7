"""Acceptance runs: one timed criterion per test, exact rational assertions."""

import random
import time

from gmpy2 import mpq

from lambdaconn import abelianize as AB
from lambdaconn import gauge as G
from lambdaconn import generate as GEN
from lambdaconn import series as S
from lambdaconn import spectral as SP
from lambdaconn import wasow as W
from lambdaconn.gauge import Mat2, MatrixConnection
from lambdaconn.series import BiSeries, Truncation

Z = S.CHART_BASE


def _report(name, t0, budget):
    dt = time.perf_counter() - t0
    assert dt < budget, f"{name}: {dt:.2f}s over the {budget}s budget"
    print(f"{name}: PASS ({dt:.2f}s)")


def companion(n=12, lam=6):
    t = Truncation(n, lam, 0)
    z = BiSeries(t, Z, {(0, 1): 1})
    zero = BiSeries.zero(t, Z)
    one = BiSeries.constant(t, Z, 1)
    curve = SP.SpectralCurve(zero, -z)
    return MatrixConnection(Mat2(zero, z, one, zero), curve)


def test_criterion_1_companion_anchor():
    t0 = time.perf_counter()
    sc, _ = AB.forward_abelianize(companion(12, 6))
    assert sc.a.lambda_slice(0).coeffs == {(0, 2): mpq(1, 4)}
    assert sc.a.lambda_slice(1).coeffs == {(0, -1): mpq(-1, 2)}
    _report("criterion 1 (companion anchor)", t0, 1.0)


def test_criterion_2_residue_theorems():
    t0 = time.perf_counter()
    trunc = Truncation(12, 6, 0)
    for seed in range(1, 101):
        conn = GEN.generate("ramified-matrix", seed, trunc)
        sc, _ = AB.forward_abelianize(conn)
        res = sc.residues()
        assert res[0] == 0 and res[1] == mpq(-1, 2), (seed, res)
        assert all(r == 0 for r in res[2:]), (seed, res)
        pair = S.residue_at_zero(sc.a + SP.sigma_conjugate_connection(sc.a))
        assert pair[0] == 0 and pair[1] == -1, (seed, pair)
        assert all(r == 0 for r in pair[2:]), (seed, pair)
    _report("criterion 2 (residue theorems, 100 instances)", t0, 60.0)


def test_criterion_3_round_trip():
    t0 = time.perf_counter()
    trunc = Truncation(16, 4, 1)
    for seed in range(1, 101):
        sc = GEN.generate("ramified-scalar", seed, trunc)
        report = AB.roundtrip_check(sc)
        assert report["equivalent"], (seed, report["output_residues"])
        assert report["witness"] is not None
        regauged = G.gauge_scalar(sc.a, report["witness"])
        diff = regauged - report["scalar"].a
        assert diff.is_zero(), seed
    _report("criterion 3 (round trip, 100 instances)", t0, 120.0)


def test_criterion_4_lattice_uniqueness():
    t0 = time.perf_counter()
    rng = random.Random(1)
    for _ in range(25):
        sc = GEN.ramified_scalar(rng, Truncation(8, 2, 1))
        push = AB.pushforward_scalar(sc)
        res = AB.find_integral_lattice(push)
        tr0 = res.Phi.R.common_trunc()
        pt = Truncation(tr0.z_order, tr0.lambda_order, 2)
        zero = BiSeries.zero(pt, Z)
        for e in (1, 2):
            for slot in range(4):
                entries = [zero] * 4
                entries[slot] = BiSeries(pt, Z, {(0, -e): 1})
                assert AB.perturbation_breaks_lattice(res, Mat2(*entries)), \
                    (e, slot)
    _report("criterion 4 (lattice uniqueness, 25 x 8 probes)", t0, 10.0)


def test_criterion_5_wasow_suite():
    t0 = time.perf_counter()
    trunc = Truncation(8, 4, 0)
    for seed in range(1, 51):
        conn = GEN.generate("unramified-matrix", seed, trunc)
        res = W.diagonalize(conn)
        assert res.D.A.b.is_zero() and res.D.A.c.is_zero(), seed
        assert res.R.R.is_integral(), seed
        assert all(e.is_integral() for e in res.R.R.inverse().entries()), seed
    one = BiSeries.constant(trunc, Z, 1)
    zero = BiSeries.zero(trunc, Z)
    lam = one.lambda_shift(1)
    res = W.diagonalize(MatrixConnection(Mat2(one, lam, zero, -one)))
    assert res.D.A.a.coeffs == {(0, 0): mpq(1)}
    assert res.D.A.d.coeffs == {(0, 0): mpq(-1)}
    assert res.D.A.b.is_zero() and res.D.A.c.is_zero()
    _report("criterion 5 (unramified splitting, 50 instances)", t0, 10.0)


def test_criterion_6_series_kernel_oracle():
    t0 = time.perf_counter()
    rng = random.Random(2)
    trunc = Truncation(8, 4, 2)

    def rand(unit=False):
        coeffs = {}
        for i in range(trunc.lambda_order):
            lo = -1 if unit else -trunc.pole_cap
            for j in range(lo, trunc.z_order):
                if rng.random() < 0.4:
                    coeffs[(i, j)] = mpq(rng.randint(-4, 4),
                                         rng.choice([1, 2, 4]))
        if unit:
            coeffs[(0, 0)] = mpq(rng.choice([1, -1, 2]))
            for j in range(-trunc.pole_cap, 0):
                coeffs.pop((0, j), None)
        return BiSeries(trunc, Z, coeffs)

    def naive_mul(a, b):
        out = {}
        for (ia, ja), ca in a.coeffs.items():
            for (ib, jb), cb in b.coeffs.items():
                k = (ia + ib, ja + jb)
                out[k] = out.get(k, mpq(0)) + ca * cb
        return out

    def check(got, want):
        for key in set(got.coeffs) | set(want):
            if got.knows(*key):
                assert got.coeff(*key) == want.get(key, mpq(0)), key

    for n in range(1000):
        a, b = rand(), rand()
        check(a * b, naive_mul(a, b))
        u = rand(unit=True)
        check(u * S.invert(u), {(0, 0): mpq(1)})
        h = BiSeries(trunc, Z, {k: c for k, c in a.coeffs.items()
                                if k[1] >= 1 or k[0] >= 1})
        check(S.log_series(S.exp_series(h)), dict(h.coeffs))

    base = Truncation(6, 3, 0)

    def rand_gauge():
        R = Mat2(*(BiSeries(base, Z,
                            {(i, j): mpq(rng.randint(-3, 3))
                             for i in range(base.lambda_order)
                             for j in range(base.z_order)
                             if rng.random() < 0.35}) for _ in range(4)))
        one = BiSeries.constant(base, Z, 1)
        return G.GaugeMatrix(Mat2(R.a * one.lambda_shift(1) + rng.choice([1, -1, 2]),
                                  R.b, R.c * one.lambda_shift(1),
                                  R.d * one.lambda_shift(1) + 1))

    for n in range(200):
        A = MatrixConnection(Mat2(*(BiSeries(base, Z,
                                             {(i, j): mpq(rng.randint(-3, 3))
                                              for i in range(base.lambda_order)
                                              for j in range(base.z_order)
                                              if rng.random() < 0.35})
                                    for _ in range(4))))
        R, Q = rand_gauge(), rand_gauge()
        lhs = G.gauge_matrix(G.gauge_matrix(A, R), Q).A
        rhs = G.gauge_matrix(A, G.GaugeMatrix(R.R @ Q.R)).A
        for x, y in zip(lhs.entries(), rhs.entries()):
            check(x, dict(y.coeffs))
        tr = G.gauge_matrix(A, R).A.trace()
        det = R.R.det()
        want = A.A.trace() + (S.differentiate(det) * S.invert(det)).lambda_shift(1)
        check(tr, dict(want.coeffs))
    _report("criterion 6 (series oracle 1000 + gauge identities 200)", t0, 30.0)


def test_criterion_7_hitchin_degeneration():
    t0 = time.perf_counter()
    trunc = Truncation(12, 1, 0)
    for seed in range(1, 26):
        sc = GEN.generate("ramified-scalar", seed, trunc)
        push = AB.pushforward_scalar(sc)
        tr = push.higgsL0.trace()
        det = push.higgsL0.det()
        for got, want in ((tr, sc.curve.t), (det, sc.curve.d)):
            for key in set(got.coeffs) | set(want.coeffs):
                if got.knows(*key) and want.knows(*key):
                    assert got.coeff(*key) == want.coeff(*key), (seed, key)
    _report("criterion 7 (Hitchin shadow at lambda-order 1)", t0, 10.0)
