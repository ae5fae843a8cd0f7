"""Gauge transform identities: cocycle, trace-dlog, commutant decomposition."""

import random

import pytest
from gmpy2 import mpq

from lambdaconn import gauge as G
from lambdaconn import series as S
from lambdaconn import spectral as SP
from lambdaconn.errors import CurveMismatch, NotInCommutant, NotInvertible, NotRegular
from lambdaconn.gauge import GaugeMatrix, Mat2, MatrixConnection, ScalarGauge
from lambdaconn.series import BiSeries, Truncation

T63 = Truncation(6, 3, 0)
Z = S.CHART_BASE


def mk(coeffs, trunc=T63, chart=Z):
    return BiSeries(trunc, chart, coeffs)


def mat(entries, trunc=T63, chart=Z):
    return Mat2(*(mk(e, trunc, chart) for e in entries))


def same(a, b):
    for key in set(a.coeffs) | set(b.coeffs):
        if a.knows(*key) and b.knows(*key):
            assert a.coeff(*key) == b.coeff(*key), (key, a, b)


def mats_same(A, B):
    for x, y in zip(A.entries(), B.entries()):
        same(x, y)


def random_mat(rng, trunc=T63, taylor=True, chart=Z):
    def entry():
        coeffs = {}
        lo = 0 if taylor else -trunc.pole_cap
        for i in range(trunc.lambda_order):
            for j in range(lo, trunc.z_order):
                if rng.random() < 0.35:
                    coeffs[(i, j)] = mpq(rng.randint(-3, 3), rng.choice([1, 2]))
        return BiSeries(trunc, chart, coeffs)

    return Mat2(entry(), entry(), entry(), entry())


def random_gauge(rng, trunc=T63):
    # unit determinant at lambda^0 guaranteed by unipotent + diagonal shape
    R = random_mat(rng, trunc)
    one = BiSeries.constant(trunc, Z, 1)
    lead = rng.choice([1, -1, 2])
    return GaugeMatrix(Mat2(R.a * one.lambda_shift(1) + lead, R.b,
                            R.c * one.lambda_shift(1),
                            R.d * one.lambda_shift(1) + 1))


def test_gauge_identity():
    rng = random.Random(3)
    A = MatrixConnection(random_mat(rng))
    out = G.gauge_matrix(A, GaugeMatrix(Mat2.identity(T63, Z)))
    mats_same(out.A, A.A)


def test_gauge_diagonal_example():
    # A = diag(alpha, beta), R = diag(1, z): off-diagonal stays 0,
    # second entry picks up lambda/z
    t = Truncation(6, 3, 1)
    alpha = mk({(0, 1): 2}, t)
    beta = mk({(0, 0): 1}, t)
    zero = BiSeries.zero(t, Z)
    A = MatrixConnection(Mat2(alpha, zero, zero, beta))
    R = GaugeMatrix(Mat2(BiSeries.constant(t, Z, 1), zero, zero, mk({(0, 1): 1}, t)))
    out = G.gauge_matrix(A, R)
    same(out.A.a, alpha)
    assert out.A.b.is_zero() and out.A.c.is_zero()
    same(out.A.d, beta + mk({(1, -1): 1}, t))


def test_gauge_inverse_composition():
    rng = random.Random(5)
    for _ in range(20):
        A = MatrixConnection(random_mat(rng))
        R = random_gauge(rng)
        out = G.gauge_matrix(G.gauge_matrix(A, R), GaugeMatrix(R.R.inverse()))
        mats_same(out.A, A.A)


def test_gauge_cocycle():
    rng = random.Random(7)
    for _ in range(30):
        A = MatrixConnection(random_mat(rng))
        R = random_gauge(rng)
        Q = random_gauge(rng)
        lhs = G.gauge_matrix(G.gauge_matrix(A, R), Q)
        rhs = G.gauge_matrix(A, GaugeMatrix(R.R @ Q.R))
        mats_same(lhs.A, rhs.A)


def test_trace_dlog_identity():
    # tr(gauge(A,R)) = tr(A) + lambda * dlog det R
    rng = random.Random(9)
    for _ in range(30):
        A = MatrixConnection(random_mat(rng))
        R = random_gauge(rng)
        lhs = G.gauge_matrix(A, R).A.trace()
        det = R.R.det()
        rhs = A.A.trace() + (S.differentiate(det) * S.invert(det)).lambda_shift(1)
        same(lhs, rhs)


def test_gauge_scalar():
    t = Truncation(6, 3, 1)
    a = mk({(0, 2): 1}, t)
    same(G.gauge_scalar(a, ScalarGauge(BiSeries.constant(t, Z, 1))), a)
    out = G.gauge_scalar(a, ScalarGauge(mk({(0, 1): 1}, t)))
    same(out, a + mk({(1, -1): 1}, t))
    e = S.exp_series(mk({(0, 1): 1}, t))
    out = G.gauge_scalar(BiSeries.zero(t, Z), ScalarGauge(e))
    same(out, mk({(1, 0): 1}, t))


def test_gauge_scalar_rejects_non_unit():
    with pytest.raises(NotInvertible):
        ScalarGauge(mk({(1, 0): 1}))


def test_spectral_invariants():
    z = mk({(0, 1): 1})
    one = BiSeries.constant(T63, Z, 1)
    zero = BiSeries.zero(T63, Z)
    A = Mat2(zero, z, one, zero)
    curve = SP.SpectralCurve(zero, -z)
    tr, det = G.spectral_invariants(MatrixConnection(A, curve))
    assert tr.is_zero()
    same(det, -z)
    bad = SP.SpectralCurve(zero, -(z * z))
    with pytest.raises(CurveMismatch):
        G.spectral_invariants(MatrixConnection(A, bad))


def test_matrix_residue():
    t = Truncation(6, 3, 1)
    A = Mat2(mk({(0, -1): 1}, t), BiSeries.zero(t, Z),
             BiSeries.zero(t, Z), BiSeries.zero(t, Z))
    r = G.matrix_residue(MatrixConnection(A))
    assert r[0][0] == (1, 0, 0)
    assert r[0][1] == (0, 0, 0)


def test_commutant_decompose():
    z = mk({(0, 1): 1})
    one = BiSeries.constant(T63, Z, 1)
    zero = BiSeries.zero(T63, Z)
    A0 = Mat2(zero, z, one, zero)
    f, g = G.commutant_decompose(A0, A0)
    assert f.is_zero() and g.coeffs == {(0, 0): mpq(1)}
    f, g = G.commutant_decompose(Mat2.identity(T63, Z), A0)
    assert f.coeffs == {(0, 0): mpq(1)} and g.is_zero()
    # B = z^-1 A0 needs Laurent coefficients
    zinv = mk({(0, -1): 1}, Truncation(6, 3, 1))
    B = A0.scale(zinv)
    f, g = G.commutant_decompose(B, A0)
    assert f.is_zero()
    same(g, zinv)


def test_commutant_decompose_errors():
    z = mk({(0, 1): 1})
    one = BiSeries.constant(T63, Z, 1)
    zero = BiSeries.zero(T63, Z)
    A0 = Mat2(zero, z, one, zero)
    with pytest.raises(NotRegular):
        G.commutant_decompose(Mat2.identity(T63, Z), Mat2.identity(T63, Z).scale(z))
    B = Mat2(zero, z, zero, zero)
    with pytest.raises(NotInCommutant):
        G.commutant_decompose(B, A0)


def test_solve_linear():
    one = BiSeries.constant(T63, Z, 1)
    z = mk({(0, 1): 1})
    zero = BiSeries.zero(T63, Z)
    # x + z y = 1+z ; z x + y = ... consistent system with known solution x=1, y=1
    sol = G.solve_linear([[one, z], [z, one]], [one + z, one + z], T63, Z)
    assert sol is not None
    same(sol[0], one)
    same(sol[1], one)
    # inconsistent: x + y = 1, x + y = 0
    sol = G.solve_linear([[one, one], [one, one]], [one, zero], T63, Z)
    assert sol is None
    # underdetermined: free variable pinned to zero
    sol = G.solve_linear([[one, one]], [z], T63, Z)
    same(sol[0] + sol[1], z)
    assert sol[1].is_zero()
