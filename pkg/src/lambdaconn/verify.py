"""Property suites behind the `verify` subcommand.

Every suite is deterministic in (seed, count, truncation); a failed check
carries the serialized offending instance so it can be replayed through the
CLI. Instances are independent, so suite order never matters; the report is
sorted by check name.
"""

import random
from dataclasses import dataclass, field

from gmpy2 import mpq

from . import abelianize as AB
from . import gauge as G
from . import generate as GEN
from . import serialize as SER
from . import series as S
from . import spectral as SP
from . import wasow as W
from .errors import EngineError
from .gauge import GaugeMatrix, Mat2, MatrixConnection
from .series import BiSeries, Truncation

SUITES = ("series-oracle", "gauge-cocycle", "wasow", "residue",
          "abelianize-roundtrip", "lattice-uniqueness")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: dict | None = None

    def to_obj(self):
        out = {"name": self.name, "passed": self.passed, "detail": self.detail}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_obj(self):
        return {"passed": self.passed,
                "checks": [c.to_obj() for c in sorted(self.checks,
                                                      key=lambda c: c.name)]}

    def render(self) -> str:
        lines = []
        for c in sorted(self.checks, key=lambda c: c.name):
            status = "PASS" if c.passed else "FAIL"
            tail = f"  ({c.detail})" if c.detail else ""
            lines.append(f"{status}  {c.name}{tail}")
        lines.append("all checks passed" if self.passed
                     else "FAILURES present")
        return "\n".join(lines)


def _random_series(rng, trunc, chart=S.CHART_BASE, unit=False):
    coeffs = {}
    for i in range(trunc.lambda_order):
        lo = -min(trunc.pole_cap, 1) if unit else -trunc.pole_cap
        for j in range(lo, trunc.z_order):
            if rng.random() < 0.4:
                coeffs[(i, j)] = mpq(rng.randint(-4, 4), rng.choice([1, 2, 4]))
    if unit:
        coeffs[(0, 0)] = mpq(rng.choice([1, -1, 2]))
        for j in range(-trunc.pole_cap, 0):
            coeffs.pop((0, j), None)
    return BiSeries(trunc, chart, coeffs)


def _naive_mul(a, b):
    out = {}
    for (ia, ja), ca in a.coeffs.items():
        for (ib, jb), cb in b.coeffs.items():
            k = (ia + ib, ja + jb)
            out[k] = out.get(k, mpq(0)) + ca * cb
    return out


def _same_within(got, want_coeffs, window_of):
    for key in set(got.coeffs) | set(want_coeffs):
        if window_of.knows(*key):
            if got.coeff(*key) != want_coeffs.get(key, mpq(0)):
                return key
    return None


def _pair_payload(a, b):
    return {"a": SER.biseries_to_obj(a), "b": SER.biseries_to_obj(b)}


def suite_series_oracle(seed, count, trunc):
    rng = random.Random(seed)
    for n in range(count):
        a = _random_series(rng, trunc)
        b = _random_series(rng, trunc)
        p = a * b
        bad = _same_within(p, _naive_mul(a, b), p)
        if bad is not None:
            return CheckResult("series-oracle", False,
                               f"mul mismatch at {bad}, instance {n}",
                               _pair_payload(a, b))
        u = _random_series(rng, trunc, unit=True)
        prod = u * S.invert(u)
        one = {(0, 0): mpq(1)}
        bad = _same_within(prod, one, prod)
        if bad is not None:
            return CheckResult("series-oracle", False,
                               f"invert defect at {bad}, instance {n}",
                               {"u": SER.biseries_to_obj(u)})
        h = BiSeries(trunc, S.CHART_BASE,
                     {k: c for k, c in a.coeffs.items() if k[1] >= 1 or k[0] >= 1})
        e = S.exp_series(h)
        back = S.log_series(e)
        bad = _same_within(back, h.coeffs, back)
        if bad is not None:
            return CheckResult("series-oracle", False,
                               f"exp/log defect at {bad}, instance {n}",
                               {"h": SER.biseries_to_obj(h)})
    return CheckResult("series-oracle", True, f"{count} instances")


def suite_gauge_cocycle(seed, count, trunc):
    rng = random.Random(seed)
    base = Truncation(trunc.z_order, trunc.lambda_order, 0)

    def rand_mat():
        return Mat2(*(_random_series(rng, base) for _ in range(4)))

    def rand_gauge():
        R = rand_mat()
        lead = rng.choice([1, -1, 2])
        one = BiSeries.constant(base, S.CHART_BASE, 1)
        return GaugeMatrix(Mat2(R.a * one.lambda_shift(1) + lead, R.b,
                                R.c * one.lambda_shift(1),
                                R.d * one.lambda_shift(1) + 1))

    for n in range(count):
        A = MatrixConnection(rand_mat())
        R, Q = rand_gauge(), rand_gauge()
        lhs = G.gauge_matrix(G.gauge_matrix(A, R), Q).A
        rhs = G.gauge_matrix(A, GaugeMatrix(R.R @ Q.R)).A
        for x, y in zip(lhs.entries(), rhs.entries()):
            bad = _same_within(x, y.coeffs, x)
            if bad is not None:
                return CheckResult("gauge-cocycle", False,
                                   f"cocycle defect at {bad}, instance {n}",
                                   SER.connection_to_obj(A))
        tr = G.gauge_matrix(A, R).A.trace()
        det = R.R.det()
        want = A.A.trace() + (S.differentiate(det) * S.invert(det)).lambda_shift(1)
        bad = _same_within(tr, want.coeffs, tr)
        if bad is not None:
            return CheckResult("gauge-cocycle", False,
                               f"trace-dlog defect at {bad}, instance {n}",
                               SER.connection_to_obj(A))
    return CheckResult("gauge-cocycle", True, f"{count} instances")


def suite_wasow(seed, count, trunc):
    for n in range(count):
        conn = GEN.generate("unramified-matrix", seed + n, trunc)
        try:
            res = W.diagonalize(conn)
        except EngineError as e:
            return CheckResult("wasow", False, f"diagonalize raised {e!r}",
                               SER.instance_to_obj(conn))
        if not (res.D.A.b.is_zero() and res.D.A.c.is_zero()):
            return CheckResult("wasow", False, "off-diagonal defect survives",
                               SER.instance_to_obj(conn))
        if not res.R.R.is_integral():
            return CheckResult("wasow", False, "R not integral",
                               SER.instance_to_obj(conn))
        if not all(e.is_integral() for e in res.R.R.inverse().entries()):
            return CheckResult("wasow", False, "R inverse not integral",
                               SER.instance_to_obj(conn))
    return CheckResult("wasow", True, f"{count} instances")


def suite_residue(seed, count, trunc):
    for n in range(count):
        conn = GEN.generate("ramified-matrix", seed + n, trunc)
        try:
            sc, _ = AB.forward_abelianize(conn)
        except EngineError as e:
            return CheckResult("residue", False,
                               f"forward_abelianize raised {e!r}",
                               SER.instance_to_obj(conn))
        res = sc.residues()
        want = (mpq(0), mpq(-1, 2)) + (mpq(0),) * (len(res) - 2)
        if tuple(res) != want[:len(res)]:
            return CheckResult("residue", False, f"residues {res}",
                               SER.instance_to_obj(conn))
        pair = S.residue_at_zero(sc.a + SP.sigma_conjugate_connection(sc.a))
        want = (mpq(0), mpq(-1)) + (mpq(0),) * (len(pair) - 2)
        if tuple(pair) != want[:len(pair)]:
            return CheckResult("residue", False, f"sigma-pair trace {pair}",
                               SER.instance_to_obj(conn))
    return CheckResult("residue", True, f"{count} instances")


def suite_roundtrip(seed, count, trunc):
    cover = Truncation(2 * trunc.z_order, trunc.lambda_order,
                       max(trunc.pole_cap, 1))
    for n in range(count):
        sc = GEN.generate("ramified-scalar", seed + n, cover)
        try:
            report = AB.roundtrip_check(sc)
        except EngineError as e:
            return CheckResult("abelianize-roundtrip", False,
                               f"roundtrip raised {e!r}",
                               SER.instance_to_obj(sc))
        if not report["equivalent"]:
            return CheckResult("abelianize-roundtrip", False,
                               "not gauge equivalent",
                               SER.instance_to_obj(sc))
    return CheckResult("abelianize-roundtrip", True, f"{count} instances")


def suite_lattice_uniqueness(seed, count, trunc):
    cover = Truncation(2 * trunc.z_order, 2, max(trunc.pole_cap, 1))
    for n in range(count):
        sc = GEN.generate("ramified-scalar", seed + n, cover)
        push = AB.pushforward_scalar(sc)
        try:
            res = AB.find_integral_lattice(push)
        except EngineError as e:
            return CheckResult("lattice-uniqueness", False,
                               f"lattice search raised {e!r}",
                               SER.instance_to_obj(sc))
        tr0 = res.Phi.R.common_trunc()
        pt = Truncation(tr0.z_order, tr0.lambda_order, 2)
        zero = BiSeries.zero(pt, S.CHART_BASE)
        for e in (1, 2):
            for slot in range(4):
                entries = [zero] * 4
                entries[slot] = BiSeries(pt, S.CHART_BASE, {(0, -e): 1})
                pert = Mat2(*entries)
                if not AB.perturbation_breaks_lattice(res, pert):
                    return CheckResult(
                        "lattice-uniqueness", False,
                        f"second lattice from z^-{e} slot {slot}",
                        SER.instance_to_obj(sc))
    return CheckResult("lattice-uniqueness", True,
                       f"{count} instances x 8 perturbations")


_RUNNERS = {
    "series-oracle": suite_series_oracle,
    "gauge-cocycle": suite_gauge_cocycle,
    "wasow": suite_wasow,
    "residue": suite_residue,
    "abelianize-roundtrip": suite_roundtrip,
    "lattice-uniqueness": suite_lattice_uniqueness,
}


def verify_properties(suites=None, seed=1, count=25,
                      trunc=Truncation(8, 4, 2)) -> VerifyReport:
    report = VerifyReport()
    for name in (suites or SUITES):
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {name!r}")
        report.checks.append(_RUNNERS[name](seed, count, trunc))
    return report
