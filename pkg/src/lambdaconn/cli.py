"""Command-line front end: JSON instances in, JSON results out.

Exit codes: 0 success, 1 parse/validation error, 2 mathematical condition
failure (including a Degenerate classification), 3 precision or pole-cap
exhaustion.
"""

import argparse
import sys

from . import abelianize as AB
from . import generate as GEN
from . import serialize as SER
from . import spectral as SP
from . import verify as V
from . import wasow as W
from .errors import MathConditionError, PrecisionError, ValidationError
from .gauge import MatrixConnection
from .series import Truncation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_MATH = 2
EXIT_PRECISION = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the error-code contract reserves 2 for
    # mathematical failures, so remap to 1
    def error(self, message):
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}")


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise ValidationError(f"cannot write {path}: {e.strerror}")


def _load_matrix(text: str) -> MatrixConnection:
    inst = SER.loads(text)
    if not isinstance(inst, MatrixConnection):
        raise ValidationError("expected a matrix-connection instance")
    return inst


def _load_scalar(text: str) -> AB.ScalarConnection:
    inst = SER.loads(text)
    if not isinstance(inst, AB.ScalarConnection):
        raise ValidationError("expected a scalar-connection instance")
    return inst


def cmd_abelianize(args) -> int:
    conn = _load_matrix(_read(args.infile))
    sc, witness = AB.forward_abelianize(conn)
    out = SER.instance_to_obj(sc)
    out["witness"] = SER.matrix_to_obj(witness.R)
    _write(args.outfile, SER.dumps(out))
    return EXIT_OK


def cmd_deabelianize(args) -> int:
    sc = _load_scalar(_read(args.infile))
    push = AB.pushforward_scalar(sc)
    lattice = AB.find_integral_lattice(push)
    out = SER.instance_to_obj(lattice.Aintegral)
    out["matrix-connection"]["curve"] = SER.curve_to_obj(sc.curve)
    out["phi"] = SER.matrix_to_obj(lattice.Phi.R)
    _write(args.outfile, SER.dumps(out))
    return EXIT_OK


def cmd_wasow(args) -> int:
    conn = _load_matrix(_read(args.infile))
    a_plus, a_minus, R = W.split_unramified(conn)
    out = {
        "aPlus": SER.biseries_to_obj(a_plus),
        "aMinus": SER.biseries_to_obj(a_minus),
        "R": SER.matrix_to_obj(R.R),
    }
    _write(args.outfile, SER.dumps(out))
    return EXIT_OK


def cmd_classify(args) -> int:
    inst = SER.loads(_read(args.infile))
    if inst.curve is None:
        raise ValidationError("instance carries no curve to classify")
    kind = SP.classify_curve(inst.curve)
    _write(args.outfile, SER.dumps({"classification": kind}))
    return EXIT_MATH if kind == SP.DEGENERATE else EXIT_OK


def cmd_generate(args) -> int:
    trunc = Truncation(args.z_order, args.lambda_order, args.pole_cap)
    instances = [SER.instance_to_obj(GEN.generate(args.profile, seed, trunc))
                 for seed in range(args.seed, args.seed + args.count)]
    payload = instances[0] if args.count == 1 else instances
    _write(args.outfile, SER.dumps(payload))
    return EXIT_OK


def cmd_verify(args) -> int:
    trunc = Truncation(args.z_order, args.lambda_order, args.pole_cap)
    suites = args.suite if args.suite else None
    report = V.verify_properties(suites=suites, seed=args.seed,
                                 count=args.count, trunc=trunc)
    if args.json:
        _write(args.outfile, SER.dumps(report.to_obj()))
    else:
        _write(args.outfile, report.render() + "\n")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _add_io(p):
    p.add_argument("--in", dest="infile", default="-", metavar="FILE",
                   help="input file, - for stdin")
    p.add_argument("--out", dest="outfile", default="-", metavar="FILE",
                   help="output file, - for stdout")


def _add_trunc(p):
    p.add_argument("--z-order", type=int, default=8)
    p.add_argument("--lambda-order", type=int, default=4)
    p.add_argument("--pole-cap", type=int, default=2)


def build_parser() -> _Parser:
    parser = _Parser(prog="lambdaconn",
                     description="rank-2 lambda-connections on the formal "
                                 "disc and scalar connections on the "
                                 "spectral double cover")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("abelianize", cmd_abelianize),
                     ("deabelianize", cmd_deabelianize),
                     ("wasow", cmd_wasow),
                     ("classify", cmd_classify)):
        p = sub.add_parser(name)
        _add_io(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("generate")
    p.add_argument("--profile", choices=GEN.PROFILES, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=1)
    _add_trunc(p)
    p.add_argument("--out", dest="outfile", default="-", metavar="FILE")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("verify")
    p.add_argument("--suite", action="append", choices=V.SUITES,
                   help="repeatable; default runs every suite")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=25)
    p.add_argument("--json", action="store_true",
                   help="machine-readable report instead of the text table")
    _add_trunc(p)
    p.add_argument("--out", dest="outfile", default="-", metavar="FILE")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except PrecisionError as e:
        print(f"precision exhausted: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except MathConditionError as e:
        print(f"condition failure: {e}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
