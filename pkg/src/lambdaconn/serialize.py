"""JSON wire format with string-encoded exact rationals.

Coefficient keys are "i,j" (lambda-exponent, x-exponent); rationals are
canonical "p/q" strings with q > 0 and gcd(p,q) = 1. Output is sorted and
therefore byte-deterministic.
"""

import json

from gmpy2 import mpq

from . import series as S
from .errors import ValidationError
from .gauge import Mat2, MatrixConnection
from .series import BiSeries, Truncation
from .spectral import SpectralCurve

VERSION = "1"

CHARTS = (S.CHART_BASE, S.CHART_COVER)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _rat(value) -> str:
    return str(mpq(value))


def _parse_rat(text, where):
    try:
        return mpq(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise ValidationError(f"{where}: bad rational {text!r}")


def canonical(f: BiSeries) -> BiSeries:
    """The same series restricted to its declared window, default bookkeeping.

    Computed values can hold coefficients past the summary z-order at
    lambda-orders with a wider honest window; the wire format has a single
    window, so those are dropped here.
    """
    return BiSeries(f.trunc, f.chart, f.coeffs)


def biseries_to_obj(f: BiSeries) -> dict:
    f = canonical(f)
    return {
        "chart": f.chart,
        "zOrder": f.trunc.z_order,
        "lambdaOrder": f.trunc.lambda_order,
        "poleCap": f.trunc.pole_cap,
        "coeffs": {f"{i},{j}": _rat(c) for (i, j), c in sorted(f.coeffs.items())},
    }


def biseries_from_obj(obj, where="series") -> BiSeries:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    chart = obj.get("chart")
    if chart not in CHARTS:
        raise ValidationError(f"{where}.chart: expected one of {CHARTS}")
    try:
        trunc = Truncation(int(obj["zOrder"]), int(obj["lambdaOrder"]),
                           int(obj["poleCap"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"{where}: bad truncation fields ({e})")
    if trunc.z_order < 1 or trunc.lambda_order < 1 or trunc.pole_cap < 0:
        raise ValidationError(f"{where}: truncation out of range")
    coeffs = {}
    raw = obj.get("coeffs", {})
    if not isinstance(raw, dict):
        raise ValidationError(f"{where}.coeffs: expected an object")
    for key, val in raw.items():
        try:
            i, j = (int(part) for part in key.split(","))
        except ValueError:
            raise ValidationError(f"{where}.coeffs: bad key {key!r}")
        if not (0 <= i < trunc.lambda_order and
                -trunc.pole_cap <= j < trunc.z_order):
            raise ValidationError(
                f"{where}.coeffs[{key}]: exponent outside the window")
        coeffs[(i, j)] = _parse_rat(val, f"{where}.coeffs[{key}]")
    return BiSeries(trunc, chart, coeffs)


def curve_to_obj(curve: SpectralCurve) -> dict:
    return {"t": biseries_to_obj(curve.t), "d": biseries_to_obj(curve.d)}


def curve_from_obj(obj, where="curve") -> SpectralCurve:
    if not isinstance(obj, dict) or "t" not in obj or "d" not in obj:
        raise ValidationError(f"{where}: expected an object with t and d")
    return SpectralCurve(biseries_from_obj(obj["t"], f"{where}.t"),
                         biseries_from_obj(obj["d"], f"{where}.d"))


def matrix_to_obj(A: Mat2) -> list:
    return [[biseries_to_obj(A.a), biseries_to_obj(A.b)],
            [biseries_to_obj(A.c), biseries_to_obj(A.d)]]


def matrix_from_obj(obj, where="A") -> Mat2:
    if (not isinstance(obj, list) or len(obj) != 2
            or any(not isinstance(row, list) or len(row) != 2 for row in obj)):
        raise ValidationError(f"{where}: expected a 2x2 array")
    return Mat2(biseries_from_obj(obj[0][0], f"{where}[0][0]"),
                biseries_from_obj(obj[0][1], f"{where}[0][1]"),
                biseries_from_obj(obj[1][0], f"{where}[1][0]"),
                biseries_from_obj(obj[1][1], f"{where}[1][1]"))


def connection_to_obj(conn: MatrixConnection) -> dict:
    out = {"A": matrix_to_obj(conn.A), "chart": conn.A.a.chart}
    if conn.curve is not None:
        out["curve"] = curve_to_obj(conn.curve)
    return out


def connection_from_obj(obj, where="matrix-connection") -> MatrixConnection:
    if not isinstance(obj, dict) or "A" not in obj:
        raise ValidationError(f"{where}: expected an object with A")
    A = matrix_from_obj(obj["A"], f"{where}.A")
    curve = None
    if "curve" in obj:
        curve = curve_from_obj(obj["curve"], f"{where}.curve")
    return MatrixConnection(A, curve)


def scalar_to_obj(sc) -> dict:
    return {"curve": curve_to_obj(sc.curve), "a": biseries_to_obj(sc.a),
            "normalized": bool(sc.normalized)}


def scalar_from_obj(obj, where="scalar-connection"):
    from .abelianize import ScalarConnection
    if not isinstance(obj, dict) or "a" not in obj or "curve" not in obj:
        raise ValidationError(f"{where}: expected an object with a and curve")
    a = biseries_from_obj(obj["a"], f"{where}.a")
    curve = curve_from_obj(obj["curve"], f"{where}.curve")
    return ScalarConnection(a, curve, normalized=bool(obj.get("normalized")))


def instance_to_obj(payload) -> dict:
    from .abelianize import ScalarConnection
    if isinstance(payload, MatrixConnection):
        kind = "matrix-connection"
        body = connection_to_obj(payload)
    elif isinstance(payload, ScalarConnection):
        kind = "scalar-connection"
        body = scalar_to_obj(payload)
    else:
        raise ValidationError(f"cannot serialize {type(payload).__name__}")
    trunc = (payload.A.common_trunc() if kind == "matrix-connection"
             else payload.a.trunc)
    return {
        "version": VERSION,
        "truncation": {"zOrder": trunc.z_order,
                       "lambdaOrder": trunc.lambda_order,
                       "poleCap": trunc.pole_cap},
        "kind": kind,
        kind: body,
    }


def instance_from_obj(obj):
    if not isinstance(obj, dict):
        raise ValidationError("instance: expected a JSON object")
    if obj.get("version") != VERSION:
        raise ValidationError(
            f"instance.version: expected {VERSION!r}, got {obj.get('version')!r}")
    kind = obj.get("kind")
    if kind == "matrix-connection":
        return connection_from_obj(obj.get(kind), kind)
    if kind == "scalar-connection":
        return scalar_from_obj(obj.get(kind), kind)
    raise ValidationError(f"instance.kind: unknown kind {kind!r}")


def loads(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"instance: invalid JSON at line {e.lineno}, "
                              f"column {e.colno}: {e.msg}")
    return instance_from_obj(obj)
