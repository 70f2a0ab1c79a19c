"""JSON instance, certificate and report formats.

Rationals are written as ``"numerator/denominator"`` strings and exact
roots as ``{"radicand": "n/d", "num": a, "den": b}`` so that files reload
bit-exactly. Over F_p coordinates are plain integers.

Instance file::

    {
      "field": "F5" | "Q",
      "d": 3,
      "seed": 0,                                   # optional
      "lines": [{"base": [..], "direction": [..], "multiplicity": 1}, ...],
      "families": [[line, ...], ...],              # d families, optional
      "points": [{"point": [..], "weight": "1/1"}, ...],
      "directions": [{"direction": [..], "weight": "30/1"}, ...],
      "duality": {"d": 2, "X": [..], "mu": {..}, "Y": [[..], ..], "w": [{..}, ..],
                  "kernel": [{"x": .., "tuple": [..], "value": ..}, ..],
                  "M": {..}, "q": "1/1", "symmetric": false}
    }

Every section is optional; commands check for the ones they need.
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
import hashlib
import json
import sys

from .duality import DiscreteInstance
from .errors import InputError
from .factorisation import FactorCertificate, MultiCertificate
from .fields import PrimeField, field_descriptor, parse_field, parse_rational
from .geometry import Line, canonical_line
from .heavy import DirectionWeights
from .joints import LineFamily, MultiFamily
from .radical import Radical


def frac(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _coord(field, c):
    return c if isinstance(field, PrimeField) else frac(c)


def encode_point(field, p):
    return [_coord(field, c) for c in p]


def encode_line(line: Line):
    return {"base": encode_point(line.field, line.base),
            "direction": encode_point(line.field, line.direction)}


def _rational(value, where):
    try:
        return parse_rational(value)
    except InputError as exc:
        raise InputError(str(exc), location=where) from None


def _point(field, d, raw, where):
    if not isinstance(raw, list):
        raise InputError("expected a coordinate list", location=where)
    if len(raw) != d:
        raise InputError(f"dimension mismatch: {len(raw)} coordinates, expected {d}", location=where)
    try:
        return tuple(field(c) for c in raw)
    except InputError as exc:
        raise InputError(str(exc), location=where) from None


def _line(field, d, raw, where):
    if not isinstance(raw, dict):
        raise InputError("expected an object with base and direction", location=where)
    base = _point(field, d, raw.get("base"), f"{where}.base")
    direction = _point(field, d, raw.get("direction"), f"{where}.direction")
    try:
        return canonical_line(base, direction, field)
    except InputError as exc:
        raise InputError(str(exc), location=f"{where}.direction") from None


def _family(field, d, raw, where):
    fam = LineFamily(field, d)
    for i, item in enumerate(raw):
        m = item.get("multiplicity", 1) if isinstance(item, dict) else 1
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise InputError(f"multiplicity must be a positive integer, got {m!r}",
                             location=f"{where}[{i}].multiplicity")
        fam.add(_line(field, d, item, f"{where}[{i}]"), m)
    return fam


@dataclass
class InstanceFile:
    field: object
    d: int
    lines: LineFamily = None
    families: MultiFamily = None
    points: dict = None  # point -> Fraction
    directions: DirectionWeights = None
    duality: DiscreteInstance = None
    seed: int = None
    meta: dict = dc_field(default_factory=dict)

    def need(self, *sections):
        for s in sections:
            if getattr(self, s) is None:
                raise InputError(f"instance has no {s!r} section")


def _duality(raw, where):
    if not isinstance(raw, dict):
        raise InputError("expected an object", location=where)
    try:
        d = raw["d"]
        symmetric = bool(raw.get("symmetric", False))
        X = list(raw["X"])
        Y = raw["Y"]
        w = raw["w"]
        mu = raw.get("mu") or {x: 1 for x in X}
        kernel = {}
        for i, item in enumerate(raw["kernel"]):
            key = (item["x"], tuple(item["tuple"]))
            if key in kernel:
                raise InputError("duplicate kernel entry", location=f"{where}.kernel[{i}]")
            kernel[key] = _rational(item["value"], f"{where}.kernel[{i}].value")
    except (KeyError, TypeError) as exc:
        raise InputError(f"missing or malformed field {exc}", location=where) from None
    mu = {x: _rational(v, f"{where}.mu.{x}") for x, v in mu.items()}
    if symmetric and Y and not isinstance(Y[0], list):
        w = {y: _rational(v, f"{where}.w.{y}") for y, v in w.items()}
    else:
        w = [{y: _rational(v, f"{where}.w[{j}].{y}") for y, v in wj.items()} for j, wj in enumerate(w)]
    M = raw.get("M")
    if M is not None:
        M = {x: _rational(v, f"{where}.M.{x}") for x, v in M.items()}
    q = _rational(raw.get("q", 1), f"{where}.q")
    return DiscreteInstance(d, X, mu, Y, w, kernel, M, q, symmetric=symmetric)


def parse_instance(obj) -> InstanceFile:
    """Validated instance from decoded JSON."""
    if not isinstance(obj, dict):
        raise InputError("instance must be a JSON object")
    field = parse_field(obj.get("field", "Q"))
    d = obj.get("d")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise InputError(f"d must be a positive integer, got {d!r}", location="d")
    inst = InstanceFile(field, d, seed=obj.get("seed"), meta=dict(obj.get("meta", {})))
    if "lines" in obj:
        inst.lines = _family(field, d, obj["lines"], "lines")
    if "families" in obj:
        fams = [_family(field, d, raw, f"families[{j}]") for j, raw in enumerate(obj["families"])]
        inst.families = MultiFamily(fams)
    if "points" in obj:
        pts = {}
        for i, item in enumerate(obj["points"]):
            p = _point(field, d, item.get("point"), f"points[{i}].point")
            v = _rational(item.get("weight", 1), f"points[{i}].weight")
            if v < 0:
                raise InputError(f"negative weight {v}", location=f"points[{i}].weight")
            pts[p] = pts.get(p, Fraction(0)) + v
        inst.points = dict(sorted(pts.items()))
    if "directions" in obj:
        w = {}
        for i, item in enumerate(obj["directions"]):
            line = _line(field, d, {"base": [0] * d, "direction": item.get("direction")},
                         f"directions[{i}]")
            wt = _rational(item.get("weight", 1), f"directions[{i}].weight")
            if wt < 0:
                raise InputError(f"negative weight {wt}", location=f"directions[{i}].weight")
            w[line] = w.get(line, Fraction(0)) + wt
        inst.directions = DirectionWeights(field, d, w)
    if "duality" in obj:
        inst.duality = _duality(obj["duality"], "duality")
    return inst


def loads_json(text, source="<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", location=f"{source}:{exc.lineno}:{exc.colno}") from None


def read_text(path):
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_instance(path) -> InstanceFile:
    return parse_instance(loads_json(read_text(path), path or "<stdin>"))


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# ------------------------------------------------------------------ dumping


def _family_json(fam: LineFamily):
    return [dict(encode_line(l), multiplicity=fam.counts[l]) for l in fam.distinct()]


def dump_instance(inst: InstanceFile) -> dict:
    field = inst.field
    out = {"field": field_descriptor(field), "d": inst.d}
    if inst.seed is not None:
        out["seed"] = inst.seed
    if inst.meta:
        out["meta"] = inst.meta
    if inst.lines is not None:
        out["lines"] = _family_json(inst.lines)
    if inst.families is not None:
        out["families"] = [_family_json(f) for f in inst.families]
    if inst.points is not None:
        out["points"] = [{"point": encode_point(field, p), "weight": frac(v)}
                         for p, v in sorted(inst.points.items())]
    if inst.directions is not None:
        out["directions"] = [{"direction": encode_point(field, l.direction),
                              "weight": frac(inst.directions[l])}
                             for l in inst.directions.lines()]
    if inst.duality is not None:
        out["duality"] = dump_duality(inst.duality)
    return out


def dump_duality(inst: DiscreteInstance) -> dict:
    kernel = [{"x": x, "tuple": list(ys), "value": frac(v)}
              for x in inst.X for ys, v in inst.kernel[x].items()]
    out = {"d": inst.d, "X": list(inst.X), "mu": {x: frac(v) for x, v in inst.mu.items()},
           "M": {x: frac(v) for x, v in inst.M.items()}, "q": frac(inst.q),
           "symmetric": inst.symmetric, "kernel": kernel}
    if inst.symmetric:
        out["Y"] = list(inst.Y[0])
        out["w"] = {y: frac(v) for y, v in inst.w[0].items()}
    else:
        out["Y"] = [list(Yj) for Yj in inst.Y]
        out["w"] = [{y: frac(v) for y, v in wj.items()} for wj in inst.w]
    return out


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def _default(o):
    if isinstance(o, Fraction):
        return frac(o)
    if isinstance(o, Radical):
        return o.to_json()
    if isinstance(o, Line):
        return encode_line(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


# ------------------------------------------------------------- certificates


def certificate_to_json(cert: FactorCertificate) -> dict:
    field = cert.field
    index = {l: i for i, l in enumerate(cert.lines)}
    return {
        "kind": "joints-certificate",
        "field": field_descriptor(field),
        "d": cert.d,
        "mode": cert.mode,
        "bound": frac(cert.bound),
        "norm_power": frac(cert.norm_power),
        "norm": cert.norm.to_json(),
        "constant": cert.constant.to_json(),
        "M": [{"point": encode_point(field, p), "weight": frac(v)} for p, v in cert.M.items()],
        "lines": [encode_line(l) for l in cert.lines],
        "table": [{"point": encode_point(field, x), "line": index[l], "value": frac(v)}
                  for (x, l), v in sorted(cert.table.items(), key=lambda kv: (kv[0][0], kv[0][1]))],
    }


def certificate_from_json(obj) -> FactorCertificate:
    if not isinstance(obj, dict) or obj.get("kind") != "joints-certificate":
        raise InputError("not a joints certificate")
    field = parse_field(obj["field"])
    d = obj["d"]
    lines = [_line(field, d, raw, f"lines[{i}]") for i, raw in enumerate(obj["lines"])]
    M = {}
    for i, item in enumerate(obj["M"]):
        M[_point(field, d, item["point"], f"M[{i}].point")] = _rational(item["weight"], f"M[{i}].weight")
    table = {}
    for i, item in enumerate(obj["table"]):
        x = _point(field, d, item["point"], f"table[{i}].point")
        k = item["line"]
        if not isinstance(k, int) or not 0 <= k < len(lines):
            raise InputError(f"line index {k!r} out of range", location=f"table[{i}].line")
        table[(x, lines[k])] = _rational(item["value"], f"table[{i}].value")
    return FactorCertificate(field, d, M, lines, table, _rational(obj["bound"], "bound"),
                             _rational(obj["norm_power"], "norm_power"), obj.get("mode", "all-lines"))


def multi_certificate_to_json(cert: MultiCertificate) -> dict:
    return {
        "kind": "multijoints-certificate",
        "base": certificate_to_json(cert.base),
        "families": [_family_json(f) for f in cert.families],
    }


def multi_certificate_from_json(obj) -> MultiCertificate:
    base = certificate_from_json(obj["base"])
    fams = [_family(base.field, base.d, raw, f"families[{j}]") for j, raw in enumerate(obj["families"])]
    tables = []
    for fam in fams:
        tables.append({(x, l): v for (x, l), v in base.table.items() if l in fam})
    return MultiCertificate(base, fams, tables)


def load_certificate(path):
    obj = loads_json(read_text(path), path)
    kind = obj.get("kind") if isinstance(obj, dict) else None
    try:
        if kind == "multijoints-certificate":
            return multi_certificate_from_json(obj)
        return certificate_from_json(obj)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed certificate: missing {exc}") from None


__all__ = [
    "InstanceFile", "parse_instance", "load_instance", "dump_instance", "dump_duality",
    "certificate_to_json", "certificate_from_json", "multi_certificate_to_json",
    "multi_certificate_from_json", "load_certificate", "dumps", "digest", "frac",
]
