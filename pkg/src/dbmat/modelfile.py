"""
Model files: a JSON document holding named rational-matrix objects.

Layout::

    {"version": "dbmat-model/1", "mode": "exact" | "float",
     "objects": {name: {"type": ..., ...}}}

Object types are ``rational_matrix`` (field ``entries``), ``pair``
(``E_minus``, ``E_plus``), ``db_matrix`` (``n``, ``matrix``),
``herglotz_params`` (``P``, ``Q``, ``density``, ``point_masses``) and
``k0_operator`` (``T``, ``U``).  A matrix is a list of rows of entries
``{"num": [...], "den": [...]}`` with ascending coefficients.  Scalars are
a real number, an exact rational string ``"p/q"`` or a pair ``[re, im]``.
Exact mode keeps every scalar a string; float mode uses JSON numbers.
Serialization sorts keys, so ``serialize(parse(text)) == text`` for any
text produced by :func:`serialize`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ratmat import GaussianRational, Poly, RatMat, RatScalar, as_gr

__all__ = ["ModelError", "ModelFile", "parse", "parse_text", "serialize",
           "dumps", "encode_value", "encode_scalar", "decode_matrix", "VERSION"]

VERSION = "dbmat-model/1"
TYPES = {
    "rational_matrix": {"entries"},
    "pair": {"E_minus", "E_plus"},
    "db_matrix": {"n", "matrix"},
    "herglotz_params": {"P", "Q", "density", "point_masses"},
    "k0_operator": {"T", "U"},
}
_OPTIONAL = {"herglotz_params": {"point_masses"}, "k0_operator": {"U"}}


class ModelError(ValueError):
    """Syntax or semantic error with a location."""

    def __init__(self, message, path="", line=None, col=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}" + (f", column {col}" if col is not None else ""))
        if path:
            loc.append(f"at {path}")
        super().__init__(message + (" (" + "; ".join(loc) + ")" if loc else ""))
        self.path, self.line, self.col = path, line, col


@dataclass
class ModelFile:
    mode: str = "exact"
    objects: dict = field(default_factory=dict)
    version: str = VERSION

    def __getitem__(self, name):
        try:
            return self.objects[name]
        except KeyError:
            raise KeyError(f"unknown object {name!r}; have {sorted(self.objects)}") from None


# ----------
# Scalars
# ----------

_RAT = re.compile(r"^\s*[-+]?\d+(\s*/\s*\d+)?\s*$")


def _dec_real(x, exact, path):
    if isinstance(x, bool):
        raise ModelError("boolean is not a number", path)
    if isinstance(x, str):
        if not _RAT.match(x):
            raise ModelError(f"bad rational string {x!r}", path)
        try:
            q = Fraction(x.replace(" ", ""))
        except ZeroDivisionError:
            raise ModelError("zero denominator in rational", path) from None
        return q if exact else float(q)
    if isinstance(x, int):
        return Fraction(x) if exact else float(x)
    if isinstance(x, float):
        if exact:
            raise ModelError("float literal in exact mode; use a 'p/q' string", path)
        return x
    raise ModelError(f"expected a number, got {type(x).__name__}", path)


def decode_scalar(x, exact, path=""):
    if isinstance(x, list):
        if len(x) != 2:
            raise ModelError("complex scalar must be [re, im]", path)
        re_, im_ = _dec_real(x[0], exact, path), _dec_real(x[1], exact, path)
        return GaussianRational(re_, im_) if exact else complex(re_, im_)
    v = _dec_real(x, exact, path)
    return GaussianRational(v) if exact else complex(v)


def _frac_str(q):
    return str(Fraction(int(q.numerator), int(q.denominator)))


def _float(x):
    return float(x) + 0.0


def encode_scalar(c, exact=None):
    if isinstance(c, GaussianRational) or (exact and not isinstance(c, (complex, float))):
        g = as_gr(c)
        return _frac_str(g.re) if not g.im else [_frac_str(g.re), _frac_str(g.im)]
    c = complex(c)
    return _float(c.real) if c.imag == 0 else [_float(c.real), _float(c.imag)]


# ----------
# Polynomials and matrices
# ----------

def _enc_poly(p):
    return [encode_scalar(c, p.exact) for c in p.coeffs] if not p.is_zero() else []


def encode_value(x):
    if isinstance(x, Poly):
        return _enc_poly(x)
    if isinstance(x, RatScalar):
        return {"num": _enc_poly(x.num), "den": _enc_poly(x.den)}
    if isinstance(x, RatMat):
        return [[{"num": _enc_poly(e.num), "den": _enc_poly(e.den)} for e in row]
                for row in x.entries()]
    if isinstance(x, np.ndarray):
        return [[encode_scalar(v) for v in row] for row in np.atleast_2d(x)]
    raise TypeError(f"cannot encode {type(x).__name__}")


def _dec_poly(v, exact, path):
    if not isinstance(v, list):
        raise ModelError("polynomial must be a coefficient list", path)
    cs = [decode_scalar(c, exact, f"{path}[{k}]") for k, c in enumerate(v)]
    return Poly(cs, exact=exact)


def decode_matrix(v, exact, path=""):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) and r for r in v):
        raise ModelError("matrix must be a nonempty list of nonempty rows", path)
    if len({len(r) for r in v}) != 1:
        raise ModelError("matrix rows differ in length", path)
    grid = []
    for i, row in enumerate(v):
        out = []
        for j, e in enumerate(row):
            p = f"{path}[{i}][{j}]"
            if isinstance(e, dict):
                extra = set(e) - {"num", "den"}
                if extra:
                    raise ModelError(f"unknown field {sorted(extra)[0]!r}", p)
                if "num" not in e:
                    raise ModelError("entry lacks 'num'", p)
                num = _dec_poly(e["num"], exact, p + ".num")
                den = _dec_poly(e.get("den", [1]), exact, p + ".den")
                if den.is_zero():
                    raise ModelError("zero denominator", p + ".den")
                out.append(RatScalar(num, den))
            else:
                out.append(RatScalar(Poly([decode_scalar(e, exact, p)], exact=exact)))
        grid.append(out)
    M = RatMat.from_entries(grid)
    return M if exact else M.to_float()


def _dec_array(v, exact, path):
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ModelError("expected a list of rows", path)
    if len({len(r) for r in v}) != 1:
        raise ModelError("rows differ in length", path)
    return [[decode_scalar(x, exact, f"{path}[{i}][{j}]") for j, x in enumerate(r)]
            for i, r in enumerate(v)]


# ----------
# Objects
# ----------

def _decode_object(name, obj, exact):
    from .debranges import DeBrangesPair, K0Operator
    from .herglotz import HerglotzParams
    path = f"objects.{name}"
    if not isinstance(obj, dict) or "type" not in obj:
        raise ModelError("object must be a map with a 'type'", path)
    kind = obj["type"]
    if kind not in TYPES:
        raise ModelError(f"unknown object type {kind!r}", path + ".type")
    fields = set(obj) - {"type"}
    extra = fields - TYPES[kind]
    if extra:
        raise ModelError(f"unknown field {sorted(extra)[0]!r}", path)
    missing = TYPES[kind] - fields - _OPTIONAL.get(kind, set())
    if missing:
        raise ModelError(f"missing field {sorted(missing)[0]!r}", path)
    if kind == "rational_matrix":
        return decode_matrix(obj["entries"], exact, path + ".entries")
    if kind == "pair":
        return DeBrangesPair(decode_matrix(obj["E_minus"], exact, path + ".E_minus"),
                             decode_matrix(obj["E_plus"], exact, path + ".E_plus"),
                             validate=False)
    if kind == "db_matrix":
        n = obj["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ModelError("n must be a positive integer", path + ".n")
        A = decode_matrix(obj["matrix"], exact, path + ".matrix")
        if A.shape != (2 * n, 2 * n):
            raise ModelError(f"matrix must be {2 * n}x{2 * n}", path + ".matrix")
        return ("db_matrix", n, A)
    if kind == "herglotz_params":
        masses = []
        for k, m in enumerate(obj.get("point_masses", [])):
            p = f"{path}.point_masses[{k}]"
            if not isinstance(m, dict) or set(m) != {"x", "mass"}:
                raise ModelError("point mass must be {x, mass}", p)
            x = decode_scalar(m["x"], False, p + ".x")
            if x.imag:
                raise ModelError("point mass location must be real", p + ".x")
            masses.append((x.real, np.array(_dec_array(m["mass"], False, p + ".mass"),
                                            dtype=complex)))
        return HerglotzParams(decode_matrix(obj["P"], exact, path + ".P"),
                              decode_matrix(obj["Q"], exact, path + ".Q"),
                              decode_matrix(obj["density"], exact, path + ".density"),
                              masses)
    T = _dec_array(obj["T"], exact, path + ".T")
    U = _dec_array(obj["U"], exact, path + ".U") if "U" in obj else None
    return K0Operator.from_data(T, U)


def _encode_object(x):
    from .debranges import DeBrangesPair, K0Operator, DBMatrix
    from .herglotz import HerglotzParams
    if isinstance(x, RatMat):
        return {"type": "rational_matrix", "entries": encode_value(x)}
    if isinstance(x, DeBrangesPair):
        return {"type": "pair", "E_minus": encode_value(x.E_minus),
                "E_plus": encode_value(x.E_plus)}
    if isinstance(x, DBMatrix):
        return {"type": "db_matrix", "n": x.n, "matrix": encode_value(x.A)}
    if isinstance(x, tuple) and len(x) == 3 and x[0] == "db_matrix":
        return {"type": "db_matrix", "n": x[1], "matrix": encode_value(x[2])}
    if isinstance(x, HerglotzParams):
        return {"type": "herglotz_params", "P": encode_value(x.P), "Q": encode_value(x.Q),
                "density": encode_value(x.density),
                "point_masses": [{"x": encode_scalar(float(x0)),
                                  "mass": encode_value(np.asarray(s, complex))}
                                 for x0, s in x.point_masses]}
    if isinstance(x, K0Operator):
        d = {"type": "k0_operator", "T": _enc_array(x.T_exact or x.T)}
        if x.U is not None:
            d["U"] = _enc_array(x.U_exact or x.U)
        return d
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _enc_array(a):
    if isinstance(a, np.ndarray):
        return [[encode_scalar(v) for v in row] for row in a]
    return [[encode_scalar(v, True) for v in row] for row in a]


def _line_of(text, name):
    k = text.find(json.dumps(name) + ":")
    if k < 0:
        return None
    return text.count("\n", 0, k) + 1


def parse_text(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelError(f"syntax error: {err.msg}", line=err.lineno, col=err.colno) from None
    if not isinstance(doc, dict):
        raise ModelError("top level must be a map", line=1, col=1)
    extra = set(doc) - {"version", "mode", "objects"}
    if extra:
        k = sorted(extra)[0]
        raise ModelError(f"unknown field {k!r}", k, line=_line_of(text, k))
    if doc.get("version", VERSION) != VERSION:
        raise ModelError(f"unsupported version {doc.get('version')!r}", "version",
                         line=_line_of(text, "version"))
    mode = doc.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise ModelError(f"mode must be exact or float, got {mode!r}", "mode",
                         line=_line_of(text, "mode"))
    objs = doc.get("objects", {})
    if not isinstance(objs, dict):
        raise ModelError("objects must be a map", "objects", line=_line_of(text, "objects"))
    out = {}
    for name in objs:
        try:
            out[name] = _decode_object(name, objs[name], mode == "exact")
        except ModelError as err:
            if err.line is None:
                raise ModelError(str(err), line=_line_of(text, name)) from None
            raise
    return ModelFile(mode, out)


def parse(path):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read())


def dumps(objects, mode=None):
    if isinstance(objects, ModelFile):
        mode = mode or objects.mode
        objects = objects.objects
    if mode is None:
        mode = "exact" if all(getattr(_first_mat(o), "exact", True) for o in objects.values()) \
            else "float"
    doc = {"version": VERSION, "mode": mode,
           "objects": {k: _encode_object(v) for k, v in objects.items()}}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _first_mat(o):
    if isinstance(o, RatMat):
        return o
    for attr in ("A", "E_plus", "P"):
        if hasattr(o, attr):
            return getattr(o, attr)
    if isinstance(o, tuple) and len(o) == 3:
        return o[2]
    return None


def serialize(objects, path, mode=None):
    text = dumps(objects, mode)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
