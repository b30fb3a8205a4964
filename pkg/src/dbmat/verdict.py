"""
Membership verdicts with structured witnesses.

A negative verdict always carries at least one witness: an offending
pole, a failing sample point, a minimum eigenvalue or the residual of a
rational identity.  Composite verdicts may instead point at a failing
child.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = ["Verdict", "jsonable"]


@dataclass
class Verdict:
    member: bool
    name: str = ""
    witnesses: dict = field(default_factory=dict)
    children: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.member = bool(self.member)
        if not self.member and not self.witnesses and not any(
                not c.member for c in self.children):
            raise ValueError(f"negative verdict {self.name!r} without witness")

    def __bool__(self):
        return self.member

    @classmethod
    def all_of(cls, name, children, **witnesses):
        children = list(children)
        return cls(all(c.member for c in children), name, witnesses, children)

    def failures(self):
        """Names of all failing leaves."""
        if self.member:
            return []
        bad = [f for c in self.children for f in c.failures()]
        return bad or [self.name]

    def to_dict(self):
        d = {"name": self.name, "member": self.member,
             "witnesses": jsonable(self.witnesses)}
        if self.flags:
            d["flags"] = list(self.flags)
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    def render(self, indent=0):
        pad = "  " * indent
        mark = "PASS" if self.member else "FAIL"
        line = f"{pad}[{mark}] {self.name}"
        if self.witnesses and not self.member:
            line += "  " + ", ".join(f"{k}={_short(v)}" for k, v in
                                     sorted(self.witnesses.items()))
        if self.flags:
            line += "  (" + ", ".join(self.flags) + ")"
        out = [line]
        out += [c.render(indent + 1) for c in self.children]
        return "\n".join(out)


def _short(v):
    v = jsonable(v)
    s = repr(v)
    return s if len(s) < 120 else s[:117] + "..."


def _num(x):
    x = complex(x)
    re = float(np.round(x.real, 12)) + 0.0
    im = float(np.round(x.imag, 12)) + 0.0
    return [re, im]


def _round_tree(v):
    if isinstance(v, float):
        return float(np.round(v, 12)) + 0.0
    if isinstance(v, list):
        return [_round_tree(u) for u in v]
    if isinstance(v, dict):
        return {k: _round_tree(u) for k, u in v.items()}
    return v


def jsonable(x):
    """Recursively convert to plain JSON types with deterministic rounding."""
    from .ratmat import GaussianRational, Poly, RatMat, RatScalar
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(np.round(float(x), 12)) + 0.0
    if isinstance(x, (complex, np.complexfloating)):
        return _num(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, GaussianRational):
        return [str(x.re), str(x.im)]
    if isinstance(x, Verdict):
        return x.to_dict()
    if isinstance(x, (RatMat, RatScalar, Poly)):
        from .modelfile import encode_value
        return _round_tree(encode_value(x))
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()] if x.ndim else jsonable(x.item())
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return str(Fraction(int(x.numerator), int(x.denominator)))
    return repr(x)
