"""Shared helpers: build exact rational matrices from sympy expressions."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from sympy.polys.matrices import DomainMatrix

from dbmat.ratmat import GaussianRational, Poly, RatMat, RatScalar

zs = sp.Symbol("z")


def _gr(c):
    re, im = sp.nsimplify(sp.re(c)), sp.nsimplify(sp.im(c))
    return GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def sym_poly(e):
    """Exact Poly from a sympy polynomial expression in z."""
    e = sp.expand(e)
    if e == 0:
        return Poly([])
    return Poly([_gr(c) for c in reversed(sp.Poly(e, zs).all_coeffs())])


def rat(expr):
    """Exact RatScalar from a string or sympy expression in z (I = imaginary unit)."""
    e = sp.sympify(expr, locals={"z": zs}) if isinstance(expr, str) else sp.sympify(expr)
    num, den = sp.fraction(sp.cancel(sp.together(e)))
    return RatScalar(sym_poly(num), sym_poly(den))


def M(rows):
    """Exact RatMat from a nested list of expressions."""
    return RatMat.from_entries([[rat(e) for e in row] for row in rows])


def to_sympy(A):
    """sympy Matrix of a RatMat (exact coefficients)."""
    def p(q):
        return sum((sp.Rational(c.re.numerator, c.re.denominator)
                    + sp.I * sp.Rational(c.im.numerator, c.im.denominator)) * zs ** k
                   for k, c in enumerate(q.coeffs))
    d = p(A.den)
    return sp.Matrix([[sp.cancel(p(x) / d) for x in row] for row in A.num])


def close(a, b, tol=1e-9):
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    return float(np.abs(a - b).max(initial=0)) <= tol * max(1.0, float(np.abs(b).max(initial=0)))


_KZ = sp.QQ_I[zs]


def _domain_mat(A):
    """(numerator DomainMatrix over QQ_I[z], denominator) of a RatMat."""
    def p(q):
        return _KZ.from_sympy(sum((sp.Rational(c.re.numerator, c.re.denominator)
                                   + sp.I * sp.Rational(c.im.numerator, c.im.denominator))
                                  * zs ** k for k, c in enumerate(q.coeffs)))
    rows = [[p(x) for x in row] for row in A.num]
    return DomainMatrix(rows, (A.rows, A.cols), _KZ), p(A.den)


def brute_membership(pair, f):
    """Hardy pole/degree oracle for de Branges space membership.

    f/E+ strictly proper with no poles in the closed upper half plane and
    f/E- strictly proper with no poles in the closed lower half plane,
    computed from sympy adjugates and gcds over Q(i)[z]."""
    F, fd = _domain_mat(f)

    def ok(E, bad):
        En, _ = _domain_mat(E)
        den0 = En.det() * fd
        for (num,) in (En.adjugate() * F).to_list():
            if not num:
                continue
            g = _KZ.gcd(num, den0)
            num, den = _KZ.exquo(num, g), _KZ.exquo(den0, g)
            if num.degree() >= den.degree():
                return False
            if den.degree() > 0:
                roots = sp.Poly(_KZ.to_sympy(den), zs).nroots(n=30)
                if any(bad(complex(r).imag) for r in roots):
                    return False
        return True
    return (ok(pair.E_plus, lambda y: y >= -1e-12)
            and ok(pair.E_minus, lambda y: y <= 1e-12))


# criterion number -> (title, passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))


@pytest.fixture
def running():
    """The running example: pair (z - i, z + i), S = 1, A = [[z, 1], [-1, 0]]."""
    from dbmat.debranges import DeBrangesPair
    pair = DeBrangesPair(M([["z - I"]]), M([["z + I"]]))
    return {"pair": pair, "S": RatMat.eye(1), "A": M([["z", 1], [-1, 0]]),
            "Phi": M([["I/(z + I)"]])}
