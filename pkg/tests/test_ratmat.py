from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import M, close, rat, sym_poly, to_sympy, zs
from dbmat.classes import make_signature
from dbmat.ratmat import (GaussianRational, PoleEvaluationError, Poly, RatMat, RationalError,
                          SingularMatrixError, Z, poly_gcd, poly_roots)


def _roots(p):
    return sorted(((complex(r), m) for r, m in poly_roots(p)),
                  key=lambda t: (round(t[0].real, 6), round(t[0].imag, 6)))


class TestPolyRoots:
    def test_z2_plus_1(self):
        r = _roots(sym_poly(zs**2 + 1))
        assert [m for _, m in r] == [1, 1]
        assert close([x for x, _ in r], [-1j, 1j])

    def test_double_root(self):
        r = _roots(sym_poly((zs - 1) ** 2))
        assert len(r) == 1 and r[0][1] == 2 and close(r[0][0], 1)

    def test_cubic(self):
        r = _roots(sym_poly(zs**3 - zs))
        assert [m for _, m in r] == [1, 1, 1]
        assert close([x for x, _ in r], [-1, 0, 1])

    def test_zero_polynomial(self):
        with pytest.raises(RationalError, match="indeterminate"):
            poly_roots(Poly([]))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 2)),
                    min_size=1, max_size=4, unique_by=lambda t: t[:2]))
    def test_reconstruction_float(self, roots):
        p = Poly.from_array([1.0])
        for a, b, m in roots:
            p = p * Poly.from_array([-complex(a, b), 1.0]) ** m
        q = Poly.from_array([1.0])
        for r, m in poly_roots(p):
            q = q * Poly.from_array([-complex(r), 1.0]) ** m
        c1, c2 = p.float_coeffs(), q.float_coeffs()
        assert np.abs(c1 - c2).max() <= 1e-8 * np.abs(c1).max()


class TestArithmetic:
    def test_add_zero(self):
        assert RatMat.eye(2) + RatMat.zeros(2, 2) == RatMat.eye(2)

    def test_mul_diag(self):
        assert M([["z", 0], [0, 1]]) @ M([[1, 0], [0, "z"]]) == M([["z", 0], [0, "z"]])

    def test_scale(self):
        assert RatMat.eye(2) * rat("1/(z + I)") == M([["1/(z+I)", 0], [0, "1/(z+I)"]])

    def test_dimension_mismatch(self):
        with pytest.raises(RationalError):
            RatMat.eye(2) @ RatMat.eye(3)

    def test_reduced(self):
        s = rat("(z**2 - 1)/(z - 1)")
        assert s.den.degree == 0 and s.num == sym_poly(zs + 1)


class TestInverse:
    def test_diag(self):
        assert M([["z", 0], [0, 1]]).inverse() == M([["1/z", 0], [0, 1]])

    def test_unipotent(self):
        assert M([[1, "z"], [0, 1]]).inverse() == M([[1, "-z"], [0, 1]])

    def test_signature_M_unitary(self):
        # M = Ms / sqrt 2 with Ms exact: M^{-1} = M* becomes Ms^{-1} = Ms* / 2
        Ms = make_signature(1).M_scaled
        assert Ms.inverse() == Ms.sharp() * GaussianRational(Fraction(1, 2))
        assert Ms @ Ms.sharp() == RatMat.eye(2) * 2

    def test_singular_witness(self):
        A = M([["z", "z**2"], [1, "z"]])
        with pytest.raises(SingularMatrixError) as err:
            A.inverse()
        v = err.value.null_vector
        assert v is not None
        assert (A @ RatMat.from_entries([[x] for x in v])).is_zero()


class TestSharp:
    def test_linear(self):
        assert rat("z + I").sharp() == rat("z - I")

    def test_constant(self):
        C = RatMat.const([[GaussianRational(1, 2), 3], [GaussianRational(0, 1), 4]])
        assert C.sharp() == RatMat.const([[GaussianRational(1, -2), GaussianRational(0, -1)],
                                          [3, 4]])

    def test_ju_identity(self):
        A = M([["z", 1], [-1, 0]])
        J = make_signature(1).Jscr
        assert A.sharp() == J @ A.inverse() @ J


class TestEval:
    def test_values(self):
        assert close(M([["1/z", 0], [0, 1]]).eval(2), [[0.5, 0], [0, 1]])
        assert close(M([["z", 1], [-1, 0]]).eval(0), [[0, 1], [-1, 0]])

    def test_pole(self):
        with pytest.raises(PoleEvaluationError, match="pole"):
            M([["1/(z - 1)"]]).eval(1)


class TestDerivativeAndPoles:
    def test_derivative(self):
        assert rat("z + I").derivative() == rat("1")
        assert rat("1/z").derivative() == rat("-1/z**2")
        assert rat("z**2").derivative() == rat("2*z")

    def test_poles(self):
        p = M([["1/(z-1)", 0], [0, 1]]).poles()
        assert len(p) == 1 and close(p[0][0], 1) and p[0][1] == 1
        p = M([["1/(z-1)", 1], [0, "z-1"]]).poles()
        assert len(p) == 1 and close(p[0][0], 1) and p[0][1] == 1
        assert len(M([["z", 1], [1, "z**2"]]).poles()) == 0


# -- properties --

_coef = st.integers(-3, 3)


@st.composite
def ratmats(draw, n=2):
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            num = sum(draw(_coef) * zs**k for k in range(2)) + sp.I * draw(_coef)
            den = zs - draw(st.sampled_from([1, -1, 2, sp.I, -sp.I, 1 + sp.I]))
            row.append(num / den if draw(st.booleans()) else num)
        rows.append(row)
    return M(rows)


@settings(max_examples=100, deadline=None)
@given(ratmats(), ratmats(), ratmats())
def test_associative_distributive(A, B, C):
    assert (A @ B) @ C == A @ (B @ C)
    assert A @ (B + C) == A @ B + A @ C


@settings(max_examples=50, deadline=None)
@given(ratmats())
def test_sharp_involution(A):
    assert A.sharp().sharp() == A


@settings(max_examples=50, deadline=None)
@given(ratmats())
def test_inverse_identity(A):
    if A.det().is_zero():
        return
    assert A @ A.inverse() == RatMat.eye(2)


@settings(max_examples=30, deadline=None)
@given(ratmats())
def test_against_sympy_inverse(A):
    if A.det().is_zero():
        return
    want = to_sympy(A).inv()
    got = to_sympy(A.inverse())
    assert sp.simplify(got - want) == sp.zeros(2, 2)


_gcoef = st.builds(lambda a, b, d: f"({a} + {b}*I)/{d}", st.integers(-4, 4),
                   st.integers(-4, 4), st.integers(1, 5))


@settings(max_examples=60, deadline=None)
@given(st.lists(_gcoef, min_size=1, max_size=3), st.lists(_gcoef, min_size=1, max_size=3),
       st.lists(_gcoef, min_size=0, max_size=2))
def test_gcd_matches_sympy(ra, rb, common):
    """Products of linear factors, with and without a shared factor."""
    def prod(roots):
        e = sp.Integer(1)
        for r in roots:
            e *= zs - sp.sympify(r)
        return e
    ea, eb = prod(ra + common), prod(rb + common)
    want = sp.Poly(ea, zs, domain=sp.QQ_I).gcd(sp.Poly(eb, zs, domain=sp.QQ_I)).monic()
    got = poly_gcd(sym_poly(ea), sym_poly(eb))
    assert got == sym_poly(want.as_expr())
