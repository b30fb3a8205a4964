from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import M, close
from dbmat.herglotz import (HerglotzParams, hardy_split, herglotz_eval, herglotz_quad,
                            herglotz_rational, mass_term, split_den)
from dbmat.ratmat import GaussianRational, RatMat, RationalError


def _params(D, P=0, Q=0):
    n = D.rows
    return HerglotzParams(RatMat.eye(n) * P, RatMat.eye(n) * Q, D)


def _oracle(D, z, P=0.0, Q=0.0):
    """iQ - izP + (1/(pi i)) int K(x, z) D(x) dx over R, via x = tan(t)."""
    Df = D.to_float()

    def part(t, k):
        x = np.tan(t)
        v = (1 + x * z) / ((x - z) * (1 + x * x)) * Df.eval(x)[0, 0] / np.cos(t) ** 2
        return v.real if k == 0 else v.imag
    h = np.pi / 2
    re = quad(part, -h, h, args=(0,), limit=400, epsabs=1e-13)[0]
    im = quad(part, -h, h, args=(1,), limit=400, epsabs=1e-13)[0]
    return 1j * Q - 1j * z * P + (re + 1j * im) / (np.pi * 1j)


RUNNING_D = M([["1/(1 + z**2)"]])


class TestExamples:
    def test_running_density(self):
        p = _params(RUNNING_D)
        Phi = herglotz_rational(p)
        assert Phi == M([["I/(z + I)"]])
        assert close(herglotz_eval(p, 2j), [[1 / 3]])
        # exact value at z = 2i
        assert Phi.eval(GaussianRational(0, 2))[0][0] == GaussianRational(Fraction(1, 3))

    def test_constant_density(self):
        p = _params(RatMat.eye(1))
        assert herglotz_rational(p) == RatMat.eye(1)
        for z in (1j, 2 + 0.5j, -3 + 4j):
            assert close(herglotz_eval(p, z), [[1]])

    def test_linear_part(self):
        p = HerglotzParams(RatMat.eye(2), RatMat.zeros(2, 2), RatMat.zeros(2, 2))
        for y in (0.5, 1.0, 3.0):
            assert close(herglotz_eval(p, 1j * y), y * np.eye(2))
        assert herglotz_rational(p) == M([["-I*z", 0], [0, "-I*z"]])

    def test_Q_part(self):
        p = _params(RatMat.zeros(1, 1), Q=3)
        assert herglotz_rational(p) == M([["3*I"]])


@pytest.mark.parametrize("D", [RUNNING_D, M([["2/(z**2 + 4) + 1/(z**2 + 1)"]]),
                               M([["(z**2 + 2)/(z**2 + 1)"]])])
def test_residues_vs_quadrature(D):
    rng = np.random.default_rng(7)
    p = _params(D)
    Phi = herglotz_rational(p).to_float()
    for _ in range(10):
        z = complex(rng.uniform(-5, 5), rng.uniform(0.1, 5))
        want = _oracle(D, z)
        assert close(herglotz_eval(p, z)[0, 0], want, 1e-6)
        assert close(Phi.eval(z)[0, 0], want, 1e-6)


def test_package_quadrature_matches_residues():
    rng = np.random.default_rng(11)
    p = _params(RUNNING_D)
    for _ in range(10):
        z = complex(rng.uniform(-5, 5), rng.uniform(0.1, 5))
        assert close(herglotz_quad(p, z), herglotz_eval(p, z), 1e-6)


def test_lower_half_plane_jump():
    # the rational continuation differs from the lower integral by 2 D(z)
    D = M([["2/(z**2 + 4) + 1/(z**2 + 1)"]])
    Phi = herglotz_rational(_params(D)).to_float()
    for z in (0.5 - 0.3j, -2 - 1.5j, 3 - 0.7j):
        want = _oracle(D, z) + 2 * D.to_float().eval(z)[0, 0]
        assert close(Phi.eval(z)[0, 0], want, 1e-6)


def test_point_mass():
    F = mass_term(0.0, [[1.0]])
    for z in (1j, 2 + 1j):
        assert close(F.eval(z)[0, 0], 1 / (np.pi * 1j) * (1 / (0 - z)))
    with pytest.raises(RationalError):
        mass_term(0, M([[1]]))


def test_real_pole_rejected():
    with pytest.raises(RationalError):
        herglotz_eval(_params(M([["1/z**2"]])), 1j)


def test_check_invariants():
    assert _params(RUNNING_D).check() == []
    bad = HerglotzParams(RatMat.eye(1) * -1, M([["I"]]), M([["I/(1 + z**2)"]]))
    msgs = bad.check()
    assert "P not Hermitian PSD" in msgs
    assert "Q not Hermitian" in msgs
    assert any("density" in m for m in msgs)


def test_split_den_and_hardy():
    lo, up = split_den(M([["1/((z + I)*(z - 2*I))"]]).den)
    assert close(lo.roots()[0][0], -1j) and close(up.roots()[0][0], 2j)
    C, Flo, Fup = hardy_split(RUNNING_D)
    assert C.is_zero() and C + Flo + Fup == RUNNING_D
