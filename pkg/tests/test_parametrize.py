from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import M
from dbmat.classes import in_UJ, make_signature, pole_regions
from dbmat.debranges import (DBMatrix, DeBrangesPair, char_fn, db_check, db_decompose,
                             phi_blocks)
from dbmat.generators import gen_k0
from dbmat.parametrize import (CayleyData, NotCaratheodoryError, construct_db, density_of,
                               extract_PQ, phi_of, realpart_identities, recover_blocks,
                               sharp_inverse_identity, uniqueness_check, verify_pg_blocks)
from dbmat.ratmat import GaussianRational as G
from dbmat.ratmat import RatMat, RationalError

A_RUN = M([["z", 1], [-1, 0]])
PAIR_RUN = DeBrangesPair(M([["z - I"]]), M([["z + I"]]))
PAIR_ONE = DeBrangesPair(M([[1]]), M([[1]]))
ONE = RatMat.eye(1)


def _corpus(k=3):
    out = []
    for seed in range(k):
        N, n = [(4, 1), (4, 2), (6, 2)][seed % 3]
        W, _ = char_fn(gen_k0(seed, N, n))
        out.append((W, n))
    return out


CORPUS = _corpus()


class TestPhi:
    def test_identity(self):
        assert phi_of(RatMat.eye(2), 1) == ONE

    def test_running(self):
        assert phi_of(A_RUN, 1) == M([["I/(z + I)"]])

    @pytest.mark.parametrize("W,n", CORPUS)
    def test_char_fn(self, W, n):
        Phi = phi_of(W, n)
        assert all(reg != "real" for _, _, reg in pole_regions(Phi))


class TestSharpInverse:
    @pytest.mark.parametrize("A,n", [(RatMat.eye(2), 1), (A_RUN, 1)] + CORPUS)
    def test_holds(self, A, n):
        v = sharp_inverse_identity(A, n)
        assert v and len(v.children) == 2


class TestDensity:
    def test_running(self):
        assert density_of(PAIR_RUN, ONE) == M([["1/(z**2 + 1)"]])

    def test_S_is_E_plus(self):
        assert density_of(PAIR_RUN, M([["z + I"]])) == ONE

    def test_constant_unitary(self):
        pair = DeBrangesPair(M([[0, 1], [1, 0]]), M([[0, "I"], [1, 0]]))
        assert density_of(pair, RatMat.eye(2)) == RatMat.eye(2)


class TestExtract:
    def test_running(self):
        p = extract_PQ(M([["I/(z + I)"]]))
        assert p.P.is_zero() and p.Q.is_zero() and p.density == M([["1/(z**2 + 1)"]])

    def test_identity(self):
        p = extract_PQ(ONE)
        assert p.P.is_zero() and p.Q.is_zero() and p.density == ONE

    def test_i_times_hermitian(self):
        C = M([[1, "2 + I"], ["2 - I", -3]])
        p = extract_PQ(C * G(0, 1))
        assert p.P.is_zero() and p.Q == C and p.density.is_zero()

    def test_linear_part(self):
        p = extract_PQ(M([["-2*I*z + I/(z + I)"]]))
        assert p.P == M([[2]]) and p.Q.is_zero()

    def test_not_caratheodory(self):
        with pytest.raises(NotCaratheodoryError):
            extract_PQ(M([[-1]]))


class TestRealPart:
    def test_running(self):
        Phi = M([["I/(z + I)"]])
        assert (Phi + Phi.sharp()) * G(Fraction(1, 2)) == M([["1/(z**2 + 1)"]])
        v = realpart_identities(PAIR_RUN, ONE, Phi, A=A_RUN)
        assert v, v.failures()

    def test_identity(self):
        assert realpart_identities(PAIR_ONE, ONE, ONE, A=RatMat.eye(2))

    @pytest.mark.parametrize("W,n", CORPUS)
    def test_char_fn(self, W, n):
        S, _, pair, _ = db_decompose(db_check(W, n))
        v = realpart_identities(pair, S, phi_of(W, n), A=W)
        assert v, v.failures()


class TestRecover:
    def test_running(self):
        t21, t22 = recover_blocks(PAIR_RUN, ONE, M([["I/(z + I)"]]))
        assert t21 == M([[-1]]) and t22.is_zero()

    def test_identity(self):
        t21, t22 = recover_blocks(PAIR_ONE, ONE, ONE)
        assert t21.is_zero() and t22 == ONE

    @pytest.mark.parametrize("q", [1, -2, Fraction(1, 3)])
    def test_Q_shift(self, q):
        q = G(q)
        Phi = M([["I/(z + I)"]]) + ONE * (G(0, 1) * q)
        t21, t22 = recover_blocks(PAIR_RUN, ONE, Phi)
        assert t22 == ONE * (-q)
        assert t21 == M([["-z"]]) * q - ONE

    def test_inconsistent(self):
        with pytest.raises(RationalError, match="not polynomial"):
            recover_blocks(PAIR_RUN, ONE, M([["I/(z + 2*I)"]]))


class TestConstruct:
    def test_running(self):
        d = construct_db(PAIR_RUN, ONE, 0, 0)
        assert d.A == A_RUN
        J = make_signature(1).Jscr
        assert d.A.sharp() @ J @ d.A == J
        assert d.Phi == M([["I/(z + I)"]])

    def test_identity(self):
        assert construct_db(PAIR_ONE, ONE, 0, 0).A == RatMat.eye(2)

    @pytest.mark.parametrize("q", [3, -1, Fraction(2, 5)])
    def test_Q(self, q):
        d = construct_db(PAIR_RUN, ONE, 0, [[G(q)]])
        want = M([["z", 1], [f"-({q})*z - 1", f"-({q})"]])
        assert d.A == want

    def test_P(self):
        assert construct_db(PAIR_RUN, ONE, [[2]], 0).A == M([["z", 1], ["-1 + 2*z**2", "2*z"]])

    def test_bad_P(self):
        with pytest.raises(ValueError, match="P not Hermitian PSD"):
            construct_db(PAIR_RUN, ONE, [[-1]], 0)

    def test_not_associated(self):
        with pytest.raises(RationalError, match="not associated"):
            construct_db(PAIR_RUN, M([["z**2"]]), 0, 0)


class TestRoundTrip:
    def test_nontrivial_S(self):
        S = M([["z + I"]])
        d = construct_db(PAIR_RUN, S, [[1]], [[2]])
        S2, _, pair, v = db_decompose(d)
        assert v and pair == PAIR_RUN and S2 == S
        p = extract_PQ(d.Phi)
        assert p.P == M([[1]]) and p.Q == M([[2]])

    @pytest.mark.parametrize("W,n", CORPUS)
    def test_char_fn(self, W, n):
        S, _, pair, _ = db_decompose(db_check(W, n))
        p = extract_PQ(phi_of(W, n))
        d = construct_db(pair, S, p.P, p.Q)
        assert d.A == W


class TestPGBlocks:
    def test_identity(self):
        v = verify_pg_blocks(RatMat.eye(2), 1)
        assert v
        assert CayleyData.from_phi(ONE).c.is_zero()

    def test_running(self):
        assert verify_pg_blocks(A_RUN, 1)
        cay = CayleyData.from_phi(phi_blocks(A_RUN, 1))
        assert cay.c == M([["-z/(z + 2*I)"]])
        assert cay.holds()

    @pytest.mark.parametrize("W,n", CORPUS)
    def test_char_fn(self, W, n):
        v = verify_pg_blocks(W, n)
        assert v, v.failures()
        assert sum(1 for c in v.children if c.name.startswith("w")) == 6


class TestUniqueness:
    def test_same(self):
        L, v = uniqueness_check(A_RUN, A_RUN, 1)
        assert v and L.is_zero()

    def test_Q_shift(self):
        L, v = uniqueness_check(A_RUN, M([["z", 1], ["-3*z - 1", -3]]), 1)
        assert v and L == M([[-3]])

    def test_P_shift(self):
        B = construct_db(PAIR_RUN, ONE, [[2]], 0).A
        L, v = uniqueness_check(A_RUN, B, 1)
        assert v and L == M([["2*z"]])

    def test_unrelated(self):
        L, v = uniqueness_check(A_RUN, RatMat.eye(2), 1)
        assert not v and L is None


@settings(max_examples=25, deadline=None)
@given(st.fractions(0, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4),
       st.fractions(0, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4))
def test_uniqueness_relation(p, q, pt, qt):
    A = construct_db(PAIR_RUN, ONE, [[G(p)]], [[G(q)]]).A
    B = construct_db(PAIR_RUN, ONE, [[G(pt)]], [[G(qt)]]).A
    L, v = uniqueness_check(A, B, 1)
    assert v
    assert L == M([[f"({q}) - ({qt}) + z*(({pt}) - ({p}))"]])


def test_constructed_is_certified():
    d = construct_db(PAIR_RUN, M([["z + I"]]), [[1]], [[2]])
    assert isinstance(d, DBMatrix)
    assert in_UJ(d.A, make_signature(1).Jscr)
    assert isinstance(db_check(d.A, 1), DBMatrix)
