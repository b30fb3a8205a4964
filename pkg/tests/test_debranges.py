from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from conftest import M, brute_membership, close, zs
from dbmat.classes import in_UJ, make_signature
from dbmat.debranges import (DBMatrix, DeBrangesPair, K0Error, K0Operator, assoc_check,
                             char_fn, db_check, db_decompose, gram_psd, inner_product,
                             inner_product_coeff, inner_product_quad, kernel_eval,
                             kernel_function, lemma51_check, pair_validate, rs_apply,
                             space_membership, to_u_basis, to_w_basis)
from dbmat.generators import gen_k0
from dbmat.ratmat import GaussianRational as G
from dbmat.ratmat import RatMat, RationalError

RUNNING = DeBrangesPair(M([["z - I"]]), M([["z + I"]]))


def _col(*xs):
    return M([[x] for x in xs])


def _decomposed(seed, N, n):
    W, _ = char_fn(gen_k0(seed, N, n))
    S, tilde, pair, v = db_decompose(db_check(W, n))
    assert v
    return pair, S


class TestPairs:
    def test_running(self):
        v = pair_validate(M([["z - I"]]), M([["z + I"]]))
        assert v and not v.flags

    def test_swapped(self):
        v = pair_validate(M([["z + I"]]), M([["z - I"]]))
        assert not v and "E+^-1 E- inner" in v.failures()
        with pytest.raises(ValueError):
            DeBrangesPair(M([["z + I"]]), M([["z - I"]]))

    def test_degenerate(self):
        v = pair_validate(M([[1]]), M([[1]]))
        assert v and any("degenerate" in f for f in v.flags)
        assert DeBrangesPair(M([[1]]), M([[1]])).degenerate

    def test_non_polynomial(self):
        with pytest.raises(RationalError):
            pair_validate(M([["1/z"]]), M([["z + I"]]))

    @pytest.mark.parametrize("seed,N,n", [(0, 2, 1), (1, 3, 1), (2, 4, 2)])
    def test_sharp_identity(self, seed, N, n):
        pair, _ = _decomposed(seed, N, n)
        Ep, Em = pair.E_plus, pair.E_minus
        assert Ep @ Ep.sharp() == Em @ Em.sharp()


class TestKernel:
    def test_running_constant(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            w, z = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert close(kernel_eval(RUNNING, w, z), [[1 / np.pi]])
        assert close(kernel_eval(RUNNING, 1 + 2j, 1 - 2j), [[1 / np.pi]])

    def test_diagonal_branch_continuity(self):
        pair, _ = _decomposed(2, 4, 2)
        w = 0.4 + 0.9j
        at = kernel_eval(pair, w, w.conjugate())
        for h in (1e-5, 1e-5j):
            # symmetric difference limit of the generic branch, O(h^2) accurate
            near = (kernel_eval(pair, w, w.conjugate() + h)
                    + kernel_eval(pair, w, w.conjugate() - h)) / 2
            assert close(near, at, 1e-8)

    def test_real_diagonal_psd(self):
        pair, _ = _decomposed(2, 4, 2)
        for x in (-2.0, 0.0, 1.5):
            K = kernel_eval(pair, x, x)
            assert close(K, K.conj().T)
            assert np.linalg.eigvalsh((K + K.conj().T) / 2).min() >= -1e-9

    def test_hermitian_symmetry(self):
        pair, _ = _decomposed(2, 4, 2)
        rng = np.random.default_rng(1)
        for _ in range(50):
            z, w = rng.normal(size=2) * 2 + 1j * rng.normal(size=2) * 2
            assert close(kernel_eval(pair, w, z).conj().T, kernel_eval(pair, z, w), 1e-9)

    def test_function_matches_eval(self):
        pair, _ = _decomposed(1, 3, 1)
        w = 0.5 - 0.25j
        K = kernel_function(pair, w)
        for z in (0.1, 1 + 1j, -2j):
            assert close(K.eval(z), kernel_eval(pair, w, z))
        Ks = kernel_function(pair, G(Fraction(1, 2), Fraction(-1, 4)), scaled=True)
        assert Ks.exact
        assert close(Ks.to_float().eval(1 + 1j), np.pi * kernel_eval(pair, w, 1 + 1j))


class TestGram:
    def test_single_point(self):
        assert gram_psd(RUNNING, [1j], [[1.0]])

    def test_running_rank_one(self):
        pts = [1j, 2 + 1j, -1 - 0.5j]
        v = gram_psd(RUNNING, pts, [[1.0], [2.0], [1j]])
        assert v

    @pytest.mark.parametrize("seed,N,n", [(0, 2, 1), (2, 4, 2)])
    def test_random_sets(self, seed, N, n):
        pair, _ = _decomposed(seed, N, n)
        rng = np.random.default_rng(seed)
        for _ in range(5):
            k = 6
            pts = list(rng.normal(size=k) * 2 + 1j * rng.normal(size=k) * 2)
            vecs = list(rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n)))
            assert gram_psd(pair, pts, vecs)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            gram_psd(RUNNING, [1j], [])


class TestSpace:
    def test_examples(self):
        assert space_membership(RUNNING, _col(3))
        v = space_membership(RUNNING, _col("3*z"))
        assert not v and v.witnesses == {} and v.failures()
        assert space_membership(RUNNING, RatMat.zeros(1, 1))

    def test_brute_force_scalar(self):
        pair = DeBrangesPair(M([["(z - I)*(z - 2*I)"]]), M([["(z + I)*(z + 2*I)"]]))
        for f in ["1", "z", "z**2", "z - I", "(z + I)*(z + 2*I)", "I*z + 5"]:
            col = _col(f)
            assert bool(space_membership(pair, col)) == brute_membership(pair, col), f

    def test_brute_force_decomposed(self):
        pair, _ = _decomposed(1, 3, 1)
        d = pair.E_plus.max_degree()
        rng = np.random.default_rng(5)
        for k in range(8):
            deg = int(rng.integers(0, d + 1))
            f = sum((int(rng.integers(-2, 3)) + sp.I * int(rng.integers(-2, 3))) * zs ** j
                    for j in range(deg + 1))
            col = _col(f if f != 0 else 1)
            assert bool(space_membership(pair, col)) == brute_membership(pair, col)
        # multiples of the kernel are in the space
        Ks = kernel_function(pair, G(0, 1), scaled=True)
        assert space_membership(pair, Ks)
        assert brute_membership(pair, Ks)


class TestInnerProduct:
    def test_constant(self):
        assert inner_product_coeff(RUNNING, _col(2), _col(2)) == G(4)
        assert close(inner_product(RUNNING, _col(2), _col(2)), 4 * np.pi)
        assert close(inner_product_quad(RUNNING, _col(2), _col(2)), 4 * np.pi, 1e-6)

    def test_reproducing_running(self):
        # <c, K_w u> = conj(u) c; with pi K_w = 1 this is <c, u> = pi conj(u) c
        for w in (G(0, 1), G(2, -1)):
            Ku = kernel_function(RUNNING, w, scaled=True) @ _col("3 + I")
            assert inner_product_coeff(RUNNING, _col(2), Ku) == G(3, -1) * 2

    @pytest.mark.parametrize("seed,N,n", [(0, 2, 1), (1, 3, 1), (2, 4, 2)])
    def test_reproducing_spanning_set(self, seed, N, n):
        pair, _ = _decomposed(seed, N, n)
        pts = [G(Fraction(k, 3), Fraction(1, k + 1)) for k in range(3)]
        us = [RatMat.const([[G(1)]] + [[G(k, 1)]] * (n - 1)) for k in range(2)]
        fs = [kernel_function(pair, w, scaled=True) @ u for w in pts for u in us]
        for f in fs:
            assert space_membership(pair, f)
            for w in pts:
                for u in us:
                    g = kernel_function(pair, w, scaled=True) @ u
                    want = (u.sharp() @ RatMat.const(f.eval(w))).eval(0)[0][0]
                    assert inner_product_coeff(pair, f, g) == want

    def test_quadrature_agrees(self):
        pair, _ = _decomposed(1, 3, 1)
        f = kernel_function(pair, G(0, 1), scaled=True)
        g = kernel_function(pair, G(1, 2), scaled=True)
        assert close(inner_product(pair, f, g), inner_product_quad(pair, f, g), 1e-6)

    def test_not_decaying(self):
        with pytest.raises(RationalError):
            inner_product(RUNNING, _col("z"), _col("z"))


class TestAssociated:
    @pytest.mark.parametrize("S", ["1", "z + I", "z"])
    def test_examples(self, S):
        assert assoc_check(RUNNING, M([[S]]))

    def test_not_associated(self):
        assert not assoc_check(RUNNING, M([["z**2"]]))

    def test_singular(self):
        with pytest.raises(RationalError):
            assoc_check(RUNNING, M([[0]]))

    def test_decomposition_S(self):
        pair, S = _decomposed(2, 4, 2)
        assert assoc_check(pair, S)


class TestRS:
    def test_S_times_constant(self):
        S = M([["z + I"]])
        out, v = rs_apply(RUNNING, S, G(1), S @ _col(2))
        assert out.is_zero() and v

    def test_S_one(self):
        out, v = rs_apply(RUNNING, M([[1]]), G(0), _col(5))
        assert out.is_zero() and v

    def test_S_E_plus(self):
        out, v = rs_apply(RUNNING, M([["z + I"]]), G(0), _col(1))
        assert out == _col("I") and v

    def test_singular_at_w(self):
        with pytest.raises(RationalError):
            rs_apply(RUNNING, M([["z"]]), G(0), _col(1))

    def test_invariance_decomposed(self):
        pair, S = _decomposed(1, 3, 1)
        f = kernel_function(pair, G(0, 1), scaled=True)
        out, v = rs_apply(pair, S, G(Fraction(1, 3), 2), f)
        assert v


class TestBases:
    def test_identity(self):
        U = to_u_basis(RatMat.eye(2), 1)
        assert U.mat == make_signature(1).M_scaled and U.k == 1
        assert to_w_basis(RatMat.eye(2), 1) == RatMat.eye(2)

    def test_M_itself(self):
        Mf = make_signature(1).M
        assert to_w_basis(Mf, 1).equals(Mf)

    def test_running_u12(self):
        U = to_u_basis(M([["z", 1], [-1, 0]]), 1)
        u12 = U.mat.blocks(1)[1]
        assert u12 == M([["1 - I*z"]])

    def test_size(self):
        with pytest.raises(RationalError):
            to_u_basis(RatMat.eye(3), 1)


class TestDBMatrix:
    def test_identity(self):
        d = db_check(RatMat.eye(2), 1)
        assert isinstance(d, DBMatrix) and d.Phi == RatMat.eye(1)

    def test_running(self):
        d = db_check(M([["z", 1], [-1, 0]]), 1)
        assert isinstance(d, DBMatrix) and d.Phi == M([["I/(z + I)"]])

    def test_not_j_unitary(self):
        v = db_check(M([[2, 0], [0, 1]]), 1)
        assert not isinstance(v, DBMatrix) and not v

    def test_lemma_identity_and_running(self):
        assert lemma51_check(RatMat.eye(2), 1)
        v = lemma51_check(M([["z", 1], [-1, 0]]), 1)
        assert v
        # chi = u12# (u11#)^{-1} = (1 + iz)/(1 - iz)
        U = to_u_basis(M([["z", 1], [-1, 0]]), 1).mat
        u11, u12 = U.blocks(1)[:2]
        assert u12.sharp() @ u11.sharp().inverse() == M([["(1 + I*z)/(1 - I*z)"]])


class TestDecompose:
    def test_running(self):
        S, tilde, pair, v = db_decompose(db_check(M([["z", 1], [-1, 0]]), 1))
        assert v and S == RatMat.eye(1)
        assert pair == RUNNING

    def test_entire(self):
        A = M([["z", 1], [-1, 0]])
        S, tilde, _, _ = db_decompose(db_check(A, 1))
        assert tuple(tilde) == A.blocks(1)

    @pytest.mark.parametrize("seed,N,n", [(0, 2, 1), (3, 4, 1), (2, 4, 2)])
    def test_char_fn(self, seed, N, n):
        W, _ = char_fn(gen_k0(seed, N, n))
        S, tilde, pair, v = db_decompose(db_check(W, n))
        assert v
        assert S.max_degree() > 0
        for a, t in zip(W.blocks(n), tilde):
            assert S @ a == t

    def test_needs_certificate(self):
        with pytest.raises(TypeError):
            db_decompose(RatMat.eye(2))


class TestCharFn:
    def test_diag_example(self):
        T = [[G(0, 1), G(0)], [G(0), G(0, -1)]]
        U = [[G(1), G(0, 1)], [G(1), G(0, -1)]]
        J = make_signature(1).Jscr
        Um, Tm = RatMat.const(U), RatMat.const(T)
        assert Um @ J @ Um.sharp() == (Tm - Tm.sharp()) * G(0, -1)
        W, op = char_fn(T, U)
        assert in_UJ(W, J)
        assert isinstance(db_check(W, 1), DBMatrix)
        assert op.convention == "u_r* R u_t"

    def test_selfadjoint_rejected(self):
        with pytest.raises(K0Error, match="rank"):
            char_fn([[G(1), G(0)], [G(0), G(2)]])

    def test_real_eigenvalue_rejected(self):
        T = [[G(0, 1), G(0), G(0)], [G(0), G(0, -1), G(0)], [G(0), G(0), G(1)]]
        with pytest.raises(K0Error, match="real eigenvalue") as err:
            char_fn(T)
        assert close(err.value.witness["eigenvalue"], 1)

    def test_default_U(self):
        W, op = char_fn(np.diag([1j, -1j]))
        assert op.U is not None
        assert in_UJ(W, make_signature(1).Jscr)

    @pytest.mark.parametrize("seed", range(6))
    def test_random_lemma(self, seed):
        N, n = [(4, 1), (4, 2)][seed % 2]
        W, _ = char_fn(gen_k0(seed, N, n))
        assert lemma51_check(W, n)
        assert isinstance(K0Operator.from_data(np.eye(2)), K0Operator)
