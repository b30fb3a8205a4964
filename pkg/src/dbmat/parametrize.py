"""
Parametrization of de Branges matrices by (E_minus, E_plus, S, P, Q).

A de Branges matrix A determines Phi = (a22 - i a21)(a11 + i a12)^{-1},
a Caratheodory function whose Herglotz data (P, Q, Delta) together with
the pair and S recover A.  Everything here is exact when the inputs are
exact; sampled checks use the grids of :mod:`dbmat.grids`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classes import (TOL, _identity_residual, in_caratheodory, in_inner, in_smirnov,
                      in_UJ, make_signature, pg_transform, pole_regions)
from .debranges import (DBMatrix, DeBrangesPair, InternalInvariantError, assoc_check,
                        db_check, pair_validate, phi_blocks, to_w_basis)
from .grids import DEFAULT_GRID, away_from
from .herglotz import HerglotzParams, const_mat, herglotz_rational
from .ratmat import (I_UNIT, GaussianRational, Poly, RatMat, RationalError,
                     SingularMatrixError, Z, as_gr)
from .verdict import Verdict

__all__ = ["CayleyData", "NotCaratheodoryError", "phi_of", "sharp_inverse_identity",
           "density_of", "extract_PQ", "realpart_identities", "recover_blocks",
           "construct_db", "verify_pg_blocks", "uniqueness_check", "QUAD_POINTS"]

_HALF = GaussianRational(Fraction(1, 2))

# 20 fixed sample points for the quadratic-form identity (both half planes)
QUAD_POINTS = np.array([complex(-4.5 + 0.47 * k, (1.9 if k % 2 else -1.3) * (0.3 + 0.11 * k))
                        for k in range(20)])


class NotCaratheodoryError(RationalError):
    """Phi admits no Herglotz representation; ``residual`` says why."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _i(M):
    return I_UNIT if M.exact else 1j


def _half(M):
    return _HALF if M.exact else 0.5


def _same(lhs, rhs, tol):
    """(ok, residual): exact equality in exact mode, relative residual otherwise."""
    res = _identity_residual(lhs, rhs)
    if lhs.exact and rhs.exact:
        return res == 0.0, res
    return res <= tol, res


def _align(*mats):
    if all(M.exact for M in mats):
        return mats
    return tuple(M.to_float() for M in mats)


def _hermitian_float(M):
    return (M + M.conj().T) / 2


# -------------
# Phi
# -------------

def phi_of(A, n, check=True, tol=TOL):
    """Phi from both block forms, verified equal.

    ``(a22 - i a21)(a11 + i a12)^{-1}`` and
    ``(a11# + i a12#)^{-1}(a22# - i a21#)`` agree whenever A# = Jscr A^{-1} Jscr.
    """
    Phi = phi_blocks(A, n)
    if not check:
        return Phi
    a11, a12, a21, a22 = A.blocks(n)
    i = _i(A)
    try:
        Phi2 = (a11.sharp() + a12.sharp() * i).inverse() @ (a22.sharp() - a21.sharp() * i)
    except SingularMatrixError as err:
        raise RationalError("identically singular corner a11# + i a12#") from err
    ok, res = _same(Phi, Phi2, tol)
    if not ok:
        raise RationalError(f"the two Phi forms disagree (residual {res:.3g}); "
                            "A is not Jscr-unitary")
    return Phi


def sharp_inverse_identity(A, n, tol=TOL):
    """A# = Jscr A^{-1} Jscr and A^{-1} = [[a22#, -a12#], [-a21#, a11#]]."""
    J = make_signature(n).Jscr
    if not A.exact:
        J = J.to_float()
    try:
        Ainv = A.inverse()
    except SingularMatrixError:
        return Verdict(False, "sharp inverse identity", {"error": "det A identically 0"})
    ok1, r1 = _same(A.sharp(), J @ Ainv @ J, tol)
    a11, a12, a21, a22 = A.blocks(n)
    B = RatMat.block([[a22.sharp(), -a12.sharp()], [-a21.sharp(), a11.sharp()]])
    ok2, r2 = _same(Ainv, B, tol)
    return Verdict.all_of("sharp inverse identity", [
        Verdict(ok1, "A# = J A^-1 J", {"residual": r1}),
        Verdict(ok2, "block inverse formula", {"residual": r2})])


# -------------
# Density and Herglotz data
# -------------

def _pair_mats(pair, S):
    Ep, Em = pair.E_plus, pair.E_minus
    if not (Ep.exact and S.exact):
        return Ep.to_float(), Em.to_float(), S.to_float()
    return Ep, Em, S


def density_of(pair, S):
    """Delta = S# (E+#)^{-1} E+^{-1} S, equal to S* E+^{-*} E+^{-1} S on R."""
    Ep, _, S = _pair_mats(pair, S)
    return S.sharp() @ Ep.sharp().inverse() @ Ep.inverse() @ S


def extract_PQ(Phi, hint=None, tol=TOL):
    """Herglotz data (P, Q, Delta) of a Caratheodory Phi without real poles.

    P = i C1 from the linear part, Delta = (Phi + Phi#)/2 and Q is the
    constant remainder ``-i(Phi + izP - H0)`` with H0 the density term.
    The round trip back to Phi is verified.
    """
    v, params = in_caratheodory(Phi, tol, hint=hint)
    if not v.member:
        raise NotCaratheodoryError("not a Caratheodory representation",
                                   residual=v.to_dict()["witnesses"])
    if params.point_masses:
        raise NotCaratheodoryError("Phi has real poles (point masses)",
                                   residual={"points": [x for x, _ in params.point_masses]})
    back = herglotz_rational(params, hint=Phi.den if hint is None else hint)
    ok, res = _same(back, Phi, tol)
    if not ok:
        raise NotCaratheodoryError("not a Caratheodory representation: round trip failed",
                                   residual=res)
    return params


# ----------------------------------
# Real and imaginary part identities
# ----------------------------------

def _poles_of(*mats):
    out = []
    for M in mats:
        if M.den.degree > 0:
            out += [r for r, _ in M.to_float().poles()]
    return out


def _x_tilde(Ep, S, z):
    """S(z)* E+(z)^{-*} E+(z)^{-1} S(z), evaluated pointwise."""
    Y = np.linalg.solve(np.asarray(Ep.eval(z), complex), np.asarray(S.eval(z), complex))
    return Y.conj().T @ Y


def realpart_identities(pair, S, Phi, A=None, grid=DEFAULT_GRID, tol=TOL):
    """Real and imaginary part forms, quadratic-form identity, Measure trichotomy.

    ``A`` defaults to the matrix rebuilt from (pair, S, Phi).
    """
    Ep, Em, S = _pair_mats(pair, S)
    if not Phi.exact:
        Ep, Em, S = Ep.to_float(), Em.to_float(), S.to_float()
    Phi = Phi if (Ep.exact and Phi.exact) else Phi.to_float()
    i, h = _i(Phi), _half(Phi)
    n = Phi.rows
    X = S.sharp() @ Ep.sharp().inverse() @ Ep.inverse() @ S
    kids = []
    ok, res = _same((Phi + Phi.sharp()) * h, X, tol)
    printed = S.sharp() @ Em.sharp().inverse() @ Ep.inverse() @ S
    kids.append(Verdict(ok, "Real part: (Phi + Phi#)/2 = S# (E+#)^-1 E+^-1 S",
                        {"residual": res,
                         "E_minus_sharp_form_matches": _same((Phi + Phi.sharp()) * h,
                                                             printed, tol)[0]}))
    imag = (Phi - Phi.sharp()) * (h * (-i))
    ok, res = _same(imag, X * i - Phi * i, tol)
    kids.append(Verdict(ok, "Imaginary part: (Phi - Phi#)/(2i) = i X - i Phi",
                        {"residual": res}))
    # quadratic-form identity
    if A is None:
        A = _assemble(Ep, Em, S, *recover_blocks(DeBrangesPair(Em, Ep, validate=False),
                                                 S, Phi, tol))
    Af = A.to_float()
    a11, a12, _, _ = Af.blocks(n)
    Phif = Phi.to_float()
    J = np.asarray(make_signature(n).Jscr.to_float().eval(0))
    L = np.hstack([np.eye(n), -1j * np.eye(n)])
    pts = away_from(QUAD_POINTS, _poles_of(Af, Phif))
    worst = 0.0
    for z in pts:
        a = np.asarray(Af.eval(z), complex)
        lhs = L @ (J - a.conj().T @ J @ a) @ L.conj().T + 2 * np.eye(n)
        v = np.asarray(a11.eval(z) + 1j * a12.eval(z), complex)
        p = np.asarray(Phif.eval(z), complex)
        rhs = v.conj().T @ (p + p.conj().T) @ v
        sc = max(1.0, float(np.abs(lhs).max()), float(np.abs(rhs).max()))
        worst = max(worst, float(np.abs(lhs - rhs).max()) / sc)
    kids.append(Verdict(worst <= tol, "quadratic-form identity",
                        {"max_rel_residual": worst, "points": int(len(pts))}))
    kids.append(_measure_trichotomy(Ep.to_float(), S.to_float(), Phif, grid, tol))
    return Verdict.all_of("real part identities", kids)


def _measure_trichotomy(Ep, S, Phi, grid, tol):
    bad = _poles_of(Phi, Ep.inverse())

    def diff(z):
        p = np.asarray(Phi.eval(z), complex)
        re = _hermitian_float(p)
        x = _x_tilde(Ep, S, z)
        sc = max(1.0, float(np.abs(re).max()), float(np.abs(x).max()))
        return np.linalg.eigvalsh(_hermitian_float(re - x)) / sc

    up = [diff(z).min() for z in away_from(grid.upper(), bad)]
    lo = [diff(z).max() for z in away_from(grid.lower(), bad)]
    on = [np.abs(diff(z)).max() for z in away_from(grid.real(), bad)]
    w_up = float(min(up, default=0.0))
    w_lo = float(max(lo, default=0.0))
    w_on = float(max(on, default=0.0))
    return Verdict.all_of("Measure trichotomy", [
        Verdict(w_up >= -tol, "Re Phi - X >= 0 on C+", {"min_eig": w_up}),
        Verdict(w_on <= tol, "Re Phi - X = 0 on R", {"max_abs_eig": w_on}),
        Verdict(w_lo <= tol, "Re Phi - X <= 0 on C-", {"max_eig": w_lo})])


# -------------
# Block recovery and construction
# -------------

def _as_polynomial(M, what, tol):
    if M.is_polynomial():
        return M
    if not M.exact:
        rows, worst = [], 0.0
        scale = max(1.0, float(np.abs(M.den.float_coeffs()).max()))
        for r in M.num:
            row = []
            for p in r:
                q, rem = p.divmod(M.den)
                worst = max(worst, float(np.abs(rem.float_coeffs()).max(initial=0)))
                row.append(q)
            rows.append(row)
        if worst <= 1e-7 * scale:
            return RatMat(rows, Poly.const(1.0, exact=False))
    raise RationalError(f"{what} is not polynomial (S is not associated / Phi "
                        f"inconsistent); offending denominator {M.den!r}")


def recover_blocks(pair, S, Phi, tol=TOL):
    """Lower blocks (a~21, a~22) from the two linear relations

    a~22 - i a~21 = S Phi S^{-1} E+ and a~22 + i a~21 = S Phi# S^{-1} E-.
    """
    Ep, Em, S = _pair_mats(pair, S)
    Ep, Em, S, Phi = _align(Ep, Em, S, Phi)
    if S.det().is_zero():
        raise RationalError("det S is identically zero")
    i, h = _i(Phi), _half(Phi)
    Sinv = S.inverse()
    X1 = S @ Phi @ Sinv @ Ep
    X2 = S @ Phi.sharp() @ Sinv @ Em
    t22 = _as_polynomial((X1 + X2) * h, "a~22", tol)
    t21 = _as_polynomial((X2 - X1) * (h * (-i)), "a~21", tol)
    # cross-check against the intermediate Phi +- Phi# forms
    t11 = (Ep + Em) * h
    t12 = (Ep - Em) * (h * (-i))
    Re = (Phi + Phi.sharp()) * h
    Im = (Phi - Phi.sharp()) * (h * (-i))
    c22 = S @ Re @ Sinv @ t11 - S @ Im @ Sinv @ t12
    c21 = -(S @ Re @ Sinv @ t12) - S @ Im @ Sinv @ t11
    for got, want, name in ((t22, c22, "a~22"), (t21, c21, "a~21")):
        ok, res = _same(got, want, 1e-7)
        if not ok:
            raise InternalInvariantError(f"{name} disagrees with its Phi +- Phi# form "
                                         f"(residual {res:.3g})")
    return t21, t22


def _assemble(Ep, Em, S, t21, t22):
    h = _half(Ep)
    i = _i(Ep)
    t11 = (Ep + Em) * h
    t12 = (Ep - Em) * (h * (-i))
    Sinv = S.inverse()
    return RatMat.block([[Sinv @ t11, Sinv @ t12], [Sinv @ t21, Sinv @ t22]])


def _param_mat(X, n):
    """A scalar stands for X times the n x n identity."""
    if isinstance(X, (int, Fraction, GaussianRational)):
        return RatMat.eye(n) * as_gr(X)
    if isinstance(X, (float, complex)):
        return RatMat.eye(n, exact=False) * complex(X)
    return const_mat(X)


def construct_db(pair, S, P, Q, grid=DEFAULT_GRID, tol=TOL):
    """The de Branges matrix with data (pair, S, P, Q).

    Raises ``RationalError`` or ``ValueError`` on a failed precondition and
    ``InternalInvariantError`` when a postcondition fails.
    """
    if pair.verdict is None:
        v = pair_validate(pair.E_minus, pair.E_plus, grid, tol)
        if not v.member:
            raise ValueError(f"invalid de Branges pair: {', '.join(v.failures())}")
        pair.verdict = v
    va = assoc_check(pair, S)
    if not va.member:
        raise RationalError(f"S is not associated with the pair: {', '.join(va.failures())}")
    Ep, Em, S = _pair_mats(pair, S)
    P, Q = _param_mat(P, pair.n), _param_mat(Q, pair.n)
    Delta = density_of(pair, S)
    if not Delta.exact:
        P, Q = P.to_float(), Q.to_float()
    params = HerglotzParams(P, Q, Delta)
    bad = [b for b in params.check() if not b.startswith("density")]
    if bad:
        raise ValueError("; ".join(bad))
    real = [r for r, _, reg in pole_regions(Delta) if reg == "real"]
    if real:
        raise RationalError(f"density has a real pole at {complex(real[0]).real:.6g}")
    hint = Ep.det().num
    Phi = herglotz_rational(params, hint=hint)
    t21, t22 = recover_blocks(pair, S, Phi, tol)
    Ep, Em, S, t21, t22 = _align(Ep, Em, S, t21, t22)
    A = _assemble(Ep, Em, S, t21, t22)
    n = pair.n
    dbm = db_check(A, n, tol)
    if not isinstance(dbm, DBMatrix):
        raise InternalInvariantError("constructed matrix fails db_check: "
                                     + ", ".join(dbm.failures()))
    ok, res = _same(phi_of(A, n, tol=tol), Phi, tol)
    if not ok:
        raise InternalInvariantError(f"phi_of(A) != Phi (residual {res:.3g})")
    return dbm


# -------------
# Potapov-Ginzburg blocks
# -------------

@dataclass
class CayleyData:
    """c(z) = (Phi - I)(Phi + I)^{-1} with its sup-norm over the C+ grid."""

    c: RatMat
    max_norm: float

    @classmethod
    def from_phi(cls, Phi, grid=DEFAULT_GRID):
        n = Phi.rows
        I = RatMat.eye(n, exact=Phi.exact)
        c = (Phi - I) @ (Phi + I).inverse()
        cf = c.to_float()
        pts = away_from(grid.upper(), _poles_of(cf))
        norm = max((float(np.linalg.norm(np.asarray(cf.eval(z), complex), 2)) for z in pts),
                   default=0.0)
        return cls(c, norm)

    def holds(self, tol=TOL):
        return self.max_norm <= 1 + tol


def verify_pg_blocks(A, n, grid=DEFAULT_GRID, tol=TOL):
    """j-unitarity identities of W = M* A M, Cayley bound and PG(W) blocks."""
    W = to_w_basis(A, n)
    w11, w12, w21, w22 = W.blocks(n)
    kids = []
    if w22.det().is_zero():
        return Verdict(False, "PG blocks", {"error": "det w22 identically 0"})
    kids.append(Verdict(True, "det w22 nonzero"))
    I = RatMat.eye(n, exact=W.exact)
    O = RatMat.zeros(n, n, exact=W.exact)
    s = lambda M: M.sharp()
    identities = [
        ("w11 w11# - w12 w12# = I", w11 @ s(w11) - w12 @ s(w12), I),
        ("w11 w21# - w12 w22# = 0", w11 @ s(w21) - w12 @ s(w22), O),
        ("w21 w21# - w22 w22# = -I", w21 @ s(w21) - w22 @ s(w22), -I),
        ("w11# w11 - w21# w21 = I", s(w11) @ w11 - s(w21) @ w21, I),
        ("w11# w12 - w21# w22 = 0", s(w11) @ w12 - s(w21) @ w22, O),
        ("w12# w12 - w22# w22 = -I", s(w12) @ w12 - s(w22) @ w22, -I),
    ]
    for name, lhs, rhs in identities:
        ok, res = _same(lhs, rhs, tol)
        kids.append(Verdict(ok, name, {"residual": res}))
    try:
        cay = CayleyData.from_phi(phi_blocks(A, n), grid)
        kids.append(Verdict(cay.holds(tol), "||c(z)|| <= 1 on C+",
                            {"max_norm": cay.max_norm}))
    except (RationalError, SingularMatrixError) as err:
        kids.append(Verdict(False, "||c(z)|| <= 1 on C+", {"error": str(err)}))
    w22i = w22.inverse()
    pg = RatMat.block([[w11 - w12 @ w22i @ w21, w12 @ w22i], [-(w22i @ w21), w22i]])
    j = make_signature(n).j
    ok, res = _same(pg, pg_transform(W, j if W.exact else j.to_float()), tol)
    kids.append(Verdict(ok, "PG(W) block formula", {"residual": res}))
    for name, blk in zip(("11", "12", "21", "22"), pg.blocks(n)):
        v = in_smirnov(blk)
        v.name = f"PG(W) block {name} Smirnov"
        kids.append(v)
    v = in_inner(pg, tol)
    v.name = "PG(W) inner"
    kids.append(v)
    return Verdict.all_of("PG blocks", kids)


# -------------
# Uniqueness
# -------------

def uniqueness_check(A, B, n, tol=TOL):
    """(L, Verdict) with B = [[I, 0], [L, I]] A and L = L0 + z L1.

    L is compared with (Q_A - Q_B) + z (P_B - P_A) from the Herglotz data
    of both Phi functions.
    """
    A, B = _align(A, B)
    a11, a12, a21, a22 = A.blocks(n)
    b11, b12, b21, b22 = B.blocks(n)
    i = _i(A)
    name = "uniqueness relation"
    try:
        L = ((b21 - a21) + (b22 - a22) * i) @ (a11 + a12 * i).inverse()
    except SingularMatrixError:
        return None, Verdict(False, name, {"error": "a11 + i a12 identically singular"})
    I = RatMat.eye(n, exact=A.exact)
    O = RatMat.zeros(n, n, exact=A.exact)
    ok, res = _same(RatMat.block([[I, O], [L, I]]) @ A, B, tol)
    if not ok:
        return None, Verdict(False, name, {"error": "no such L", "residual": res})
    kids = [Verdict(True, "B = [[I,0],[L,I]] A", {"residual": res})]
    try:
        L = _as_polynomial(L, "L", tol)
    except RationalError as err:
        return None, Verdict(False, name, {"error": str(err)}, kids)
    if L.max_degree() > 1:
        kids.append(Verdict(False, "L linear", {"degree": L.max_degree()}))
        return L, Verdict.all_of(name, kids)
    kids.append(Verdict(True, "L linear", {"degree": max(L.max_degree(), 0)}))
    L0 = RatMat.const([[p.coeff(0) for p in r] for r in L.num], exact=L.exact)
    L1 = RatMat.const([[p.coeff(1) for p in r] for r in L.num], exact=L.exact)
    for nm, C in (("L0 Hermitian", L0), ("L1 Hermitian", L1)):
        ok, res = _same(C, C.sharp(), tol)
        kids.append(Verdict(ok, nm, {"residual": res}))
    try:
        pa = extract_PQ(phi_of(A, n, tol=tol), tol=tol)
        pb = extract_PQ(phi_of(B, n, tol=tol), tol=tol)
    except RationalError as err:
        kids.append(Verdict(False, "L = (Q_A - Q_B) + z (P_B - P_A)", {"error": str(err)}))
        return L, Verdict.all_of(name, kids)
    zI = RatMat.eye(n, exact=L.exact) * (Z if L.exact else Z.to_float())
    want = (pa.Q - pb.Q) + zI @ (pb.P - pa.P)
    ok, res = _same(*_align(L, want), tol)
    kids.append(Verdict(ok, "L = (Q_A - Q_B) + z (P_B - P_A)", {"residual": res}))
    return L, Verdict.all_of(name, kids)
