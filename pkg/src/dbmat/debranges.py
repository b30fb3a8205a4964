"""
De Branges pairs, kernels, spaces, associated functions and de Branges
matrices built from rational matrix functions.

Entire rational functions are polynomials, so a pair ``(E_minus, E_plus)``
holds polynomial matrices.  Boundary identities are exact rational
identities; space inner products are exact residue sums over the upper
half plane (times ``2 pi i``).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classes import (TOL, _as_const, _identity_residual, in_caratheodory, in_hardy2,
                      in_hardy2_perp, in_inner, in_PJ, in_schur, in_UJ, make_signature,
                      pole_regions)
from .grids import DEFAULT_GRID, away_from
from .herglotz import split_den
from .ratmat import (I_UNIT, GaussianRational, Poly, RatMat, RatScalar, RationalError,
                     SingularMatrixError, Z, _is_exact_number, as_gr, residue_sum)
from .regions import real_root_count, root_regions
from .series import rat_series
from .verdict import Verdict

__all__ = ["DeBrangesPair", "DBMatrix", "K0Operator", "K0Error", "Sqrt2Scaled",
           "InternalInvariantError", "pair_validate", "kernel_eval", "kernel_function",
           "gram_psd", "space_membership", "inner_product", "inner_product_coeff",
           "inner_product_quad",
           "assoc_check", "rs_apply", "to_u_basis", "to_w_basis", "phi_blocks",
           "lemma51_check", "db_check", "db_decompose", "char_fn"]

_HALF = GaussianRational(Fraction(1, 2))


class InternalInvariantError(RuntimeError):
    """An identity that must hold by construction failed."""


def _i(M):
    return I_UNIT if M.exact else 1j


def _half(M):
    return _HALF if M.exact else 0.5


# -------------
# Pairs
# -------------

def _require_poly(M, what):
    if not isinstance(M, RatMat):
        raise TypeError(f"{what} must be a RatMat")
    if not M.is_polynomial():
        raise RationalError(f"non-polynomial entries in {what}")


class DeBrangesPair:
    """Validated polynomial pair (E_minus, E_plus)."""

    def __init__(self, E_minus, E_plus, validate=True, grid=DEFAULT_GRID):
        _require_poly(E_minus, "E_minus")
        _require_poly(E_plus, "E_plus")
        if E_minus.shape != E_plus.shape or not E_plus.is_square():
            raise RationalError("E_minus and E_plus must be square of one size")
        if not (E_minus.exact and E_plus.exact):
            E_minus, E_plus = E_minus.to_float(), E_plus.to_float()
        self.E_minus = E_minus
        self.E_plus = E_plus
        self.verdict = None
        if validate:
            v = pair_validate(E_minus, E_plus, grid)
            if not v.member:
                raise ValueError(f"invalid de Branges pair: {', '.join(v.failures())}")
            self.verdict = v
        self._f = None

    @property
    def n(self):
        return self.E_plus.rows

    @property
    def exact(self):
        return self.E_plus.exact

    @property
    def degenerate(self):
        chi = self.E_plus.inverse() @ self.E_minus
        return chi.is_polynomial() and chi.max_degree() <= 0

    def floats(self):
        if self._f is None:
            Ep, Em = self.E_plus.to_float(), self.E_minus.to_float()
            self._f = (Ep, Em, Ep.derivative(), Em.derivative())
        return self._f

    def __eq__(self, o):
        return (isinstance(o, DeBrangesPair) and self.E_plus == o.E_plus
                and self.E_minus == o.E_minus)

    __hash__ = None

    def to_dict(self):
        return {"E_minus": self.E_minus, "E_plus": self.E_plus}

    def __repr__(self):
        return f"DeBrangesPair(E_minus={self.E_minus!r}, E_plus={self.E_plus!r})"


def _sample_psd(F, pts, tol):
    """min eigenvalue of Hermitian F(z) over pts (F returns arrays)."""
    worst, where = np.inf, None
    for z in pts:
        v = F(z)
        w = float(np.linalg.eigvalsh((v + v.conj().T) / 2).min())
        if w < worst:
            worst, where = w, z
    return worst, where


def pair_validate(E_minus, E_plus, grid=DEFAULT_GRID, tol=TOL):
    """Conditions for (E_minus, E_plus) to generate a de Branges space."""
    _require_poly(E_minus, "E_minus")
    _require_poly(E_plus, "E_plus")
    if E_minus.shape != E_plus.shape or not E_plus.is_square():
        raise RationalError("E_minus and E_plus must be square of one size")
    Em, Ep = E_minus, E_plus
    if not (Em.exact and Ep.exact):
        Em, Ep = Em.to_float(), Ep.to_float()
    d = Ep.det()
    if d.is_zero():
        return Verdict(False, "de Branges pair",
                       children=[Verdict(False, "det E+ nonzero", {"det": "identically 0"})])
    kids = [Verdict(True, "det E+ nonzero")]
    chi = Ep.inverse() @ Em
    v = in_inner(chi, tol)
    v.name = "E+^-1 E- inner"
    kids.append(v)
    lhs, rhs = Ep @ Ep.sharp(), Em @ Em.sharp()
    res = _identity_residual(lhs, rhs)
    ok = res == 0.0 if lhs.exact else res <= tol
    kids.append(Verdict(ok, "E+E+# = E-E-#", {"residual": res}))
    Epf, Emf = Ep.to_float(), Em.to_float()

    def gap(z):
        a, b = Epf.eval(z), Emf.eval(z)
        return a @ a.conj().T - b @ b.conj().T
    w, where = _sample_psd(gap, grid.upper(), tol)
    scale = max(1.0, max(float(np.abs(Epf.eval(z)).max()) ** 2 for z in grid.upper()))
    kids.append(Verdict(w >= -tol * scale, "E+E+* - E-E-* >= 0 on C+",
                        {"min_eig": w, "point": where}))
    out = Verdict.all_of("de Branges pair", kids)
    if out.member and chi.is_polynomial() and chi.max_degree() <= 0:
        out.flags.append("degenerate: kernel identically zero")
    return out


# -------------
# Kernel
# -------------

def kernel_eval(pair, w, z):
    """K_w(z) as a complex n x n array."""
    w, z = complex(w), complex(z)
    Ep, Em, dEp, dEm = pair.floats()
    wc = w.conjugate()
    Epw = Ep.eval(w).conj().T
    Emw = Em.eval(w).conj().T
    if abs(z - wc) < 1e-12:
        num = dEp.eval(wc) @ Epw - dEm.eval(wc) @ Emw
        return num / (-2j * np.pi)
    num = Ep.eval(z) @ Epw - Em.eval(z) @ Emw
    return num / (-2j * np.pi * (z - wc))


def kernel_function(pair, w, scaled=False):
    """z -> K_w(z) as a polynomial RatMat (float, because of the 1/pi).

    With ``scaled=True`` the function pi K_w is returned instead; it is
    exact whenever the pair and w are.
    """
    exact = pair.exact and _is_exact_number(w)
    if exact:
        w = as_gr(w)
        wc = w.conjugate()
        Ep, Em = pair.E_plus, pair.E_minus
        Epw = RatMat.const(Ep.eval(w)).sharp()
        Emw = RatMat.const(Em.eval(w)).sharp()
        lin = Poly([-wc, 1])
    else:
        w = complex(w)
        wc = w.conjugate()
        Ep, Em = pair.E_plus.to_float(), pair.E_minus.to_float()
        Epw = RatMat.const(Ep.eval(w).conj().T, exact=False)
        Emw = RatMat.const(Em.eval(w).conj().T, exact=False)
        lin = Poly.from_array([-wc, 1.0])
    N = Ep @ Epw - Em @ Emw
    rows = []
    for row in N.num:
        out = []
        for p in row:
            q, r = p.divmod(lin)
            if exact and not r.is_zero():
                raise InternalInvariantError("kernel numerator does not vanish at conj(w)")
            out.append(q)
        rows.append(out)
    K = RatMat(rows, N.den) if exact else RatMat(rows, N.den.to_float())
    if scaled:
        # 1/(-2i) = i/2
        return K * (GaussianRational(0, Fraction(1, 2)) if exact else 0.5j)
    return K.to_float() * (1 / (-2j * np.pi))


def gram_psd(pair, points, vectors, tol=TOL):
    """G[i][j] = v_i* K_{w_j}(w_i) v_j is Hermitian and PSD."""
    if len(points) != len(vectors):
        raise ValueError("points and vectors must have equal length")
    k = len(points)
    G = np.zeros((k, k), complex)
    vs = [np.asarray(v, complex).ravel() for v in vectors]
    for i in range(k):
        for j in range(k):
            G[i, j] = vs[i].conj() @ kernel_eval(pair, points[j], points[i]) @ vs[j]
    scale = max(1.0, float(np.abs(G).max(initial=0)))
    herm = float(np.abs(G - G.conj().T).max(initial=0))
    w = float(np.linalg.eigvalsh((G + G.conj().T) / 2).min()) if k else 0.0
    kids = [Verdict(herm <= 1e-10 * scale, "Hermitian", {"asymmetry": herm}),
            Verdict(w >= -tol * scale, "PSD", {"min_eig": w})]
    return Verdict.all_of("Gram PSD", kids, min_eig=w)


# -------------
# Space
# -------------

def _as_column(f, n, exact):
    if isinstance(f, RatMat):
        if f.shape != (n, 1):
            raise RationalError(f"vector must be {n}x1, got {f.shape}")
        return f
    if isinstance(f, (list, tuple)):
        return RatMat.from_entries([[x] for x in f])
    raise TypeError("f must be an n x 1 RatMat or a list of polynomials")


def space_membership(pair, f):
    """E+^{-1} f in H2 and E-^{-1} f in (H2)^perp."""
    f = _as_column(f, pair.n, pair.exact)
    _require_poly(f, "f")
    Ep, Em = pair.E_plus, pair.E_minus
    if not f.exact:
        Ep, Em = Ep.to_float(), Em.to_float()
    v1 = in_hardy2(Ep.inverse() @ f, name="E+^-1 f in H2")
    try:
        v2 = in_hardy2_perp(Em.inverse() @ f)
    except SingularMatrixError:
        v2 = Verdict(False, "E-^-1 f in H2_perp", {"error": "E- singular"})
    v2.name = "E-^-1 f in H2_perp"
    return Verdict.all_of("space membership", [v1, v2])


def _integrand(pair, f, g):
    f = _as_column(f, pair.n, pair.exact)
    g = _as_column(g, pair.n, pair.exact)
    Ep = pair.E_plus
    X = (Ep @ Ep.sharp()).inverse()
    if not (f.exact and g.exact and X.exact):
        f, g = f.to_float(), g.to_float()
        h = g.sharp() @ X.to_float() @ f
    else:
        h = g.sharp() @ X @ f
    return h, X


def _check_decay(h):
    e = h.entries()[0][0]
    if not e.is_zero() and e.num.degree > e.den.degree - 2:
        raise RationalError("integrand is not o(1/x): inner-product precondition fails")
    return e


def inner_product_coeff(pair, f, g):
    """Exact c with <f, g> = pi * c, when all data are exact; else None."""
    h, X = _integrand(pair, f, g)
    e = _check_decay(h)
    if not h.exact or e.is_zero():
        return None if not h.exact else GaussianRational(0)
    lo, up = split_den(e.den, hint=pair.E_plus.det().num)
    if not (lo.exact and up.exact):
        return None
    s = residue_sum(e.num, up, lo)
    return s * GaussianRational(0, 2)


def inner_product(pair, f, g):
    """<f, g> = int g(x)* (E+(x)E+(x)*)^{-1} f(x) dx by residues in C+."""
    c = inner_product_coeff(pair, f, g)
    if c is not None:
        return complex(c) * np.pi
    h, X = _integrand(pair, f, g)
    e = _check_decay(h)
    if e.is_zero():
        return 0j
    hf = h.to_float()
    total = 0j
    for r, m, reg in root_regions(X.den):
        if reg == "real":
            raise RationalError(f"real pole at {r.real:g} in the inner-product weight")
        if reg == "upper":
            total += rat_series(hf, r, m + 2).coeff(-1)[0, 0]
    return complex(2j * np.pi * total)


def inner_product_quad(pair, f, g, R=np.inf):
    """Adaptive quadrature oracle for :func:`inner_product`."""
    from scipy.integrate import quad
    h, _ = _integrand(pair, f, g)
    hf = h.to_float()

    def part(x, k):
        v = complex(hf.eval(complex(x))[0, 0])
        return v.real if k == 0 else v.imag
    lo, hi = (-R, R) if np.isfinite(R) else (-np.inf, np.inf)
    re = quad(part, lo, hi, args=(0,), limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    im = quad(part, lo, hi, args=(1,), limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    return complex(re, im)


# -------------
# Associated functions
# -------------

def assoc_check(pair, S):
    """E+^{-1}S / rho_i in H2 and E-^{-1}S / rho_{-i} in (H2)^perp.

    rho_i(z) = -2 pi i (z + i) and rho_{-i}(z) = -2 pi i (z - i); the
    nonzero constant -2 pi i does not affect membership and is dropped
    so the test stays exact.
    """
    _require_poly(S, "S")
    if S.shape != pair.E_plus.shape:
        raise RationalError("S must have the size of E+")
    if S.det().is_zero():
        raise RationalError("det S is identically zero")
    Ep, Em = pair.E_plus, pair.E_minus
    exact = S.exact and Ep.exact
    if not exact:
        Ep, Em, S = Ep.to_float(), Em.to_float(), S.to_float()
    zp = Poly([I_UNIT, 1]) if exact else Poly.from_array([1j, 1.0])
    zm = Poly([-I_UNIT, 1]) if exact else Poly.from_array([-1j, 1.0])
    A = Ep.inverse() @ S
    B = Em.inverse() @ S
    A = RatMat(A.num, A.den * zp)
    B = RatMat(B.num, B.den * zm)
    v1 = in_hardy2(A, name="E+^-1 S / rho_i in H2")
    v2 = in_hardy2_perp(B)
    v2.name = "E-^-1 S / rho_-i in H2_perp"
    return Verdict.all_of("associated function", [v1, v2])


def rs_apply(pair, S, w, f):
    """(f(z) - S(z) S(w)^{-1} f(w)) / (z - w) and its space membership."""
    f = _as_column(f, pair.n, pair.exact)
    _require_poly(f, "f")
    _require_poly(S, "S")
    exact = f.exact and S.exact and _is_exact_number(w)
    if exact:
        w = as_gr(w)
        Sw = RatMat.const(S.eval(w))
        fw = RatMat.const(f.eval(w))
        lin = Poly([-w, 1])
    else:
        f, S = f.to_float(), S.to_float()
        w = complex(w)
        Sw = RatMat.const(S.eval(w), exact=False)
        fw = RatMat.const(f.eval(w), exact=False)
        lin = Poly.from_array([-w, 1.0])
    if Sw.det().is_zero() or (not exact and abs(np.linalg.det(
            np.asarray(Sw.eval(0), complex))) < 1e-14):
        raise RationalError(f"det S(w) = 0 at w = {complex(w)}")
    N = f - S @ (Sw.inverse() @ fw)
    scale = max([float(np.abs(p.to_float().float_coeffs()).max(initial=0))
                 for r in N.num for p in r] + [1.0])
    rows = []
    for r in N.num:
        q, rem = r[0].divmod(lin)
        bad = (not rem.is_zero()) if exact else (
            not rem.is_zero() and float(np.abs(rem.float_coeffs()).max()) > 1e-9 * scale)
        if bad:
            raise InternalInvariantError("R_S(w) numerator does not vanish at w")
        rows.append([q])
    out = RatMat(rows, N.den)
    v = space_membership(pair, out)
    v.name = "R_S(w) f in space"
    return out, v


# -------------
# Bases and de Branges matrices
# -------------

@dataclass
class Sqrt2Scaled:
    """The matrix ``mat / sqrt(2)**k`` with ``mat`` kept exact."""

    mat: RatMat
    k: int = 1

    def to_float(self):
        return self.mat.to_float() * (2.0 ** (-self.k / 2))

    def blocks(self, n):
        return tuple(Sqrt2Scaled(b, self.k) for b in self.mat.blocks(n))

    def __eq__(self, o):
        return isinstance(o, Sqrt2Scaled) and self.k == o.k and self.mat == o.mat


def to_u_basis(A, n):
    """U = A M, returned as (A M_scaled) / sqrt(2)."""
    if A.shape != (2 * n, 2 * n):
        raise RationalError(f"size mismatch: expected {2 * n}x{2 * n}, got {A.shape}")
    Ms = make_signature(n).M_scaled
    return Sqrt2Scaled(A @ (Ms if A.exact else Ms.to_float()), 1)


def to_w_basis(A, n):
    """W = M* A M = (M_scaled* A M_scaled) / 2 (exact)."""
    if A.shape != (2 * n, 2 * n):
        raise RationalError(f"size mismatch: expected {2 * n}x{2 * n}, got {A.shape}")
    Ms = make_signature(n).M_scaled
    if not A.exact:
        Ms = Ms.to_float()
    return (Ms.sharp() @ A @ Ms) * _half(A)


def phi_blocks(A, n):
    """Phi = (a22 - i a21)(a11 + i a12)^{-1}."""
    a11, a12, a21, a22 = A.blocks(n)
    i = _i(A)
    try:
        return (a22 - a21 * i) @ (a11 + a12 * i).inverse()
    except SingularMatrixError as err:
        raise RationalError("identically singular corner a11 + i a12") from err


def _phi_u(A, n):
    U = to_u_basis(A, n).mat
    u11, u12, u21, u22 = U.blocks(n)
    return (u22 @ u12.inverse()) * (-_i(A))


@dataclass
class DBMatrix:
    A: RatMat
    n: int
    certificates: Verdict
    Phi: RatMat

    def __bool__(self):
        return True

    @property
    def member(self):
        return True

    def to_dict(self):
        return {"n": self.n, "A": self.A, "Phi": self.Phi,
                "certificates": self.certificates.to_dict()}


def db_check(A, n, tol=TOL, uj=None):
    """DBMatrix when A is J-inner and Phi has no real poles, else a Verdict.

    ``uj`` may carry an already computed U(J) verdict for A.
    """
    A = _square(A, n)
    sig = make_signature(n)
    if uj is None:
        uj = in_UJ(A, sig.Jscr, tol)
    try:
        Phi = phi_blocks(A, n)
    except RationalError as err:
        return Verdict(False, "de Branges matrix", {"error": str(err)}, [uj])
    Phi_u = _phi_u(A, n)
    res = _identity_residual(Phi, Phi_u)
    ok = res == 0.0 if (Phi.exact and Phi_u.exact) else res <= tol
    same = Verdict(ok, "Phi block forms agree", {"residual": res})
    real = [r for r, m, reg in pole_regions(Phi) if reg == "real"]
    hol = Verdict(not real, "Phi holomorphic on R",
                  {"real_poles": [complex(r).real for r in real]} if real else {})
    v = Verdict.all_of("de Branges matrix", [uj, same, hol])
    if not v.member:
        return v
    return DBMatrix(A, n, v, Phi)


def _square(A, n):
    if not isinstance(A, RatMat):
        raise TypeError("A must be a RatMat")
    if A.shape != (2 * n, 2 * n):
        raise RationalError(f"size mismatch: expected {2 * n}x{2 * n}, got {A.shape}")
    return A


def lemma51_check(A, n, grid=DEFAULT_GRID, tol=TOL, uj=None):
    """The six implications for J-contractive / J-inner A (Jscr signature).

    ``uj`` may carry an already computed U(J) verdict for A.
    """
    A = _square(A, n)
    sig = make_signature(n)
    pre_p = in_PJ(A, sig.Jscr, grid, tol)
    pre_p.name = "pre: A in P(J)"
    pre_u = copy.copy(uj) if uj is not None else in_UJ(A, sig.Jscr, tol)
    pre_u.name = "pre: A in U(J)"
    U = to_u_basis(A, n).mat
    us11, us12, us21, us22 = U.blocks(n)
    i = _i(A)
    items = []
    # (1) U* Jscr U <= j on the C+ grid (U = Us / sqrt 2)
    Uf = U.to_float()
    Jf = np.asarray(sig.Jscr.to_float().eval(0))
    jf = np.asarray(sig.j.to_float().eval(0))
    pts = away_from(grid.upper(), [r for r, _ in Uf.poles()] if Uf.den.degree > 0 else [])
    w, where = _sample_psd(lambda z: jf - (Uf.eval(z).conj().T @ Jf @ Uf.eval(z)) / 2,
                           pts, tol)
    items.append(Verdict(w >= -tol, "(1) U*JU <= j on C+", {"min_eig": w, "point": where}))
    # (2) u12 invertible in C+ away from poles of A
    d = us12.det()
    if d.is_zero():
        items.append(Verdict(False, "(2) u12 invertible on C+", {"det": "identically 0"}))
    else:
        poles = [r for r, _ in A.poles()] if A.den.degree > 0 else []
        bad = [r for r, m, reg in (root_regions(d.num) if d.num.degree > 0 else [])
               if reg == "upper" and all(abs(r - p) > 1e-7 * max(1, abs(p)) for p in poles)]
        items.append(Verdict(not bad, "(2) u12 invertible on C+",
                             {"zero": bad[0]} if bad else {}))
    if d.is_zero():
        skip = {"error": "u12 singular"}
        for name in ("(3) Phi Caratheodory", "(3) chi = u12^-1 u11 Schur",
                     "(4) u12^-1 / rho_i in H2"):
            items.append(Verdict(False, name, skip))
    else:
        u12inv = us12.inverse()
        Phi = (us22 @ u12inv) * (-i)
        vc, _ = in_caratheodory(Phi, tol)
        vc.name = "(3) Phi Caratheodory"
        items.append(vc)
        vs = in_schur(u12inv @ us11, grid, tol)
        vs.name = "(3) chi = u12^-1 u11 Schur"
        items.append(vs)
        zp = Poly([I_UNIT, 1]) if A.exact else Poly.from_array([1j, 1.0])
        items.append(in_hardy2(RatMat(u12inv.num, u12inv.den * zp),
                               name="(4) u12^-1 / rho_i in H2"))
    # (5) and (6)
    try:
        u11s_inv = us11.sharp().inverse()
    except SingularMatrixError:
        skip = {"error": "u11 singular"}
        items.append(Verdict(False, "(5) chi = u12# (u11#)^-1 inner", skip))
        items.append(Verdict(False, "(6) -i (u11#)^-1 / rho_i in H2", skip))
    else:
        vi = in_inner(us12.sharp() @ u11s_inv, tol)
        vi.name = "(5) chi = u12# (u11#)^-1 inner"
        items.append(vi)
        zp = Poly([I_UNIT, 1]) if A.exact else Poly.from_array([1j, 1.0])
        X = u11s_inv * (-i)
        items.append(in_hardy2(RatMat(X.num, X.den * zp),
                               name="(6) -i (u11#)^-1 / rho_i in H2"))
    return Verdict.all_of("Lemma items", [pre_p, pre_u] + items)


def _blocks_lcm(A):
    return A.den


def db_decompose(dbm, method="lcm"):
    """(S, blocks a~ = S a, pair) for a certified de Branges matrix.

    ``method="lcm"`` takes S = d(z) I with d the common denominator of A;
    this keeps every block exact.  ``method="cofactor"`` runs the
    simultaneous pole-removal factorization on the four blocks (float).
    """
    if not isinstance(dbm, DBMatrix):
        raise TypeError("db_decompose needs a certified DBMatrix (see db_check)")
    A, n = dbm.A, dbm.n
    blocks = A.blocks(n)
    if method == "lcm":
        d = _blocks_lcm(A)
        S = RatMat.diag([RatScalar(d)] * n) if A.exact else \
            RatMat.diag([RatScalar(d.to_float())] * n)
        tilde = [S @ b for b in blocks]
    elif method == "cofactor":
        from .factorization import FactorizationError, cofactorize
        try:
            product, forms = cofactorize([b.to_float() for b in blocks])
        except FactorizationError as err:
            if "origin" in str(err) or " 0" in str(err):
                raise RationalError(f"{err}; apply a Moebius shift z -> z - c first") from err
            raise
        S = product.rational_part()
        tilde = [f.rational for f in forms]
    else:
        raise ValueError("method must be 'lcm' or 'cofactor'")
    t11, t12, t21, t22 = tilde
    i = _i(t11)
    Ep = t11 + t12 * i
    Em = t11 - t12 * i
    pair = DeBrangesPair(Em, Ep, validate=False)
    kids = []
    v = pair_validate(Em, Ep)
    kids.append(v)
    if v.member:
        pair.verdict = v
    kids.append(assoc_check(pair, S))
    # E+ = i sqrt2 S u12 on 10 samples
    U = to_u_basis(A.to_float(), n).to_float()
    u12 = U.blocks(n)[1]
    Sf, Epf = S.to_float(), Ep.to_float()
    pts = away_from(np.array([complex(0.37 * k - 1.3, 0.21 * k + 0.4) for k in range(10)]),
                    [r for r, _ in A.to_float().poles()] if A.den.degree > 0 else [])
    err = max(float(np.abs(Epf.eval(z) - 1j * np.sqrt(2) * Sf.eval(z) @ u12.eval(z)).max())
              / max(1.0, float(np.abs(Epf.eval(z)).max())) for z in pts)
    kids.append(Verdict(err <= 1e-9, "E+ = i sqrt2 S u12", {"max_rel_error": err}))
    verdict = Verdict.all_of("de Branges decomposition", kids)
    return S, tuple(tilde), pair, verdict


# -------------
# Characteristic functions of K0 operators
# -------------

class K0Error(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


def _exact_grid(X):
    if X is None:
        return None
    if isinstance(X, np.ndarray):
        return None
    rows = [list(r) for r in X]
    if all(_is_exact_number(x) for r in rows for x in r):
        return [[as_gr(x) for x in r] for r in rows]
    return None


@dataclass
class K0Operator:
    T: np.ndarray
    U: np.ndarray
    T_exact: list = None
    U_exact: list = None
    convention: str = "u_t* R u_r"
    db: object = field(default=None, repr=False, compare=False)

    @classmethod
    def from_data(cls, T, U=None):
        Te, Ue = _exact_grid(T), _exact_grid(U)
        Tf = np.array([[complex(x) for x in r] for r in T], dtype=complex)
        Uf = None if U is None else np.array([[complex(x) for x in r] for r in U], complex)
        return cls(Tf, Uf, Te, Ue)

    @property
    def N(self):
        return self.T.shape[0]

    @property
    def m(self):
        return self.U.shape[1]

    @property
    def n(self):
        return self.m // 2

    def to_dict(self):
        return {"T": self.T, "U": self.U, "convention": self.convention}


def _check_k0(op, tol=1e-10):
    T = op.T
    N = T.shape[0]
    if T.shape != (N, N):
        raise K0Error("T must be square", {"shape": list(T.shape)})
    H = (T - T.conj().T) / 1j
    ev = np.linalg.eigvalsh((H + H.conj().T) / 2)
    sc = max(1.0, float(np.abs(ev).max(initial=0)))
    pos = int(np.sum(ev > 1e-9 * sc))
    neg = int(np.sum(ev < -1e-9 * sc))
    rank = pos + neg
    if rank == 0 or rank % 2:
        raise K0Error(f"rank of (T - T*)/i is {rank}; need an even positive rank",
                      {"rank": rank})
    if pos != neg:
        raise K0Error("signature of (T - T*)/i is not balanced (non-dissipative "
                      "with n positive and n negative eigenvalues required)",
                      {"positive": pos, "negative": neg})
    if op.T_exact is not None:
        cp = RatMat.const(op.T_exact)
        charp = (RatMat.eye(N) * RatScalar(Z) - cp).det().num
        if real_root_count(charp) > 0:
            lam = [complex(x) for x, _, reg in root_regions(charp) if reg == "real"]
            raise K0Error("T has a real eigenvalue", {"eigenvalue": lam[0]})
    else:
        lam = np.linalg.eigvals(T)
        tscale = max(1.0, float(np.abs(lam).max()))
        real = [l for l in lam if abs(l.imag) <= 1e-9 * tscale]
        if real:
            raise K0Error("T has a real eigenvalue", {"eigenvalue": complex(real[0])})
    return H, rank // 2, ev


def _default_U(H, n):
    """U with U Jscr U* = H from an eigendecomposition of H."""
    w, V = np.linalg.eigh((H + H.conj().T) / 2)
    order = np.argsort(-w)
    pos = order[:n]
    neg = order[::-1][:n]
    X = np.hstack([V[:, pos] * np.sqrt(w[pos]), V[:, neg] * np.sqrt(-w[neg])])
    Mf = np.asarray(make_signature(n).M.eval(0))
    return X @ Mf.conj().T


def _gram_W(R, Um, n, transpose, exact):
    """W = I + i z Gamma Jscr with Gamma[r][t] = u_t* R u_r (or transposed)."""
    G = Um.sharp() @ R @ Um  # G[r][t] = u_r* R u_t
    Gam = G if transpose else G.T
    sig = make_signature(n)
    J = sig.Jscr if exact else sig.Jscr.to_float()
    i = I_UNIT if exact else 1j
    zI = RatMat.eye(2 * n, exact=exact) * RatScalar(Z if exact else Z.to_float())
    return RatMat.eye(2 * n, exact=exact) + (zI @ Gam @ J) * i


def char_fn(T, U=None, tol=TOL):
    """Characteristic function W_T and the validated K0 operator.

    Gram entry (r, t) is ``u_t* (I - zT)^{-1} u_r``; if this fails the
    J-inner certification the transposed convention is tried once and the
    winner is recorded on the returned operator.
    """
    op = T if isinstance(T, K0Operator) else K0Operator.from_data(T, U)
    H, n, _ = _check_k0(op)
    m = 2 * n
    sig = make_signature(n)
    if op.U is None:
        op.U = _default_U(H, n)
        op.U_exact = None
    if op.U.shape != (op.N, m):
        raise K0Error(f"U must be {op.N}x{m}", {"shape": list(op.U.shape)})
    exact = op.T_exact is not None and op.U_exact is not None
    Jf = np.asarray(sig.Jscr.to_float().eval(0))
    if exact:
        Um = RatMat.const(op.U_exact)
        Tm = RatMat.const(op.T_exact)
        Hm = (Tm - Tm.sharp()) * (-I_UNIT)
        if not (Um @ sig.Jscr @ Um.sharp() == Hm):
            raise K0Error("(T - T*)/i != U Jscr U*", {"residual": "exact mismatch"})
    else:
        err = float(np.abs(op.U @ Jf @ op.U.conj().T - H).max())
        if err > 1e-10 * max(1.0, float(np.abs(H).max())):
            raise K0Error("(T - T*)/i != U Jscr U*", {"residual": err})
        Um = RatMat.const(op.U, exact=False)
        Tm = RatMat.const(op.T, exact=False)
    N = op.N
    IzT = RatMat.eye(N, exact=exact) - Tm * RatScalar(Z if exact else Z.to_float())
    R = IzT.inverse()
    tried = []
    for transpose, label in ((False, "u_t* R u_r"), (True, "u_r* R u_t")):
        W = _gram_W(R, Um, n, transpose, exact)
        # exact identity is cheap; skip the PG transform when it already fails
        if exact and not (W.sharp() @ sig.Jscr @ W == sig.Jscr):
            tried.append((label, Verdict(False, "U(J)", {},
                                         [Verdict(False, "A#JA = J", {"residual": "exact mismatch"})])))
            continue
        uj = in_UJ(W, sig.Jscr, tol)
        tried.append((label, uj))
        if uj.member:
            op.convention = label
            dbm = db_check(W, n, tol, uj=uj)
            if not isinstance(dbm, DBMatrix):
                raise InternalInvariantError("characteristic function failed db_check: "
                                             + ", ".join(dbm.failures()))
            op.db = dbm
            return W, op
    raise K0Error("characteristic function is not J-inner under either Gram convention",
                  {label: v.failures() for label, v in tried})
