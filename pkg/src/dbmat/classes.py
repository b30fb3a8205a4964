"""
Function-class membership for rational matrices.

Boundary statements ("almost everywhere on R") are checked as exact
rational identities; positivity on regions is sampled on the fixed grids
of :mod:`dbmat.grids` with tolerance ``1e-9``.  Pole locations come from
:func:`dbmat.regions.root_regions`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .grids import DEFAULT_GRID, away_from
from .herglotz import HerglotzParams, herglotz_rational, mass_term
from .ratmat import (I_UNIT, GaussianRational, Poly, RatMat, RatScalar, RationalError,
                     SingularMatrixError, Z, as_gr)
from .regions import nonneg_on_real_line, root_regions
from .series import rat_series
from .verdict import Verdict

__all__ = ["SignatureSpec", "make_signature", "pole_regions", "in_hardy2",
           "in_hardy2_perp", "in_smirnov", "in_inner", "in_schur",
           "in_caratheodory", "pg_transform", "in_PJ", "in_UJ", "TOL"]

TOL = 1e-9
N_REAL_SAMPLES = 512


# ------------------
# Signature matrices
# ------------------

@dataclass(frozen=True)
class SignatureSpec:
    """``j_m``, the mixed signature ``Jscr`` and ``M = M_scaled / sqrt(2)``.

    ``M_scaled`` has Gaussian-integer entries so all identities involving
    M are checked exactly after clearing the factor 2 = sqrt(2)^2.
    """

    n: int
    j: RatMat
    Jscr: RatMat
    M_scaled: RatMat
    J: RatMat
    P_proj: RatMat
    Q_proj: RatMat

    @property
    def m(self):
        return 2 * self.n

    @property
    def M(self):
        """M as a float RatMat (the 1/sqrt(2) applied)."""
        return self.M_scaled.to_float() * (1 / np.sqrt(2.0))

    def identity_holds(self):
        """Exact check of M* Jscr M = j via (sqrt2 M)* Jscr (sqrt2 M) = 2 j."""
        Ms = self.M_scaled
        return Ms.sharp() @ self.Jscr @ Ms == self.j * 2

    def unitary_holds(self):
        Ms = self.M_scaled
        return Ms.sharp() @ Ms == RatMat.eye(self.m) * 2


def _blk(a, b, c, d, n):
    I = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def s(x):
        return [[x * v for v in row] for row in I]
    rows = []
    for left, right in ((s(a), s(b)), (s(c), s(d))):
        for i in range(n):
            rows.append(left[i] + right[i])
    return RatMat.const(rows, exact=True)


def projections(J):
    """P = (I + J)/2 and Q = (I - J)/2."""
    J = _as_const(J)
    I = RatMat.eye(J.rows, exact=J.exact)
    half = GaussianRational(Fraction(1, 2)) if J.exact else 0.5
    return (I + J) * half, (I - J) * half


def make_signature(n, J=None):
    """Signature data for block size n; ``J`` defaults to ``Jscr``."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    i = I_UNIT
    j = _blk(1, 0, 0, -1, n)
    Jscr = _blk(0, i, -i, 0, n)
    Ms = _blk(i, -i, 1, 1, n)
    Jc = Jscr if J is None else _as_const(J)
    P, Q = projections(Jc)
    spec = SignatureSpec(n, j, Jscr, Ms, Jc, P, Q)
    if not spec.identity_holds():
        raise AssertionError("signature identity failed")
    return spec


def _as_const(J):
    if isinstance(J, RatMat):
        return J
    if isinstance(J, SignatureSpec):
        return J.J
    return RatMat.const(J)


# -----------
# Pole helpers
# -----------

def pole_regions(F):
    """[(pole, order, region)] from the reduced common denominator."""
    if F.den.degree <= 0:
        return []
    return root_regions(F.den)


def _grid_eval(F, pts):
    Ff = F.to_float()
    pts = away_from(pts, [r for r, _ in Ff.poles()] if Ff.den.degree > 0 else [])
    if pts.size == 0:
        return pts, np.zeros((0, F.rows, F.cols), complex)
    return pts, Ff.eval_many(pts)


# ---------------
# Hardy / Smirnov
# ---------------

def in_hardy2(F, name="H2"):
    """Poles in the open lower half plane and every entry strictly proper."""
    if F.is_zero():
        return Verdict(True, name)
    for r, m, reg in pole_regions(F):
        if reg != "lower":
            return Verdict(False, name, {"pole": r, "order": m, "region": reg})
    for i, row in enumerate(F.entries()):
        for j, e in enumerate(row):
            if not e.is_zero() and e.num.degree >= e.den.degree:
                return Verdict(False, name, {"entry": [i, j], "reason": "not strictly proper",
                                             "num_degree": e.num.degree,
                                             "den_degree": e.den.degree})
    return Verdict(True, name)


def in_hardy2_perp(F):
    """F# in H2."""
    v = in_hardy2(F.sharp(), name="H2_perp")
    if not v.member and "pole" in v.witnesses:
        v.witnesses["pole"] = complex(v.witnesses["pole"]).conjugate()
        v.witnesses["region"] = {"upper": "lower", "lower": "upper"}.get(
            v.witnesses["region"], v.witnesses["region"])
    return v


def _exact_real(r, den):
    """Exact rational version of a real root when there is one."""
    if not den.exact:
        return None
    x = Fraction(float(r.real)).limit_denominator(10 ** 6)
    g = as_gr(x)
    return g if not den.eval(g) else None


def outer_factor(F):
    """h = prod ((z - x_j)/(z + i))^{m_j} over the real poles of F."""
    num = Poly.const(1, exact=F.exact)
    deg = 0
    for r, m, reg in pole_regions(F):
        if reg != "real":
            continue
        g = _exact_real(r, F.den)
        lin = Poly([-g, 1]) if g is not None else Poly.from_array([-r.real, 1.0])
        num = num * lin ** m
        deg += m
    den = Poly([I_UNIT, 1]) ** deg if num.exact else Poly.from_array([1j, 1.0]) ** deg
    return RatScalar(num, den)


def in_smirnov(F):
    """No poles in the open upper half plane; witness h is outer, h F bounded."""
    for r, m, reg in pole_regions(F):
        if reg == "upper":
            return Verdict(False, "Smirnov", {"pole": r, "order": m})
    h = outer_factor(F)
    return Verdict(True, "Smirnov", {"outer_h": h})


# -----------
# Inner / Schur
# -----------

def _identity_residual(A, B):
    if A.exact and B.exact:
        return 0.0 if A == B else max(A.residual(B), 1e-300)
    return A.residual(B)


def in_inner(F, tol=TOL):
    """F# F = I exactly and no poles in the closed upper half plane."""
    if not F.is_square():
        raise RationalError("in_inner needs a square matrix")
    for r, m, reg in pole_regions(F):
        if reg != "lower":
            return Verdict(False, "inner", {"pole": r, "order": m, "region": reg})
    lhs = F.sharp() @ F
    I = RatMat.eye(F.rows, exact=F.exact)
    res = _identity_residual(lhs, I)
    ok = res == 0.0 if (F.exact) else res <= tol
    if not ok:
        return Verdict(False, "inner", {"identity": "F#F = I", "residual": res})
    return Verdict(True, "inner", {"identity_residual": res})


def in_schur(F, grid=DEFAULT_GRID, tol=TOL):
    """No poles in the open upper half plane and sup norm <= 1 on the grid."""
    for r, m, reg in pole_regions(F):
        if reg == "upper":
            return Verdict(False, "Schur", {"pole": r, "order": m})
    pts, vals = _grid_eval(F, grid.upper())
    worst, where = 0.0, None
    for z, v in zip(pts, vals):
        s = float(np.linalg.norm(v, 2))
        if s > worst:
            worst, where = s, z
    if worst > 1 + tol:
        return Verdict(False, "Schur", {"point": where, "norm": worst})
    return Verdict(True, "Schur", {"max_norm": worst})


# -------------
# Caratheodory
# -------------

def _residue(F, r, den):
    g = _exact_real(r, den) if F.exact else None
    if g is not None:
        dd = F.den.derivative().eval(g)
        return RatMat.const([[p.eval(g) / dd for p in row] for row in F.num]), g
    L = rat_series(F.to_float(), r, 2)
    return RatMat.const(L.coeff(-1), exact=False), complex(r.real, 0.0)


def _herm(A):
    return (A + A.conj().T) / 2


def _is_herm_psd(A, tol):
    A = np.asarray(A, complex)
    sc = max(1.0, float(np.abs(A).max(initial=0)))
    if np.abs(A - A.conj().T).max(initial=0) > tol * sc:
        return False, "not Hermitian", None
    w = float(np.linalg.eigvalsh(_herm(A)).min())
    return w >= -tol * sc, "not PSD", w


def _real_samples(n=N_REAL_SAMPLES):
    t = np.linspace(-np.pi / 2, np.pi / 2, n + 2)[1:-1]
    return np.tan(t)


def _min_eig_on_R(D, poles, tol):
    """Minimum eigenvalue of D(x) on sampled R, refined near the minimum."""
    Df = D.to_float()
    xs = _real_samples()
    xs = np.array([x for x in xs if all(abs(x - p) > 1e-6 for p in poles)])
    vals = Df.eval_many(xs.astype(complex))
    eig = np.array([np.linalg.eigvalsh(_herm(v)).min() for v in vals])
    k = int(np.argmin(eig))
    best, where = float(eig[k]), float(xs[k])
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, len(xs) - 1)]
    if hi > lo:
        f = lambda x: float(np.linalg.eigvalsh(_herm(Df.eval(complex(x)))).min())
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        if res.fun < best:
            best, where = float(res.fun), float(res.x)
    scale = max(1.0, float(np.abs(vals).max(initial=0)))
    return best, where, scale


def _exact_psd_on_R(D):
    """Sturm analysis of principal minors for 1x1 and 2x2 densities."""
    def nonneg(e):
        if e.is_zero():
            return True
        q = e.num * e.den.sharp()
        if any(q._im):
            return False
        return nonneg_on_real_line(q)
    E = D.entries()
    if D.rows == 1:
        return nonneg(E[0][0])
    if D.rows == 2:
        return nonneg(E[0][0]) and nonneg(E[1][1]) and nonneg(D.det())
    raise ValueError("exact PSD analysis supports sizes 1 and 2 only")


def in_caratheodory(F, tol=TOL, exact=False, hint=None):
    """Caratheodory membership; returns (Verdict, HerglotzParams or None)."""
    name = "Caratheodory"
    if not F.is_square():
        raise RationalError("in_caratheodory needs a square matrix")
    n = F.rows
    regs = pole_regions(F)
    for r, m, reg in regs:
        if reg == "upper":
            return Verdict(False, name, {"pole": r, "order": m}), None
    masses, principal = [], []
    for r, m, reg in regs:
        if reg != "real":
            continue
        if m > 1:
            return Verdict(False, name, {"real_pole": r.real, "order": m,
                                         "reason": "real pole not simple"}), None
        R, x0 = _residue(F, r, F.den)
        H = np.asarray((R * (-I_UNIT if R.exact else -1j)).to_float().eval(0), complex)
        ok, why, w = _is_herm_psd(H, tol)
        if not ok:
            return Verdict(False, name, {"real_pole": r.real, "reason": f"-i*Res {why}",
                                         "min_eig": w}), None
        masses.append((float(np.real(complex(x0))), np.pi * _herm(H)))
        principal.append((R, x0))
    # polynomial part
    lin, const = [], []
    for row in F.num:
        lr, cr = [], []
        for p in row:
            q, _ = p.divmod(F.den)
            if q.degree > 1:
                return Verdict(False, name, {"reason": "polynomial part of degree > 1",
                                             "degree": q.degree}), None
            lr.append(q.coeff(1))
            cr.append(q.coeff(0))
        lin.append(lr)
        const.append(cr)
    C1 = RatMat.const(lin, exact=F.exact)
    P = C1 * (I_UNIT if F.exact else 1j)
    Pf = np.asarray(P.to_float().eval(0), complex)
    ok, why, w = _is_herm_psd(Pf, tol)
    if F.exact and not (P == P.sharp()):
        ok, why = False, "not Hermitian"
    if not ok:
        return Verdict(False, name, {"reason": f"P {why}", "min_eig": w}), None
    # regular part and density
    Freg = F
    for R, x0 in principal:
        if R.exact and isinstance(x0, GaussianRational):
            lin_f = Poly([-x0, 1])
        else:
            Freg = Freg.to_float()
            R = R.to_float()
            lin_f = Poly.from_array([-complex(x0), 1.0])
        Freg = Freg - RatMat([[e for e in row] for row in R.num],
                             R.den * lin_f)
    D = (Freg + Freg.sharp()) * (GaussianRational(Fraction(1, 2)) if Freg.exact else 0.5)
    real_poles = [r.real for r, _, reg in regs if reg == "real"]
    for r, m, reg in pole_regions(D):
        if reg == "real":
            return Verdict(False, name, {"reason": "density has a real pole",
                                         "pole": r}), None
    w, x, scale = _min_eig_on_R(D, real_poles, tol)
    if w < -tol * scale:
        return Verdict(False, name, {"reason": "Re F(x) not PSD", "point": x,
                                     "min_eig": w}), None
    witnesses = {"min_eig_on_R": w}
    if exact and D.exact and n <= 2:
        if not _exact_psd_on_R(D):
            return Verdict(False, name, {"reason": "exact principal-minor test failed"}), None
        witnesses["exact_psd"] = True
    # Q from the constant remainder
    zero = RatMat.zeros(n, n, exact=D.exact)
    H0 = herglotz_rational(HerglotzParams(zero, zero, D), hint=F.den if hint is None else hint)
    Fm = F
    for x0, s in masses:
        Fm = Fm.to_float() - mass_term(x0, s)
    zP = RatMat([[p * Z for p in r] for r in P.num], P.den)
    if not (Fm.exact and H0.exact):
        Fm, zP, H0 = Fm.to_float(), zP.to_float(), H0.to_float()
    iQ = Fm + zP * (I_UNIT if Fm.exact else 1j) - H0
    Qm, res = _constant_of(iQ * (-I_UNIT if iQ.exact else -1j), tol)
    if Qm is None:
        return Verdict(False, name, {"reason": "remainder not constant",
                                     "residual": res}), None
    Qf = np.asarray(Qm.to_float().eval(0), complex)
    if np.abs(Qf - Qf.conj().T).max(initial=0) > tol * max(1.0, np.abs(Qf).max(initial=0)):
        return Verdict(False, name, {"reason": "Q not Hermitian", "Q": Qf}), None
    params = HerglotzParams(P if Qm.exact else P.to_float(), Qm, D, masses)
    return Verdict(True, name, witnesses), params


def _constant_of(R, tol):
    """Return (constant RatMat, 0) if R is constant, else (None, residual)."""
    if R.exact:
        if R.is_polynomial() and R.max_degree() <= 0:
            return RatMat.const(R.eval(0)), 0.0
        return None, float("inf")
    pts = [0.3 + 0.7j, -1.1 - 0.4j, 2.0 + 1.5j]
    vals = [np.asarray(R.eval(z), complex) for z in pts]
    sc = max(1.0, max(np.abs(v).max() for v in vals))
    res = max(np.abs(v - vals[0]).max() for v in vals) / sc
    if res > 1e3 * tol:
        return None, res
    return RatMat.const(vals[0], exact=False), res


# ----------------------------
# Potapov-Ginzburg transform
# ----------------------------

def pg_transform(A, J):
    """(P A + Q)(P + Q A)^{-1} with P, Q the projections of J."""
    J = _as_const(J)
    if A.shape != J.shape:
        raise RationalError(f"size mismatch {A.shape} vs {J.shape}")
    P, Q = projections(J)
    if not A.exact:
        P, Q = P.to_float(), Q.to_float()
    try:
        return (P @ A + Q) @ (P + Q @ A).inverse()
    except SingularMatrixError as err:
        raise RationalError("identically singular denominator P + QA") from err


def in_PJ(A, J, grid=DEFAULT_GRID, tol=TOL):
    """J - A(z)* J A(z) >= 0 at the holomorphy points of the P(J) grid."""
    J = _as_const(J)
    Jf = np.asarray(J.to_float().eval(0), complex)
    pts, vals = _grid_eval(A, grid.pj())
    worst, where = np.inf, None
    for z, a in zip(pts, vals):
        w = float(np.linalg.eigvalsh(_herm(Jf - a.conj().T @ Jf @ a)).min())
        if w < worst:
            worst, where = w, z
    if worst < -tol:
        return Verdict(False, "P(J)", {"point": where, "min_eig": worst})
    return Verdict(True, "P(J)", {"min_eig": worst if pts.size else None})


def in_UJ(A, J, tol=TOL):
    """PG(A) inner, with the J-unitarity identity A# J A = J cross-check."""
    J = _as_const(J)
    try:
        pg = pg_transform(A, J)
    except RationalError as err:
        return Verdict(False, "U(J)", {"error": str(err)})
    v1 = in_inner(pg, tol)
    v1.name = "PG inner"
    lhs = A.sharp() @ (J if A.exact else J.to_float()) @ A
    Jc = J if A.exact else J.to_float()
    res = _identity_residual(lhs, Jc)
    ok = res == 0.0 if (A.exact and J.exact) else res <= tol
    v2 = Verdict(ok, "A#JA = J", {"residual": res})
    return Verdict.all_of("U(J)", [v1, v2])
