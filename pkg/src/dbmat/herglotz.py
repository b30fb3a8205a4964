"""
Half-plane splitting of rational matrices and the Herglotz integral.

For a rational density ``D`` without real poles write

    D = C + D_lo + D_up

with ``C`` constant, ``D_lo`` strictly proper with poles in the lower half
plane and ``D_up`` strictly proper with poles in the upper half plane.
Closing contours in the integral

    (1/(pi i)) int (1/(x - z) - x/(1 + x^2)) D(x) dx,    z in C+,

gives ``C + 2 D_lo(z) - D_lo(i) + D_up(-i)``, a single rational function
that is used on all of C as the meromorphic continuation.  The numeric
evaluator :func:`herglotz_eval` sums residues of the integrand directly
and is an independent code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ratmat import (GaussianRational, I_UNIT, Poly, RatMat, RationalError, Z,
                     as_gr, poly_ext_gcd, poly_gcd, _is_exact_number)
from .regions import real_root_count, root_regions
from .series import rat_series

__all__ = ["HerglotzParams", "split_den", "hardy_split", "herglotz_rational",
           "herglotz_eval", "herglotz_quad", "mass_term", "const_mat"]


def const_mat(M, exact=None):
    """Constant RatMat from a RatMat, nested list or array."""
    if isinstance(M, RatMat):
        return M
    return RatMat.const(M, exact=exact)


@dataclass
class HerglotzParams:
    """Parameters ``iQ - izP + (1/(pi i)) int K(x, z) dsigma(x)`` with
    ``dsigma = Delta(x) dx`` plus point masses ``(x0, sigma0)``."""

    P: RatMat
    Q: RatMat
    density: RatMat
    point_masses: list = field(default_factory=list)

    def __post_init__(self):
        self.P = const_mat(self.P)
        self.Q = const_mat(self.Q)
        n = self.P.rows
        if self.Q.shape != (n, n) or self.density.shape != (n, n):
            raise RationalError("HerglotzParams blocks must share one square size")

    @property
    def n(self):
        return self.P.rows

    def check(self, tol=1e-10):
        """Return a list of violated invariants (empty when valid)."""
        bad = []
        P = np.asarray(self.P.to_float().eval(0), complex)
        Q = np.asarray(self.Q.to_float().eval(0), complex)
        if np.abs(P - P.conj().T).max() > tol or np.linalg.eigvalsh(
                (P + P.conj().T) / 2).min() < -tol:
            bad.append("P not Hermitian PSD")
        if np.abs(Q - Q.conj().T).max() > tol:
            bad.append("Q not Hermitian")
        if not self.density.equals(self.density.sharp()):
            bad.append("density not self-adjoint (D# != D)")
        for x0, s in self.point_masses:
            s = np.asarray(s, complex)
            if abs(complex(x0).imag) > tol or np.linalg.eigvalsh(
                    (s + s.conj().T) / 2).min() < -tol:
                bad.append(f"point mass at {x0} invalid")
        return bad

    def to_dict(self):
        return {"P": self.P, "Q": self.Q, "density": self.density,
                "point_masses": [[complex(x), np.asarray(s, complex)]
                                 for x, s in self.point_masses]}


# -----------------------
# Denominator splitting
# -----------------------

def _regions_ok(p, want):
    if p.degree <= 0:
        return True
    return all(reg == want for _, _, reg in root_regions(p))


def _split_by_hint(D, hint):
    lo = Poly.const(1)
    rest = D
    while True:
        g = poly_gcd(rest, hint)
        if g.degree <= 0:
            break
        lo = lo * g
        rest = rest.exact_div(g)
    return lo.monic(), rest.monic()


def _to_sympy(p, z):
    import sympy
    return sum((sympy.Rational(int(a.numerator), int(a.denominator))
                + sympy.I * sympy.Rational(int(b.numerator), int(b.denominator))) * z ** k
               for k, (a, b) in enumerate(zip(p._re, p._im + (0,) * (len(p._re) - len(p._im)))))


def _from_sympy(expr, z):
    import sympy
    coeffs = sympy.Poly(expr, z).all_coeffs()[::-1]
    out = []
    for c in coeffs:
        re, im = sympy.nsimplify(c).as_real_imag()
        out.append(GaussianRational(_frac(re), _frac(im)))
    return Poly(out)


def _frac(r):
    from fractions import Fraction
    return Fraction(int(r.p), int(r.q))


def _split_by_factoring(D):
    import sympy
    z = sympy.Symbol("z")
    _, facs = sympy.factor_list(_to_sympy(D, z), z, gaussian=True)
    lo = Poly.const(1)
    up = Poly.const(1)
    for f, m in facs:
        p = _from_sympy(f, z)
        if p.degree <= 0:
            continue
        if _regions_ok(p, "lower"):
            lo = lo * p ** m
        elif _regions_ok(p, "upper"):
            up = up * p ** m
        else:
            return None
    return lo.monic(), up.monic()


def _split_float(D):
    lo = Poly.from_array([1.0])
    up = Poly.from_array([1.0])
    for r, m, reg in root_regions(D.to_float()):
        if reg == "real":
            raise RationalError(f"real pole at {r.real:g}")
        f = Poly.from_array([-r, 1.0]) ** m
        if reg == "lower":
            lo = lo * f
        else:
            up = up * f
    return lo, up


def split_den(D, hint=None):
    """Factor monic D = D_lo * D_up by half plane of the roots.

    Exact polynomials stay exact when a factor with the lower-half-plane
    roots can be found over Q(i): first from ``hint`` (a polynomial whose
    roots lie in the lower half plane) and then by factoring over the
    Gaussian rationals.  Otherwise the split is done in floating point.
    """
    if D.degree <= 0:
        one = Poly.const(1, exact=D.exact)
        return one, one
    if not D.exact:
        return _split_float(D)
    if real_root_count(D) > 0:
        r = [x for x, _, reg in root_regions(D) if reg == "real"]
        raise RationalError(f"real pole at {r[0].real:g}")
    D = D.monic()
    if hint is not None and hint.exact and hint.degree > 0:
        lo, up = _split_by_hint(D, hint)
        if _regions_ok(lo, "lower") and _regions_ok(up, "upper"):
            return lo, up
    if _regions_ok(D, "lower"):
        return D, Poly.const(1)
    if _regions_ok(D, "upper"):
        return Poly.const(1), D
    res = _split_by_factoring(D)
    if res is not None:
        return res
    return _split_float(D)


def hardy_split(F, hint=None):
    """Return (C, F_lo, F_up) with F = C + F_lo + F_up.

    ``F_lo`` is strictly proper with poles in the open lower half plane
    (an H2 function) and ``F_up`` is strictly proper with poles in the open
    upper half plane (orthogonal complement of H2).  Raises on real poles
    or a polynomial part of positive degree.
    """
    D = F.den
    lo, up = split_den(D, hint)
    exact = lo.exact and up.exact and F.exact
    if not exact:
        F = F.to_float()
        D = F.den
        lo, up = lo.to_float(), up.to_float()
    scale = D.lc if exact else complex(D.lc)
    C, Nl, Nu = [], [], []
    g, s, t = poly_ext_gcd(lo, up) if exact else _float_ext_gcd(lo, up)
    for row in F.num:
        cr, lr, ur = [], [], []
        for p in row:
            p = p.scale(1 / scale) if exact else p.scale(1.0 / scale)
            q, r = p.divmod(lo * up)
            if q.degree > 0:
                raise RationalError("polynomial part of positive degree")
            cr.append(q)
            lr.append((r * t) % lo if lo.degree > 0 else r * 0)
            ur.append((r * s) % up if up.degree > 0 else r * 0)
        C.append(cr)
        Nl.append(lr)
        Nu.append(ur)
    one = Poly.const(1, exact=exact)
    return RatMat(C, one), RatMat(Nl, lo), RatMat(Nu, up)


def _float_ext_gcd(a, b):
    """Float Bezout pair for coprime a, b via a Sylvester solve."""
    m, n = a.degree, b.degree
    if m <= 0 or n <= 0:
        if m <= 0:
            return Poly.from_array([1.0]), Poly.from_array([1.0 / complex(a.lc)]), Poly.from_array([0.0])
        return Poly.from_array([1.0]), Poly.from_array([0.0]), Poly.from_array([1.0 / complex(b.lc)])
    ac, bc = a.float_coeffs(), b.float_coeffs()
    N = m + n
    S = np.zeros((N, N), complex)
    for j in range(n):
        S[j:j + m + 1, j] = ac
    for j in range(m):
        S[j:j + n + 1, n + j] = bc
    rhs = np.zeros(N, complex)
    rhs[0] = 1.0
    x = np.linalg.solve(S, rhs)
    return Poly.from_array([1.0]), Poly.from_array(x[:n]), Poly.from_array(x[n:])


# -----------------------
# Herglotz representation
# -----------------------

def _eval_const(M, z):
    if M.exact and _is_exact_number(z):
        return RatMat.const(M.eval(z))
    return RatMat.const(np.asarray(M.to_float().eval(complex(z))), exact=False)


def mass_term(x0, sigma0, exact=None):
    """(1/(pi i)) sigma0 [1/(x0 - z) - x0/(1 + x0^2)] as a RatMat."""
    sigma0 = const_mat(sigma0, exact=exact)
    if sigma0.exact and _is_exact_number(x0):
        raise RationalError("point-mass terms involve 1/pi and are never exact; "
                            "pass float data")
    x0 = float(np.real(complex(x0)))
    s = np.asarray(sigma0.to_float().eval(0), complex) / (np.pi * 1j)
    n = s.shape[0]
    c = x0 / (1 + x0 * x0)
    # (1 - c (x0 - z)) / (x0 - z) = -(1 - c x0 + c z) / (z - x0)
    num = [[Poly.from_array([-s[i, j] * (1 - c * x0), -s[i, j] * c]) for j in range(n)]
           for i in range(n)]
    return RatMat(num, Poly.from_array([-x0, 1.0]))


def herglotz_rational(params, hint=None):
    """The rational function ``iQ - izP + (1/(pi i)) int K dsigma``.

    Exact whenever the density splits over Q(i) (see :func:`split_den`);
    ``hint`` is a polynomial with lower-half-plane roots, typically a
    determinant of the generating entire function.
    """
    P, Q, D = params.P, params.Q, params.density
    C, Dlo, Dup = hardy_split(D, hint)
    if not Dlo.exact:
        P, Q, C = P.to_float(), Q.to_float(), C.to_float()
    i = I_UNIT if Dlo.exact else 1j
    minus_i = -I_UNIT if Dlo.exact else -1j
    zP = RatMat([[p * Z for p in r] for r in P.num], P.den) if P.exact else \
        RatMat([[p * Poly.from_array([0, 1.0]) for p in r] for r in P.num], P.den)
    out = Q * i - zP * i + C + Dlo * 2 - _eval_const(Dlo, i) + _eval_const(Dup, minus_i)
    for x0, s in params.point_masses:
        out = out.to_float() + mass_term(x0, s, exact=False)
    return out


def _kernel_integrand(D, z):
    """K(x, z) D(x) as a float RatMat in x."""
    D = D.to_float()
    K_num = Poly.from_array([1.0, z])
    K_den = Poly.from_array([-z, 1.0]) * Poly.from_array([1.0, 0.0, 1.0])
    return RatMat([[p * K_num for p in r] for r in D.num], D.den * K_den)


def herglotz_eval(params, z):
    """Numeric value at a non-real z by residues of the integrand in C+."""
    z = complex(z)
    if abs(z.imag) < 1e-14:
        raise ValueError("herglotz_eval needs a non-real point")
    n = params.n
    P = np.asarray(params.P.to_float().eval(0), complex)
    Q = np.asarray(params.Q.to_float().eval(0), complex)
    f = _kernel_integrand(params.density, z)
    total = np.zeros((n, n), complex)
    for r, m, reg in root_regions(f.den):
        if reg == "real":
            raise RationalError(f"real pole of the density at {r.real:g}")
        if reg == "upper":
            total += rat_series(f, r, m + 1).coeff(-1)
    out = 1j * Q - 1j * z * P + 2 * total
    for x0, s in params.point_masses:
        x0 = float(np.real(complex(x0)))
        s = np.asarray(const_mat(s).to_float().eval(0), complex)
        out = out + s * (1 / (x0 - z) - x0 / (1 + x0 * x0)) / (np.pi * 1j)
    return out


def herglotz_quad(params, z, R=1e3):
    """Adaptive quadrature of the Herglotz integral on [-R, R] (oracle)."""
    from scipy.integrate import quad
    z = complex(z)
    D = params.density.to_float()
    n = params.n
    P = np.asarray(params.P.to_float().eval(0), complex)
    Q = np.asarray(params.Q.to_float().eval(0), complex)
    out = 1j * Q - 1j * z * P
    pts = sorted({r.real for r, _ in D.den.roots() if abs(r.real) < R}) if D.den.degree > 0 else None
    for a in range(n):
        for b in range(n):
            def f(x, part):
                k = 1 / (x - z) - x / (1 + x * x)
                v = k * D.eval(x)[a, b]
                return v.real if part == 0 else v.imag
            re = quad(f, -R, R, args=(0,), limit=400, points=pts, epsabs=1e-13, epsrel=1e-11)[0]
            im = quad(f, -R, R, args=(1,), limit=400, points=pts, epsabs=1e-13, epsrel=1e-11)[0]
            out[a, b] += (re + 1j * im) / (np.pi * 1j)
    return out
