"""
Half-plane location of polynomial roots.

Numeric roots are labelled ``"upper"``, ``"lower"`` or ``"real"``.  For
exact polynomials the number of distinct real roots is decided exactly
with a Sturm sequence on ``gcd(p, p#)``, so a root is never misfiled
because of a rounding-level imaginary part.
"""

from __future__ import annotations

from .ratmat import Poly, poly_gcd, squarefree

__all__ = ["sturm_real_count", "real_root_count", "root_regions",
           "nonneg_on_real_line", "REAL_TOL"]

REAL_TOL = 1e-9


def _sign_at_inf(p, plus):
    if p.is_zero():
        return 0
    s = 1 if p.lc.re > 0 else -1
    if not plus and p.degree % 2:
        s = -s
    return s


def _variations(signs):
    signs = [s for s in signs if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_real_count(p):
    """Number of distinct real roots of a real exact polynomial."""
    if p.degree <= 0:
        return 0
    seq = [p, p.derivative()]
    while not seq[-1].is_zero() and seq[-1].degree > 0:
        r = seq[-2] % seq[-1]
        if r.is_zero():
            break
        seq.append(-r)
    lo = _variations([_sign_at_inf(q, False) for q in seq])
    hi = _variations([_sign_at_inf(q, True) for q in seq])
    return lo - hi


def real_root_count(p):
    """Distinct real roots of p (exact mode)."""
    if p.degree <= 0:
        return 0
    g = poly_gcd(p, p.sharp())
    if g.degree <= 0:
        return 0
    return sturm_real_count(g)


def root_regions(p, tol=REAL_TOL):
    """List of (root, multiplicity, region) for a nonzero polynomial."""
    roots = p.roots()
    if not roots:
        return []
    if p.exact:
        k = real_root_count(p)
        order = sorted(range(len(roots)), key=lambda j: abs(roots[j][0].imag))
        real = set(order[:k])
        out = []
        for j, (r, m) in enumerate(roots):
            if j in real:
                out.append((complex(r.real, 0.0), m, "real"))
            else:
                out.append((r, m, "upper" if r.imag > 0 else "lower"))
        return out
    out = []
    for r, m in roots:
        if abs(r.imag) <= tol * max(1.0, abs(r)):
            out.append((complex(r.real, 0.0), m, "real"))
        else:
            out.append((r, m, "upper" if r.imag > 0 else "lower"))
    return out


def nonneg_on_real_line(q):
    """Exact test that a real polynomial is >= 0 on all of R."""
    if q.is_zero():
        return True
    if any(q._im):
        raise ValueError("polynomial is not real")
    if q.lc.re < 0:
        return False
    for f, m in squarefree(q):
        if m % 2 and sturm_real_count(f) > 0:
            return False
    return True


def as_real_poly(p):
    """Real part of the coefficients (for polynomials known to be real)."""
    return Poly._from_q(p._re, [])
