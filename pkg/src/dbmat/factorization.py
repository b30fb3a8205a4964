"""
Entire left multipliers that remove every pole of a rational matrix.

Each step picks the pole nearest the origin, projects onto the span of the
pole vectors there and multiplies by ``I - (z/z_k) P_k`` (optionally with
the convergence factor ``exp(s_k(z) P_k)``).  Every step lowers the top pole
order at ``z_k`` by exactly one, so a pole of order ``p`` is visited ``p``
times in a row.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .localstruct import as_source, local_smith, pole_vectors, _orth
from .ratmat import Poly, RatMat, RationalError, SingularMatrixError
from .series import LaurentMat, RatSource, pole_multiplicity, ps_div, ps_exp, rat_series

__all__ = ["ProjFactor", "EntireProduct", "FactoredForm", "FactorizationError",
           "proj_factor_eval", "step_reduce", "factorize", "cofactorize",
           "residue_norms", "ProductSource", "pole_order_key"]

_POINT_TOL = 1e-7


class FactorizationError(RationalError):
    pass


@dataclass(frozen=True)
class ProjFactor:
    """One factor ``[I + (e^{s_k}-1)P] [I - (z/z_k) P]`` (exp part optional)."""

    z_k: complex
    P_k: np.ndarray
    order_k: int = 1
    exp_mode: bool = False

    def __post_init__(self):
        if self.z_k == 0:
            raise FactorizationError("factor point must be nonzero")
        P = np.asarray(self.P_k, dtype=complex)
        if P.size and (np.abs(P @ P - P).max() > 1e-10 or np.abs(P - P.conj().T).max() > 1e-10):
            raise FactorizationError("P_k must be an orthogonal projection")
        object.__setattr__(self, "P_k", P)

    @property
    def n(self):
        return self.P_k.shape[0]

    def s_poly(self):
        """s_k(z) = sum_{j=1..k} (1/j)(z/z_k)^j as a float polynomial."""
        c = np.zeros(self.order_k + 1, dtype=complex)
        for j in range(1, self.order_k + 1):
            c[j] = 1.0 / (j * self.z_k ** j)
        return Poly.from_array(c)

    def eval(self, z):
        z = complex(z)
        n = self.n
        out = np.eye(n, dtype=complex) - (z / self.z_k) * self.P_k
        if self.exp_mode:
            s = self.s_poly().eval(z)
            out = (np.eye(n) + (cmath.exp(s) - 1) * self.P_k) @ out
        return out

    def linear_part(self):
        """I - (z/z_k) P_k as a float polynomial RatMat."""
        n = self.n
        rows = [[Poly.from_array([float(i == j), -self.P_k[i, j] / self.z_k])
                 for j in range(n)] for i in range(n)]
        return RatMat(rows, Poly.from_array([1.0]), canonical=True)

    # Laurent data at a point
    def series(self, z0, K):
        n = self.n
        c = np.zeros((K, n, n), dtype=complex)
        c[0] = np.eye(n) - (z0 / self.z_k) * self.P_k
        if K > 1:
            c[1] = -self.P_k / self.z_k
        L = LaurentMat(0, c)
        if self.exp_mode:
            L = self._exp_series(z0, K, 1) @ L
        return L

    def inv_series(self, z0, K):
        n = self.n
        P = self.P_k
        if abs(z0 - self.z_k) <= _POINT_TOL * max(1.0, abs(self.z_k)):
            # z/(z_k - z) = -(z_k + t)/t
            c = np.zeros((K, n, n), dtype=complex)
            c[0] = -self.z_k * P
            if K > 1:
                c[1] = np.eye(n) - P
            L = LaurentMat(-1, c)
        else:
            s = ps_div(np.array([z0, 1.0]), np.array([self.z_k - z0, -1.0]), K)
            c = s[:, None, None] * P[None]
            c[0] += np.eye(n)
            L = LaurentMat(0, c)
        if self.exp_mode:
            L = L @ self._exp_series(z0, K, -1)
        return L

    def _exp_series(self, z0, K, sign):
        e = ps_exp(sign * self.s_poly().taylor(z0, K), K)
        c = e[:, None, None] * self.P_k[None]
        c[0] += np.eye(self.n) - self.P_k
        return LaurentMat(0, c)

    def to_dict(self):
        return {"z_k": [self.z_k.real, self.z_k.imag],
                "P_k": [[[x.real, x.imag] for x in r] for r in self.P_k.tolist()],
                "order_k": self.order_k, "exp_mode": self.exp_mode}


def proj_factor_eval(f, z):
    return f.eval(z)


@dataclass
class EntireProduct:
    """Factors in application order: ``factors[0]`` acts first (rightmost)."""

    factors: list = field(default_factory=list)
    n: int = 0

    def eval(self, z):
        out = np.eye(self.n, dtype=complex)
        for f in self.factors:
            out = f.eval(z) @ out
        return out

    def rational_part(self):
        out = RatMat.eye(self.n, exact=False)
        for f in self.factors:
            out = f.linear_part() @ out
        return out

    def __len__(self):
        return len(self.factors)

    def points(self):
        return [f.z_k for f in self.factors]

    def to_dict(self):
        return {"n": self.n, "factors": [f.to_dict() for f in self.factors]}


@dataclass
class FactoredForm:
    """G = product * base, with the pole-free rational part precomputed."""

    product: EntireProduct
    base: RatMat
    rational: RatMat
    steps: list = field(default_factory=list)

    def eval(self, z):
        return self.product.eval(z) @ np.asarray(self.base.to_float().eval(z))

    @property
    def pole_free(self):
        return self.rational.den.degree <= 0


class ProductSource:
    """Laurent data of (factors applied to F), including exp factors."""

    def __init__(self, factors, F):
        self.factors = list(factors)
        self.F = F
        self.base = RatSource(F)
        self.n = F.rows

    def series(self, z0, K):
        L = self.base.series(z0, K)
        for f in self.factors:
            L = f.series(z0, K) @ L
        return L

    def inv_series(self, z0, K):
        # extra terms cover the t^{-1} factors at repeated points
        extra = sum(1 for f in self.factors
                    if abs(z0 - f.z_k) <= _POINT_TOL * max(1.0, abs(f.z_k)))
        K2 = K + extra
        L = self.base.inv_series(z0, K2)
        for f in self.factors:
            L = L @ f.inv_series(z0, K2)
        return LaurentMat(L.val, L.coeffs[:K])

    def det_order(self, z0):
        k = self.base.det_order(z0)
        for f in self.factors:
            if abs(z0 - f.z_k) <= _POINT_TOL * max(1.0, abs(f.z_k)):
                k += int(round(np.trace(f.P_k).real))
        return k

    def singular_points(self):
        pts = [r for r, _ in self.F.den.roots()] if self.F.den.degree > 0 else []
        d = self.F.det().num
        if d.degree > 0:
            pts += [r for r, _ in d.roots()]
        return pts + [f.z_k for f in self.factors]


def pole_order_key(p):
    """Ascending modulus, ties by ascending argument in [0, 2pi)."""
    arg = math.atan2(p.imag, p.real) % (2 * math.pi)
    return (round(abs(p), 9), round(arg, 9))


def _same(a, b):
    return abs(a - b) <= _POINT_TOL * max(1.0, abs(a), abs(b))


def _apply(E, G, roots):
    """E @ G for polynomial E, cancelling at the known denominator roots."""
    num = [[None] * G.cols for _ in range(E.rows)]
    for i in range(E.rows):
        for j in range(G.cols):
            acc = Poly.from_array([])
            for k in range(E.cols):
                e = E.num[i][k]
                if not e.is_zero() and not G.num[k][j].is_zero():
                    acc = acc + e * G.num[k][j]
            num[i][j] = acc
    den = G.den.to_float()
    return RatMat(num, den, den_roots=[(r, m) for r, m in roots if m > 0])


def _check_origin(F, strict):
    if F.poles().order_at(0):
        raise FactorizationError("pole at 0: shift the variable first")
    if strict:
        d0 = F.det().eval(0)
        if abs(complex(d0)) == 0 if not F.exact else not d0:
            raise FactorizationError("det F(0) = 0")


class _Tracker:
    """One function under a shared product; local data come from the
    original function's expansion and the factor series, never from a
    floating-point inverse of the partially reduced matrix."""

    def __init__(self, F, product):
        self.F = F
        self.product = product
        self.points = [p for p, _ in F.poles()]
        self._inv_ok = None

    def source(self):
        return ProductSource(self.product.factors, self.F)

    def _radius(self, z0):
        """Distance to the nearest other pole of F, capped at 1."""
        d = [abs(p - z0) for p in self.points if not _same(p, z0)]
        return min(d + [1.0])

    def order_at(self, z0):
        if not any(_same(p, z0) for p in self.points):
            return 0
        L = self.source().series(z0, 8)
        v = _true_val(L, rho=self._radius(z0))
        return max(0, -v) if v is not None else 0

    def live(self):
        return [p for p in self.points if self.order_at(p) > 0]

    def span(self, z0):
        src = self.source()
        try:
            B = np.array(pole_vectors(src, z0)).T.reshape(src.n, -1)
            if B.shape[1]:
                return B
        except (SingularMatrixError, RationalError):
            pass
        # det F identically zero: the top Laurent coefficient range
        L = src.series(z0, 8)
        v = _true_val(L, rho=self._radius(z0))
        return _orth(L.coeff(v))

    def rational(self):
        E = self.product.rational_part()
        return _apply(E, self.F.to_float(), list(self.F.poles()))


def _true_val(L, tol=1e-9, rho=1.0):
    """Leading nonzero index; coefficient k is weighted by rho^k so that
    growth from a nearby singularity does not swamp the leading terms."""
    w = [float(np.abs(L.coeffs[k]).max(initial=0)) * rho ** k for k in range(L.nterms)]
    ref = max(w + [1e-300])
    for k in range(L.nterms):
        if w[k] > tol * ref:
            return L.val + k
    return None


def _run(Fs, mode, strict, check_law=True):
    if mode not in ("plain", "with_exp"):
        raise ValueError("mode must be 'plain' or 'with_exp'")
    n = Fs[0].rows
    for F in Fs:
        if not F.is_square() or F.rows != n:
            raise FactorizationError("all functions must be square of a common size")
        _check_origin(F, strict)
    product = EntireProduct([], n)
    trackers = [_Tracker(F, product) for F in Fs]
    steps = []
    budget = sum(k for F in Fs for _, k in F.poles()) + 1
    while True:
        live = [p for t in trackers for p in t.live()]
        if not live:
            break
        if len(product) >= budget:
            raise FactorizationError("pole removal did not terminate")
        z0 = min(live, key=pole_order_key)
        spans, before = [], []
        for t in trackers:
            if t.order_at(z0) == 0:
                before.append(None)
                continue
            spans.append(t.span(z0))
            before.append(local_smith(t.source(), z0).pole_mults if check_law else None)
        B = _orth(np.hstack(spans))
        P = B @ B.conj().T
        factor = ProjFactor(z0, P, order_k=len(product) + 1,
                            exp_mode=(mode == "with_exp"))
        product.factors.append(factor)
        record = {"point": z0, "rank": B.shape[1], "law": []}
        for t, old in zip(trackers, before):
            if old is not None and check_law:
                new = (local_smith(t.source(), z0).pole_mults
                       if t.order_at(z0) else [])
                expect = sorted(k - 1 for k in old if k > 1)
                record["law"].append((old, new, new == expect))
        steps.append(record)
    forms = [FactoredForm(product, t.F, t.rational(), steps) for t in trackers]
    for f in forms:
        if not f.pole_free:
            raise FactorizationError("rational part kept poles: "
                                     f"{[p for p, _ in f.rational.poles()]}")
    return product, forms


def step_reduce(F, z0):
    """One reduction step at the pole z0; returns (factor, (I - z/z0 P) F)."""
    z0 = complex(z0)
    if z0 == 0:
        raise FactorizationError("z0 = 0 is excluded (det F(0) != 0 hypothesis)")
    Ff = F.to_float()
    if pole_multiplicity(Ff.den, z0) == 0:
        raise FactorizationError(f"{z0} is not a pole")
    B = np.array(pole_vectors(F, z0)).T.reshape(F.rows, -1)
    P = B @ B.conj().T
    factor = ProjFactor(z0, P)
    roots = [(p, k) for p, k in F.poles()]
    return factor, _apply(factor.linear_part(), Ff, roots)


def factorize(F, mode="plain", check_law=True):
    """G = P(z) F(z) entire; poles processed nearest-first."""
    _, forms = _run([F], mode, strict=True, check_law=check_law)
    return forms[0]


def cofactorize(Fs, mode="plain", check_law=False):
    """One product making every P(z) F_i(z) entire (union-of-spans rule).

    Only "no pole at 0" is required here: the blocks of a J-inner matrix
    normalised to I at the origin have singular off-diagonal values there.
    """
    return _run(list(Fs), mode, strict=False, check_law=check_law)


def residue_norms(form, radius=1e-3, npts=64, points=None):
    """Max norm of the circle-integrated residue of P(z)F(z) at each pole."""
    points = [p for p, _ in form.base.poles()] if points is None else points
    th = 2 * np.pi * np.arange(npts) / npts
    out = {}
    for p in points:
        zs = p + radius * np.exp(1j * th)
        acc = np.zeros((form.base.rows, form.base.cols), dtype=complex)
        sup = 0.0
        for z in zs:
            g = form.eval(z)
            sup = max(sup, float(np.linalg.norm(g, 2)))
            acc += g * (z - p)
        out[complex(p)] = (float(np.linalg.norm(acc / npts, 2)), sup)
    return out
