"""
Local pole and zero structure of a square rational matrix at a point.

Partial multiplicities come from the kernel dimensions of the block
Toeplitz matrices built on Laurent coefficients: for the analytic part
``H(t) = t**(-v) F(z0 + t)`` with local exponents ``kappa_j``,

    dim ker T_k(H) = sum_j min(kappa_j, k + 1),

so successive differences count the exponents that reach each level.
Pole vectors and pole chains solve ``F(z)^{-1} v(z) = O((z - z0)**l)`` on
the same Toeplitz systems built from ``F^{-1}``; eigenvectors and zero
chains use ``F`` itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ratmat import RatMat, RationalError, SingularMatrixError
from .series import RatSource, pole_multiplicity

__all__ = ["LocalData", "Chain", "local_smith", "pole_vectors", "eigenvectors",
           "max_chain", "canonical_chains", "as_source", "RANK_TOL", "CHAIN_TOL"]

RANK_TOL = 1e-9
CHAIN_TOL = 1e-8
_SPAN_TOL = 1e-7


@dataclass(frozen=True)
class Chain:
    """Pole or zero chain; ``length == 0`` flags an invalid start vector."""

    vectors: tuple
    kind: str
    length: int
    diagnostic: str = ""

    def __bool__(self):
        return self.length > 0


@dataclass
class LocalData:
    point: complex
    partial_mults: tuple
    pole_basis: list = field(default_factory=list)
    zero_basis: list = field(default_factory=list)
    det_order: int | None = None

    @property
    def pole_mults(self):
        return sorted(-r for r in self.partial_mults if r < 0)

    @property
    def zero_mults(self):
        return sorted(r for r in self.partial_mults if r > 0)

    @property
    def conserved(self):
        """Whether sum of exponents equals the order of det at the point."""
        return self.det_order is None or sum(self.partial_mults) == self.det_order

    def to_dict(self):
        def vecs(vs):
            return [[[float(x.real), float(x.imag)] for x in v] for v in vs]
        return {
            "point": [float(self.point.real), float(self.point.imag)],
            "partial_mults": list(self.partial_mults),
            "pole_basis": vecs(self.pole_basis),
            "zero_basis": vecs(self.zero_basis),
            "det_order": self.det_order,
        }


def as_source(F):
    if isinstance(F, RatMat):
        return RatSource(F)
    if hasattr(F, "series") and hasattr(F, "inv_series"):
        return F
    raise TypeError(f"cannot expand {type(F).__name__}")


# -------------------------
# Toeplitz helpers
# -------------------------

class _Expansion:
    """Lazily grown, rescaled Laurent coefficients of one function."""

    def __init__(self, fetch, rho):
        self.fetch = fetch
        self.rho = rho
        self.K = 0
        self.val = 0
        self.H = None
        self.ref = 0.0

    def blocks(self, K):
        if K > self.K:
            K2 = max(K, 2 * self.K, 8)
            L = self.fetch(K2)
            self.val = L.val
            scale = self.rho ** np.arange(L.nterms)
            self.H = L.coeffs * scale[:, None, None]
            self.K = L.nterms
            self.ref = max(float(np.linalg.norm(h, 2)) for h in self.H)
        return self.H[:K]


def _toeplitz(H, k):
    n = H.shape[1]
    T = np.zeros(((k + 1) * n, (k + 1) * n), dtype=complex)
    for l in range(k + 1):
        for i in range(l + 1):
            T[l * n:(l + 1) * n, i * n:(i + 1) * n] = H[l - i]
    return T


def _rank(T, ref=0.0, tol=RANK_TOL):
    """Numerical rank; the threshold is relative to sigma_max of T or to
    the coefficient scale ``ref`` of the whole expansion, whichever is
    larger, so a block that is pure rounding noise has rank zero."""
    if T.size == 0:
        return 0
    s = np.linalg.svd(T, compute_uv=False)
    top = max(s[0], ref)
    if top == 0:
        return 0
    return int(np.sum(s > tol * top))


def _null(T, ref=0.0, tol=RANK_TOL):
    u, s, vh = np.linalg.svd(T)
    top = max(s[0], ref) if s.size else ref
    r = int(np.sum(s > tol * top)) if top > 0 else 0
    return vh[r:].conj().T


def _orth(cols, tol=_SPAN_TOL):
    cols = np.asarray(cols, dtype=complex)
    if cols.size == 0 or cols.shape[1] == 0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    top = max(s[0], 1.0) if s.size else 1.0
    r = int(np.sum(s > tol * top))
    return _canon_phase(u[:, :r])


def _canon_phase(B):
    """Deterministic phase: largest-modulus entry of each column real > 0."""
    B = B.copy()
    for j in range(B.shape[1]):
        k = int(np.argmax(np.abs(B[:, j]) > np.abs(B[:, j]).max() * (1 - 1e-9)))
        if B[k, j] != 0:
            B[:, j] *= abs(B[k, j]) / B[k, j]
    return B


def _scale_radius(src, z0):
    pts = []
    R = getattr(src, "R", None)
    if R is not None:
        pts = [r for r, _ in R.den.roots()] if R.den.degree > 0 else []
        try:
            d = R.det().num
            if d.degree > 0:
                pts += [r for r, _ in d.roots()]
        except RationalError:
            pass
    elif hasattr(src, "singular_points"):
        pts = list(src.singular_points())
    dists = [abs(p - z0) for p in pts if abs(p - z0) > 1e-7 * max(1.0, abs(z0))]
    return min(1.0, 0.5 * min(dists)) if dists else 1.0


# -------------------------
# Public operations
# -------------------------

def _kappas(exp, n, cap):
    """Local exponents of the analytic part via Toeplitz rank profile."""
    dims = []
    k = 0
    while True:
        H = exp.blocks(k + 1)
        dims.append((k + 1) * n - _rank(_toeplitz(H, k), exp.ref))
        prev = dims[k - 1] if k > 0 else 0
        c = dims[k] - prev  # number of kappa_j >= k + 1
        if c == 0:
            break
        if k >= cap:
            raise RationalError("identically singular")
        k += 1
    # dims[k] - dims[k-1] = #{kappa >= k+1}
    counts = [dims[0]] + [dims[j] - dims[j - 1] for j in range(1, len(dims))]
    kap = [0] * (n - counts[0])
    for level in range(1, len(counts)):
        kap += [level] * (counts[level - 1] - counts[level])
    return sorted(kap)


def local_smith(F, z0, cap=None):
    """Local exponents r_1 <= ... <= r_n of F at z0 with pole/zero bases."""
    src = as_source(F)
    z0 = complex(z0)
    n = src.n
    rho = _scale_radius(src, z0)
    exp = _Expansion(lambda K: src.series(z0, K), rho)
    exp.blocks(1)
    v = exp.val
    try:
        det_order = src.det_order(z0)
    except (SingularMatrixError, ZeroDivisionError):
        raise RationalError("identically singular") from None
    except RationalError as err:
        if "indeterminate" in str(err):
            raise RationalError("identically singular") from None
        det_order = None
    if cap is None:
        cap = n * (-v) + (abs(det_order) if det_order is not None else 0) + 2 * n + 2
    r = tuple(k + v for k in _kappas(exp, n, cap))
    data = LocalData(point=z0, partial_mults=r, det_order=det_order)
    if any(x < 0 for x in r):
        data.pole_basis = _vecs(_level_space(src, z0, 1, "pole", rho))
    if any(x > 0 for x in r):
        data.zero_basis = _vecs(_level_space(src, z0, 1, "zero", rho))
    return data


def _vecs(B):
    return [B[:, j].copy() for j in range(B.shape[1])]


def _fetcher(src, z0, kind):
    if kind == "pole":
        return lambda K: src.inv_series(z0, K)
    if kind == "zero":
        return lambda K: src.series(z0, K)
    raise ValueError(f"kind must be 'pole' or 'zero', got {kind!r}")


def _level_space(src, z0, level, kind, rho=None, exp=None):
    """Orthonormal basis of start vectors of chains of length >= level."""
    n = src.n
    if exp is None:
        rho = _scale_radius(src, z0) if rho is None else rho
        exp = _Expansion(_fetcher(src, z0, kind), rho)
        exp.blocks(1)
    k = level - exp.val - 1
    if k < 0:
        return np.eye(n, dtype=complex)
    T = _toeplitz(exp.blocks(k + 1), k)
    N = _null(T, exp.ref)
    return _orth(N[:n])


def pole_vectors(F, z0):
    """Orthonormal basis (list of vectors) of the pole-vector span at z0."""
    src = as_source(F)
    return _vecs(_level_space(src, complex(z0), 1, "pole"))


def eigenvectors(F, z0):
    """Orthonormal basis of the eigenvector span of F at the zero z0."""
    src = as_source(F)
    return _vecs(_level_space(src, complex(z0), 1, "zero"))


def _max_level(src, z0, kind, data=None):
    if data is None:
        data = local_smith(src, z0)
    m = data.pole_mults if kind == "pole" else data.zero_mults
    return max(m) if m else 0


def max_chain(F, z0, v, kind="pole", _data=None, _exp=None):
    """Longest pole/zero chain starting at v."""
    src = as_source(F)
    z0 = complex(z0)
    v = np.asarray(v, dtype=complex).ravel()
    n = src.n
    if v.size != n:
        raise ValueError(f"vector length {v.size} does not match size {n}")
    if not np.any(v):
        raise ValueError("start vector must be nonzero")
    top = _max_level(src, z0, kind, _data)
    exp = _exp
    if exp is None:
        exp = _Expansion(_fetcher(src, z0, kind), _scale_radius(src, z0))
        exp.blocks(1)
    rho = exp.rho
    best = None
    for level in range(1, top + 1):
        k = level - exp.val - 1
        if k < 0:
            best = [v] + [np.zeros(n, complex)] * (level - 1)
            continue
        T = _toeplitz(exp.blocks(k + 1), k)
        rhs = -T[:, :n] @ v
        A = T[:, n:]
        if A.shape[1]:
            w, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            res = A @ w - rhs
        else:
            w = np.zeros(0, complex)
            res = -rhs
        scale = max(np.linalg.norm(T, 2), exp.ref) * np.linalg.norm(v)
        if np.linalg.norm(res) > CHAIN_TOL * scale:
            break
        blocks = [v] + [w[j * n:(j + 1) * n] / rho ** (j + 1) for j in range(k)]
        best = blocks[:level]
    if best is None:
        what = "pole vector" if kind == "pole" else "eigenvector"
        return Chain((), kind, 0, f"not a {what} at {z0}")
    return Chain(tuple(best), kind, len(best))


def canonical_chains(F, z0, kind="pole"):
    """Greedy basis of start vectors with chain lengths, longest first.

    The multiset of lengths equals the partial pole (or zero)
    multiplicities at z0.
    """
    src = as_source(F)
    z0 = complex(z0)
    data = local_smith(src, z0)
    top = _max_level(src, z0, kind, data)
    if top == 0:
        return []
    exp = _Expansion(_fetcher(src, z0, kind), _scale_radius(src, z0))
    exp.blocks(1)
    n = src.n
    chosen = np.zeros((n, 0), dtype=complex)
    out = []
    for level in range(top, 0, -1):
        V = _level_space(src, z0, level, kind, exp=exp)
        if chosen.shape[1]:
            V = V - chosen @ (chosen.conj().T @ V)
        new = _orth(V)
        for j in range(new.shape[1]):
            u = new[:, j]
            ch = max_chain(src, z0, u, kind, _data=data, _exp=exp)
            out.append(ch)
        chosen = np.hstack([chosen, new]) if new.shape[1] else chosen
    return out
