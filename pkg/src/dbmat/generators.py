"""
Seeded random examples.

All generators use ``numpy.random.default_rng(seed)`` and produce exact
(Gaussian-rational) data, so repeated runs give identical objects.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .ratmat import GaussianRational, Poly, RatMat, RatScalar, Z
from .regions import real_root_count

__all__ = ["gen_rational", "gen_k0", "SamplingError", "MAX_TRIES"]

MAX_TRIES = 1000


class SamplingError(RuntimeError):
    pass


def _gr(c):
    return GaussianRational(Fraction(c.real).limit_denominator(), Fraction(c.imag).limit_denominator())


def _draw_rational(rng, max_n=3, max_poles=6):
    n = int(rng.integers(1, max_n + 1))
    npol = int(rng.integers(1, 4))
    pts = set()
    while len(pts) < npol:
        p = complex(int(rng.integers(-4, 5)), int(rng.integers(-4, 5))) / 2
        if p != 0:
            pts.add(p)
    F = RatMat.eye(n)
    total = 0
    for p in sorted(pts, key=lambda c: (c.real, c.imag)):
        m = int(rng.integers(1, 3))
        if total + m > max_poles:
            m = 1
        total += m
        for k in range(1, m + 1):
            r = int(rng.integers(1, n + 1))
            C = rng.integers(-2, 3, (n, r)) @ rng.integers(-2, 3, (r, n))
            F = F + RatMat.const(C.tolist()) * RatScalar(Poly([1]), (Z - Poly([_gr(p)])) ** k)
    return F


def gen_rational(seed, max_n=3, max_poles=6):
    """Random exact rational matrix (n <= max_n, at most max_poles poles
    counted with order) with det F(0) != 0."""
    rng = np.random.default_rng(seed)
    for _ in range(MAX_TRIES):
        F = _draw_rational(rng, max_n, max_poles)
        if F.den.degree <= 0 or sum(k for _, k in F.poles()) > max_poles:
            continue
        d = F.det()
        if d.is_zero() or not d.num.eval(0) or not d.den.eval(0):
            continue
        return F
    raise SamplingError(f"gen_rational(seed={seed}) failed after {MAX_TRIES} tries")


def _jscr(n):
    i = GaussianRational(0, 1)
    J = [[GaussianRational(0)] * (2 * n) for _ in range(2 * n)]
    for k in range(n):
        J[k][n + k] = i
        J[n + k][k] = -i
    return J


def _mat(a):
    return [[GaussianRational(int(x.real), int(x.imag)) for x in row] for row in a]


def gen_k0(seed, N, n, entry_range=2):
    """Random finite K0 operator (T, U), exact, deterministic per seed.

    T = A + (i/2) U Jscr U* with A Hermitian, so (T - T*)/i = U Jscr U*
    exactly; rank 2n comes from U having full column rank and the
    balanced signature from Jscr.  Samples with a real eigenvalue of T
    are rejected by an exact Sturm test on det(xI - T).
    """
    from .debranges import K0Operator
    m = 2 * n
    if N < m:
        raise ValueError(f"need N >= 2n (N={N}, n={n})")
    rng = np.random.default_rng(seed)
    Jm = RatMat.const(_jscr(n))
    half_i = GaussianRational(0, Fraction(1, 2))
    for _ in range(MAX_TRIES):
        Uc = rng.integers(-entry_range, entry_range + 1, (N, m)) + \
            1j * rng.integers(-entry_range, entry_range + 1, (N, m))
        if np.linalg.matrix_rank(Uc) < m:
            continue
        B = rng.integers(-entry_range, entry_range + 1, (N, N)) + \
            1j * rng.integers(-entry_range, entry_range + 1, (N, N))
        Um = RatMat.const(_mat(Uc))
        Bm = RatMat.const(_mat(B))
        A = (Bm + Bm.sharp()) * GaussianRational(Fraction(1, 2))
        T = A + (Um @ Jm @ Um.sharp()) * half_i
        charp = (RatMat.eye(N) * RatScalar(Z) - T).det().num
        if real_root_count(charp) > 0:
            continue
        Te = [[T.entries()[i][j].num.coeff(0) for j in range(N)] for i in range(N)]
        return K0Operator.from_data(Te, _mat(Uc))
    raise SamplingError(f"gen_k0(seed={seed}, N={N}, n={n}) failed after {MAX_TRIES} tries")
