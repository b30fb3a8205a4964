"""
Truncated Laurent expansions of matrix functions at a point.

A :class:`LaurentMat` stores ``coeffs[k]`` as the coefficient of
``t**(val + k)`` with ``t = z - z0``.  ``val`` is only a lower bound for the
true valuation; leading blocks may vanish.  All arithmetic is in complex
floating point.
"""

from __future__ import annotations

import numpy as np

from .ratmat import RatMat, RationalError

__all__ = ["LaurentMat", "ps_div", "ps_exp", "rat_series", "pole_multiplicity",
           "RatSource"]


def ps_div(a, b, K):
    """First K coefficients of the power series a/b (b[0] != 0)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.zeros(K, dtype=complex) if a.ndim == 1 else np.zeros((K,) + a.shape[1:], complex)
    if b[0] == 0:
        raise ZeroDivisionError("power series with zero constant term")
    for k in range(K):
        acc = a[k].copy() if k < len(a) else np.zeros_like(out[0])
        for j in range(1, min(k, len(b) - 1) + 1):
            acc = acc - b[j] * out[k - j]
        out[k] = acc / b[0]
    return out


def ps_exp(a, K):
    """First K coefficients of exp(a(t))."""
    a = np.zeros(K, complex) if len(a) == 0 else np.asarray(a, dtype=complex)
    y = np.zeros(K, dtype=complex)
    y[0] = np.exp(a[0])
    for k in range(1, K):
        s = 0j
        for j in range(1, min(k, len(a) - 1) + 1):
            s += j * a[j] * y[k - j]
        y[k] = s / k
    return y


class LaurentMat:
    """Truncated Laurent series with matrix coefficients."""

    __slots__ = ("val", "coeffs")

    def __init__(self, val, coeffs):
        self.val = int(val)
        self.coeffs = np.asarray(coeffs, dtype=complex)

    @property
    def nterms(self):
        return self.coeffs.shape[0]

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @classmethod
    def const(cls, mat, K):
        mat = np.asarray(mat, dtype=complex)
        c = np.zeros((K,) + mat.shape, dtype=complex)
        c[0] = mat
        return cls(0, c)

    def __matmul__(self, o):
        K = min(self.nterms, o.nterms)
        a, b = self.coeffs, o.coeffs
        out = np.zeros((K, a.shape[1], b.shape[2]), dtype=complex)
        for k in range(K):
            for j in range(k + 1):
                out[k] += a[j] @ b[k - j]
        return LaurentMat(self.val + o.val, out)

    def scalar_mul(self, s, sval=0):
        """Multiply by a scalar series s with valuation sval."""
        K = min(self.nterms, len(s))
        out = np.zeros((K,) + self.shape, dtype=complex)
        for k in range(K):
            for j in range(k + 1):
                out[k] += s[j] * self.coeffs[k - j]
        return LaurentMat(self.val + sval, out)

    def coeff(self, power):
        """Coefficient of t**power (zero below val)."""
        k = power - self.val
        if k < 0:
            return np.zeros(self.shape, dtype=complex)
        if k >= self.nterms:
            raise RationalError("series truncated too early")
        return self.coeffs[k]

    def true_val(self, tol=1e-12):
        scale = max(np.abs(self.coeffs).max(initial=0), 1e-300)
        for k in range(self.nterms):
            if np.abs(self.coeffs[k]).max() > tol * scale:
                return self.val + k
        return None


def pole_multiplicity(den, z0, tol=1e-7):
    """Multiplicity of z0 as a root of den (0 when not a root)."""
    if den.degree <= 0:
        return 0
    best = None
    for r, m in den.roots():
        d = abs(r - z0)
        if d <= tol * max(1.0, abs(r)) and (best is None or d < best[0]):
            best = (d, m)
    return 0 if best is None else best[1]


def rat_series(R, z0, K):
    """Laurent expansion of a RatMat at z0 with K coefficients."""
    z0 = complex(z0)
    m = pole_multiplicity(R.den, z0)
    dt = R.den.taylor(z0, K + m)[m:]
    num = np.zeros((K, R.rows, R.cols), dtype=complex)
    for i, row in enumerate(R.num):
        for j, p in enumerate(row):
            if not p.is_zero():
                num[:, i, j] = p.taylor(z0, K)
    return LaurentMat(-m, ps_div(num, dt, K))


class RatSource:
    """Series provider for a square RatMat and its inverse."""

    def __init__(self, R):
        if not R.is_square():
            raise RationalError("square matrix required")
        self.R = R
        self.n = R.rows
        self._inv = None

    @property
    def inverse(self):
        if self._inv is None:
            self._inv = self.R.inverse()
        return self._inv

    def series(self, z0, K):
        return rat_series(self.R, z0, K)

    def inv_series(self, z0, K):
        return rat_series(self.inverse, z0, K)

    def det_order(self, z0):
        """Order of z0 as a zero of det (negative for a pole)."""
        d = self.R.det()
        return pole_multiplicity(d.num, z0) - pole_multiplicity(d.den, z0)

    def max_pole_order(self, z0):
        return pole_multiplicity(self.R.den, z0)
