"""
Rational matrix functions of one complex variable.

Two coefficient modes share one interface:

* exact: coefficients in Q(i), stored as pairs of ``gmpy2.mpq``;
* float: complex double coefficients stored in numpy arrays.

Conversion exact -> float is explicit (``to_float``) and one way.  A
:class:`RatMat` keeps a polynomial numerator matrix over a single monic
common denominator, which is the least common multiple of the entry
denominators.  Entries are exposed as reduced :class:`RatScalar` objects.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number

import numpy as np
from gmpy2 import mpq

__all__ = [
    "GaussianRational", "Poly", "RatScalar", "RatMat", "PoleList",
    "RationalError", "SingularMatrixError", "PoleEvaluationError",
    "poly_roots", "poly_gcd", "poly_lcm", "poly_ext_gcd", "squarefree",
    "residue_sum", "as_gr", "Z", "ZERO_DEGREE",
    "CLUSTER_TOL", "FLOAT_CLUSTER_RADIUS",
]

ZERO_DEGREE = -1
CLUSTER_TOL = 1e-9
# float-mode candidate radius for merging a perturbed multiple root
FLOAT_CLUSTER_RADIUS = 1e-4
_FLOAT_TRIM = 1e-13

_MPQ = type(mpq(0))
_Q0 = mpq(0)
_Q1 = mpq(1)


class RationalError(ValueError):
    pass


class SingularMatrixError(RationalError):
    """Raised for an identically singular matrix; carries a null vector."""

    def __init__(self, message, null_vector=None):
        super().__init__(message)
        self.null_vector = null_vector


class PoleEvaluationError(RationalError):
    def __init__(self, message, pole=None):
        super().__init__(message)
        self.pole = pole


def _q(x):
    if type(x) is _MPQ:
        return x
    if isinstance(x, (int, Fraction, str)) or type(x).__name__ == "mpz":
        return mpq(x)
    if isinstance(x, float):
        return mpq(x)
    raise TypeError(f"cannot use {x!r} as an exact rational")


# ==================
# Gaussian rationals
# ==================

class GaussianRational:
    """Element re + i*im of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def _raw(cls, re, im):
        g = object.__new__(cls)
        g.re = re
        g.im = im
        return g

    def __add__(self, o):
        o = as_gr(o)
        return GaussianRational._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = as_gr(o)
        return GaussianRational._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return as_gr(o) - self

    def __mul__(self, o):
        o = as_gr(o)
        return GaussianRational._raw(self.re * o.re - self.im * o.im,
                                     self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = as_gr(o)
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational._raw((self.re * o.re + self.im * o.im) / n,
                                     (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, o):
        return as_gr(o) / self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (_GR1 / self) ** (-k)
        out, base = _GR1, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return GaussianRational._raw(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __eq__(self, o):
        try:
            o = as_gr(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"GR({self.re})"
        return f"GR({self.re}, {self.im})"


_GR0 = GaussianRational._raw(_Q0, _Q0)
_GR1 = GaussianRational._raw(_Q1, _Q0)
I_UNIT = GaussianRational._raw(_Q0, _Q1)


def as_gr(x):
    """Coerce an exact number to :class:`GaussianRational`.

    Python complex values are accepted only when both parts are integral,
    so that floating noise never leaks silently into exact mode.
    """
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, complex):
        if x.real.is_integer() and x.imag.is_integer():
            return GaussianRational(int(x.real), int(x.imag))
        raise TypeError(f"inexact complex {x!r}; convert explicitly")
    if isinstance(x, np.generic):
        return as_gr(x.item())
    return GaussianRational(_q(x), _Q0)


def _is_exact_number(x):
    if isinstance(x, (GaussianRational, int, Fraction, _MPQ)):
        return True
    if isinstance(x, complex):
        return x.real.is_integer() and x.imag.is_integer()
    if isinstance(x, np.integer):
        return True
    return False


# ===========================
# Rational coefficient vectors
# ===========================

def _conv(a, b):
    if not a or not b:
        return []
    out = [_Q0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _vadd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for j, y in enumerate(b):
        out[j] += y
    return out


def _vsub(a, b):
    n = max(len(a), len(b))
    out = [_Q0] * n
    for j, x in enumerate(a):
        out[j] = x
    for j, y in enumerate(b):
        out[j] -= y
    return out


# ===========
# Polynomials
# ===========

class Poly:
    """Univariate polynomial with ascending coefficients.

    Exact polynomials keep real and imaginary coefficient lists of mpq;
    float polynomials keep a complex128 array.  Trailing zeros are
    stripped, so ``degree`` of the zero polynomial is ``ZERO_DEGREE``.
    """

    __slots__ = ("exact", "_re", "_im", "_c", "_fc", "_roots")

    def __init__(self, coeffs=(), exact=None):
        coeffs = list(coeffs)
        if exact is None:
            exact = all(_is_exact_number(c) for c in coeffs)
        if exact:
            g = [as_gr(c) for c in coeffs]
            self._set_exact([c.re for c in g], [c.im for c in g])
        else:
            self._set_float(np.array([complex(c) for c in coeffs],
                                     dtype=complex))

    # -- construction helpers --

    def _set_exact(self, re, im):
        n = max(len(re), len(im))
        re = list(re) + [_Q0] * (n - len(re))
        im = list(im) + [_Q0] * (n - len(im))
        while n and not re[n - 1] and not im[n - 1]:
            n -= 1
        self.exact = True
        self._re = tuple(re[:n])
        self._im = tuple(im[:n])
        self._c = None
        self._fc = None
        self._roots = None

    def _set_float(self, c):
        c = np.asarray(c, dtype=complex)
        if c.size:
            mag = np.abs(c)
            top = mag.max()
            n = c.size
            while n and (mag[n - 1] == 0 or mag[n - 1] <= _FLOAT_TRIM * top):
                n -= 1
            c = c[:n].copy()
        self.exact = False
        self._re = self._im = None
        self._c = c
        self._fc = c
        self._roots = None

    @classmethod
    def _from_q(cls, re, im):
        p = object.__new__(cls)
        p._set_exact(re, im)
        return p

    @classmethod
    def from_array(cls, c):
        p = object.__new__(cls)
        p._set_float(c)
        return p

    @classmethod
    def const(cls, c, exact=None):
        return cls([c], exact=exact)

    @classmethod
    def monomial(cls, k, c=1):
        return cls([0] * k + [c])

    # -- basic data --

    def __len__(self):
        return len(self._re) if self.exact else self._c.size

    @property
    def degree(self):
        return len(self) - 1 if len(self) else ZERO_DEGREE

    def is_zero(self):
        return len(self) == 0

    def is_const(self):
        return len(self) <= 1

    @property
    def coeffs(self):
        if self.exact:
            return [GaussianRational._raw(a, b)
                    for a, b in zip(self._re, self._im)]
        return list(self._c)

    def coeff(self, k):
        if k < 0 or k >= len(self):
            return _GR0 if self.exact else 0j
        if self.exact:
            return GaussianRational._raw(self._re[k], self._im[k])
        return complex(self._c[k])

    @property
    def lc(self):
        if self.is_zero():
            raise RationalError("zero polynomial has no leading coefficient")
        return self.coeff(len(self) - 1)

    def float_coeffs(self):
        if self._fc is None:
            self._fc = np.array([complex(float(a), float(b))
                                 for a, b in zip(self._re, self._im)],
                                dtype=complex)
        return self._fc

    def to_float(self):
        return self if not self.exact else Poly.from_array(self.float_coeffs())

    def is_real(self):
        if self.exact:
            return not any(self._im)
        return bool(np.all(self._c.imag == 0))

    # -- arithmetic --

    def _coerce(self, o):
        if isinstance(o, Poly):
            if o.exact and not self.exact:
                return o.to_float()
            return o
        return Poly([o], exact=self.exact and _is_exact_number(o))

    def _match(self, o):
        o = self._coerce(o)
        a = self
        if a.exact and not o.exact:
            a = a.to_float()
        return a, o

    def __add__(self, o):
        a, b = self._match(o)
        if a.exact:
            return Poly._from_q(_vadd(a._re, b._re), _vadd(a._im, b._im))
        n = max(a._c.size, b._c.size)
        c = np.zeros(n, dtype=complex)
        c[:a._c.size] += a._c
        c[:b._c.size] += b._c
        return Poly.from_array(c)

    __radd__ = __add__

    def __neg__(self):
        if self.exact:
            return Poly._from_q([-x for x in self._re], [-x for x in self._im])
        return Poly.from_array(-self._c)

    def __sub__(self, o):
        a, b = self._match(o)
        if a.exact:
            return Poly._from_q(_vsub(a._re, b._re), _vsub(a._im, b._im))
        return a + (-b)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, Poly):
            return self.scale(o)
        a, b = self._match(o)
        if a.exact:
            if not any(a._im) and not any(b._im):
                return Poly._from_q(_conv(a._re, b._re), [])
            re = _vsub(_conv(a._re, b._re), _conv(a._im, b._im))
            im = _vadd(_conv(a._re, b._im), _conv(a._im, b._re))
            return Poly._from_q(re, im)
        if a.is_zero() or b.is_zero():
            return Poly.from_array([])
        return Poly.from_array(np.convolve(a._c, b._c))

    def __rmul__(self, o):
        return self.scale(o)

    def scale(self, c):
        if isinstance(c, Poly):
            return self * c
        if self.exact and _is_exact_number(c):
            g = as_gr(c)
            if not g.im:
                return Poly._from_q([x * g.re for x in self._re],
                                    [x * g.re for x in self._im])
            return Poly._from_q(
                [x * g.re - y * g.im for x, y in zip(self._re, self._im)],
                [x * g.im + y * g.re for x, y in zip(self._re, self._im)])
        return Poly.from_array(self.to_float()._c * complex(c))

    def __pow__(self, k):
        out = Poly.const(1, exact=self.exact)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, k):
        """Multiply by z**k."""
        if self.is_zero() or k == 0:
            return self
        if self.exact:
            z = [_Q0] * k
            return Poly._from_q(z + list(self._re), z + list(self._im))
        return Poly.from_array(np.concatenate([np.zeros(k, complex), self._c]))

    def divmod(self, o):
        a, b = self._match(o)
        if b.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if not a.exact:
            if len(a) < len(b):
                return Poly.from_array([]), a
            q, r = np.polynomial.polynomial.polydiv(a._c, b._c)
            return Poly.from_array(q), Poly.from_array(r)
        n, m = len(a), len(b)
        if n < m:
            return Poly._from_q([], []), a
        rr, ri = list(a._re), list(a._im)
        br, bi = b._re, b._im
        lr, li = br[-1], bi[-1]
        den = lr * lr + li * li
        # 1/lc
        inv_r, inv_i = lr / den, -li / den
        qr = [_Q0] * (n - m + 1)
        qi = [_Q0] * (n - m + 1)
        b_real = not any(bi)
        for k in range(n - m, -1, -1):
            tr, ti = rr[k + m - 1], ri[k + m - 1]
            if not tr and not ti:
                continue
            cr = tr * inv_r - ti * inv_i
            ci = tr * inv_i + ti * inv_r
            qr[k], qi[k] = cr, ci
            for j in range(m):
                xr, xi = br[j], bi[j]
                if b_real:
                    if xr:
                        rr[k + j] -= cr * xr
                        ri[k + j] -= ci * xr
                elif xr or xi:
                    rr[k + j] -= cr * xr - ci * xi
                    ri[k + j] -= cr * xi + ci * xr
        return Poly._from_q(qr, qi), Poly._from_q(rr[:m - 1], ri[:m - 1])

    def __floordiv__(self, o):
        return self.divmod(o)[0]

    def __mod__(self, o):
        return self.divmod(o)[1]

    def exact_div(self, o):
        """Quotient of a division known to be exact."""
        q, r = self.divmod(o)
        if self.exact and not r.is_zero():
            raise RationalError("inexact polynomial division")
        return q

    def monic(self):
        if self.is_zero():
            return self
        lc = self.lc
        if self.exact:
            return self.scale(_GR1 / lc)
        return Poly.from_array(self._c / lc)

    # -- calculus, involution, evaluation --

    def derivative(self):
        if len(self) <= 1:
            return Poly([], exact=self.exact) if self.exact else Poly.from_array([])
        if self.exact:
            return Poly._from_q([k * self._re[k] for k in range(1, len(self))],
                                [k * self._im[k] for k in range(1, len(self))])
        return Poly.from_array(self._c[1:] * np.arange(1, self._c.size))

    def sharp(self):
        """p#(z) = conj(p(conj z)): conjugate the coefficients."""
        if self.exact:
            return Poly._from_q(self._re, [-x for x in self._im])
        return Poly.from_array(self._c.conj())

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        if self.exact and _is_exact_number(z):
            g = as_gr(z)
            accr, acci = _Q0, _Q0
            for a, b in zip(reversed(self._re), reversed(self._im)):
                accr, acci = (accr * g.re - acci * g.im + a,
                              accr * g.im + acci * g.re + b)
            return GaussianRational._raw(accr, acci)
        c = self.float_coeffs() if self.exact else self._c
        acc = 0j
        z = complex(z)
        for a in c[::-1]:
            acc = acc * z + a
        return complex(acc)

    def eval_many(self, zs):
        zs = np.asarray(zs, dtype=complex)
        c = self.float_coeffs() if self.exact else self._c
        out = np.zeros(zs.shape, dtype=complex)
        for a in c[::-1]:
            out = out * zs + a
        return out

    def taylor(self, z0, nterms=None):
        """Float Taylor coefficients of p(z0 + t)."""
        c = (self.float_coeffs() if self.exact else self._c).astype(complex)
        n = c.size
        z0 = complex(z0)
        out = c.copy()
        # repeated synthetic division
        for k in range(n):
            for j in range(n - 2, k - 1, -1):
                out[j] += z0 * out[j + 1]
        if nterms is not None:
            if nterms <= n:
                return out[:nterms]
            return np.concatenate([out, np.zeros(nterms - n, complex)])
        return out

    def taylor_scale(self, z0, k):
        """Magnitude scale for the k-th Taylor coefficient at z0."""
        c = np.abs(self.float_coeffs() if self.exact else self._c)
        r = abs(complex(z0))
        tot = 0.0
        for j in range(k, c.size):
            tot += c[j] * math.comb(j, k) * r ** (j - k)
        return tot

    def vanishing_order(self, z0, tol=1e-9, cap=None, scale=None):
        """Numerical order of vanishing at z0 (relative Taylor test).

        ``scale(k)`` optionally supplies the reference magnitude for the
        k-th coefficient; by default it is this polynomial's own scale.
        """
        if self.is_zero():
            return math.inf
        t = self.taylor(z0)
        top = cap if cap is not None else len(t)
        for k in range(min(top, len(t))):
            ref = scale(k) if scale is not None else self.taylor_scale(z0, k)
            if abs(t[k]) > tol * max(ref, 1e-300):
                return k
        return min(top, len(t))

    # -- comparison --

    def __eq__(self, o):
        if not isinstance(o, Poly):
            if isinstance(o, Number) or isinstance(o, GaussianRational):
                o = Poly([o], exact=self.exact and _is_exact_number(o))
            else:
                return NotImplemented
        if self.exact and o.exact:
            return self._re == o._re and self._im == o._im
        a = self.to_float()._c
        b = o.to_float()._c
        return a.shape == b.shape and bool(np.all(a == b))

    def __hash__(self):
        if self.exact:
            return hash((self._re, self._im))
        return hash(self._c.tobytes())

    def isclose(self, o, tol=1e-9):
        a = self.to_float()._c
        b = (o if isinstance(o, Poly) else Poly([o])).to_float()._c
        n = max(a.size, b.size)
        aa = np.zeros(n, complex)
        bb = np.zeros(n, complex)
        aa[:a.size] = a
        bb[:b.size] = b
        scale = max(np.abs(aa).max(initial=0), np.abs(bb).max(initial=0), 1e-300)
        return bool(np.abs(aa - bb).max(initial=0) <= tol * scale)

    def roots(self):
        if self._roots is None:
            self._roots = poly_roots(self)
        return self._roots

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if (self.exact and not c) or (not self.exact and c == 0):
                continue
            cs = _fmt(c)
            terms.append(cs if k == 0 else f"{cs}*z" + (f"^{k}" if k > 1 else ""))
        return "Poly(" + " + ".join(terms) + ")"


def _fmt(c):
    if isinstance(c, GaussianRational):
        if not c.im:
            return str(c.re)
        if not c.re:
            return f"{c.im}i"
        return f"({c.re}+{c.im}i)"
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.6g}"
    return f"({c.real:.6g}{c.imag:+.6g}j)"


Z = Poly([0, 1])


def _zero_like(p):
    return Poly._from_q([], []) if p.exact else Poly.from_array([])


def _one_like(p):
    return Poly._from_q([_Q1], []) if p.exact else Poly.from_array([1.0])


# prime p = 1 mod 4 and a square root of -1 mod p, for the coprimality filter
_P = 4611686018427387817
_SQRT_M1 = 4490822397581186023


def _mod_p(p):
    """Coefficients of an exact Poly mod _P (i -> _SQRT_M1), or None if bad."""
    out = []
    for re, im in zip(p._re, p._im):
        v = 0
        for x, unit in ((re, 1), (im, _SQRT_M1)):
            if x:
                d = int(x.denominator) % _P
                if not d:
                    return None
                v += int(x.numerator) * unit * pow(d, -1, _P)
        out.append(v % _P)
    return out if out and out[-1] else None


def _coprime_mod_p(a, b):
    """True only if gcd(a, b) = 1 is certified by a good reduction mod _P."""
    x, y = _mod_p(a), _mod_p(b)
    if x is None or y is None:
        return False
    while y:
        inv = pow(y[-1], -1, _P)
        while len(x) >= len(y):
            c = x[-1] * inv % _P
            k = len(x) - len(y)
            for j, t in enumerate(y):
                x[k + j] = (x[k + j] - c * t) % _P
            while x and not x[-1]:
                x.pop()
            if not x:
                break
        x, y = y, x
    return len(x) == 1


def poly_gcd(a, b, tol=CLUSTER_TOL):
    """Monic gcd.  Exact Euclid in exact mode, root matching in float mode."""
    if not (a.exact and b.exact):
        return _float_gcd(a.to_float(), b.to_float(), tol)
    if a.degree > 0 and b.degree > 0 and _coprime_mod_p(a, b):
        return _one_like(a)
    while not b.is_zero():
        a, b = b, (a % b).monic()
    return a.monic()


def poly_lcm(a, b):
    if a.is_zero() or b.is_zero():
        return _zero_like(a)
    return (a * b).exact_div(poly_gcd(a, b)).monic()


def poly_ext_gcd(a, b):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), exact mode."""
    r0, r1 = a, b
    s0, s1 = Poly.const(1), Poly.const(0)
    t0, t1 = Poly.const(0), Poly.const(1)
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    inv = _GR1 / r0.lc
    return r0.scale(inv), s0.scale(inv), t0.scale(inv)


def squarefree(p):
    """Yun decomposition: list of (factor, multiplicity), exact mode."""
    if p.degree <= 0:
        return []
    p = p.monic()
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a)
    c = dp.exact_div(a)
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        a = poly_gcd(b, d)
        b = b.exact_div(a)
        c = d.exact_div(a)
        d = c - b.derivative()
        if a.degree > 0:
            out.append((a, k))
        k += 1
    return out


def _simple_roots(c):
    c = np.asarray(c, dtype=complex)
    if c.size <= 1:
        return np.zeros(0, complex)
    if c.size == 2:
        return np.array([-c[0] / c[1]])
    return np.polynomial.polynomial.polyroots(c)


def _newton_polish(c, r, steps=3):
    dc = c[1:] * np.arange(1, c.size)
    for _ in range(steps):
        f = np.polynomial.polynomial.polyval(r, c)
        df = np.polynomial.polynomial.polyval(r, dc)
        ok = np.abs(df) > 0
        step = np.where(ok, f / np.where(ok, df, 1), 0)
        r = r - step
    return r


def _sort_roots(pairs):
    return sorted(pairs, key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))


def poly_roots(p, cluster_tol=CLUSTER_TOL):
    """Roots of a nonzero polynomial with multiplicities.

    Exact mode: multiplicities come from the exact square-free
    decomposition and each square-free factor is solved through its
    companion matrix.  Float mode: companion eigenvalues, then nearby roots
    are merged when the polynomial vanishes to the merged order at the
    cluster mean.
    """
    if p.is_zero():
        raise RationalError("indeterminate roots")
    if p.degree == 0:
        return []
    if p.exact:
        out = []
        for f, m in squarefree(p):
            c = f.float_coeffs()
            for r in _newton_polish(c, _simple_roots(c)):
                out.append((complex(r), m))
        return _sort_roots(_merge_close(out, cluster_tol))
    c = p._c
    raw = _simple_roots(c)
    return _sort_roots(_cluster_float(p, raw, cluster_tol))


def _merge_close(pairs, tol):
    out = []
    for r, m in pairs:
        for k, (s, n) in enumerate(out):
            if abs(r - s) <= tol * max(1.0, abs(s)):
                out[k] = ((s * n + r * m) / (n + m), n + m)
                break
        else:
            out.append((r, m))
    return out


def _cluster_float(p, raw, tol):
    raw = list(raw)
    used = [False] * len(raw)
    out = []
    order = sorted(range(len(raw)), key=lambda k: abs(raw[k]))
    for k in order:
        if used[k]:
            continue
        r = raw[k]
        near = [j for j in range(len(raw)) if not used[j]
                and abs(raw[j] - r) <= FLOAT_CLUSTER_RADIUS * max(1.0, abs(r))]
        tight = [j for j in near if abs(raw[j] - r) <= tol * max(1.0, abs(r))]
        group = tight
        if len(near) > len(tight):
            center = np.mean([raw[j] for j in near])
            if p.vanishing_order(center, tol=1e-7, cap=len(near)) >= len(near):
                group = near
        for j in group:
            used[j] = True
        out.append((complex(np.mean([raw[j] for j in group])), len(group)))
    return out


def _float_gcd(a, b, tol):
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    g = Poly.from_array([1.0])
    for r, m in a.roots():
        k = min(m, b.vanishing_order(r, tol=tol, cap=m))
        for _ in range(k):
            g = g * Poly.from_array([-r, 1.0])
    return g


def residue_sum(num, q1, q2):
    """Exact sum of residues of num/(q1*q2) over the roots of q1.

    Requires gcd(q1, q2) = 1.  With t*q2 = 1 mod q1 the sum equals the
    coefficient of z**(deg q1 - 1) of (num*t mod q1) divided by lc(q1).
    """
    g, s, t = poly_ext_gcd(q1, q2)
    if g.degree > 0:
        raise RationalError("residue_sum needs coprime factors")
    d = q1.degree
    if d <= 0:
        return _GR0
    r = (num * t) % q1
    return r.coeff(d - 1) / q1.lc


# ===============
# Rational scalar
# ===============

class RatScalar:
    """Reduced quotient num/den with monic den."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce=True, tol=CLUSTER_TOL):
        if not isinstance(num, Poly):
            num = Poly([num])
        if den is None:
            den = _one_like(num)
        elif not isinstance(den, Poly):
            den = Poly([den])
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.exact != den.exact:
            num, den = num.to_float(), den.to_float()
        if reduce:
            num, den = _reduce_pair(num, den, tol)
        self.num = num
        self.den = den

    @property
    def exact(self):
        return self.num.exact

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        d = self.den.eval(z)
        if (isinstance(d, GaussianRational) and not d) or d == 0:
            raise PoleEvaluationError(f"evaluation at pole {z}", z)
        return self.num.eval(z) / d

    def _bin(self, o, op):
        if not isinstance(o, RatScalar):
            o = RatScalar(o if isinstance(o, Poly) else Poly([o], exact=self.exact and _is_exact_number(o)))
        if op == "add":
            return RatScalar(self.num * o.den + o.num * self.den, self.den * o.den)
        if op == "sub":
            return RatScalar(self.num * o.den - o.num * self.den, self.den * o.den)
        if op == "mul":
            return RatScalar(self.num * o.num, self.den * o.den)
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatScalar(self.num * o.den, self.den * o.num)

    def __add__(self, o):
        return self._bin(o, "add")

    __radd__ = __add__

    def __sub__(self, o):
        return self._bin(o, "sub")

    def __rsub__(self, o):
        return (-self)._bin(o, "add")

    def __mul__(self, o):
        return self._bin(o, "mul")

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._bin(o, "div")

    def __rtruediv__(self, o):
        return RatScalar(o if isinstance(o, Poly) else Poly([o]))._bin(self, "div")

    def __neg__(self):
        return RatScalar(-self.num, self.den, reduce=False)

    def sharp(self):
        return RatScalar(self.num.sharp(), self.den.sharp(), reduce=False)

    def derivative(self):
        return RatScalar(self.num.derivative() * self.den
                         - self.num * self.den.derivative(), self.den * self.den)

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.degree == 0

    def relative_degree(self):
        """deg num - deg den (negative means strictly proper)."""
        if self.num.is_zero():
            return -math.inf
        return self.num.degree - self.den.degree

    def poles(self):
        return PoleList(self.den.roots())

    def __eq__(self, o):
        if not isinstance(o, RatScalar):
            o = RatScalar(o if isinstance(o, Poly) else Poly([o]))
        return self.num * o.den == o.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def to_float(self):
        return RatScalar(self.num.to_float(), self.den.to_float(), reduce=False)

    def __repr__(self):
        if self.den.degree == 0:
            return f"RatScalar({self.num!r})"
        return f"RatScalar({self.num!r} / {self.den!r})"


def _reduce_pair(num, den, tol):
    if num.is_zero():
        return num, _one_like(den)
    if num.exact:
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.exact_div(g)
            den = den.exact_div(g)
    else:
        num, den = _float_cancel([num], den, tol)
        num = num[0]
    lc = den.lc
    if num.exact:
        if lc != _GR1:
            inv = _GR1 / lc
            num, den = num.scale(inv), den.scale(inv)
    else:
        num, den = Poly.from_array(num._c / lc), Poly.from_array(den._c / lc)
    return num, den


def _float_cancel(nums, den, tol, roots=None):
    """Cancel common roots of a float denominator and all numerators."""
    if den.degree <= 0:
        return nums, den
    roots = den.roots() if roots is None else roots
    live = [p for p in nums if not p.is_zero()]
    for r, m in roots:
        k = m

        def scale(j, r=r):
            return max(p.taylor_scale(r, j) for p in live)

        for p in live:
            if k == 0:
                break
            k = min(k, p.vanishing_order(r, tol=tol, cap=k, scale=scale))
        if k:
            lin = Poly.from_array([-r, 1.0]) ** k
            nums = [p if p.is_zero() else p.divmod(lin)[0] for p in nums]
            den = den.divmod(lin)[0]
    return nums, den


# ========
# PoleList
# ========

class PoleList(list):
    """List of (point, order) pairs with distinct points."""

    def points(self):
        return [p for p, _ in self]

    def order_at(self, z, tol=CLUSTER_TOL):
        for p, k in self:
            if abs(p - z) <= tol * max(1.0, abs(p)) * 1e3:
                return k
        return 0


# ===============
# Rational matrix
# ===============

class RatMat:
    """Rational matrix N(z)/d(z) with monic d = lcm of entry denominators."""

    __slots__ = ("num", "den", "rows", "cols", "_entries", "_poles")

    def __init__(self, num, den=None, canonical=False, tol=CLUSTER_TOL,
                 den_roots=None):
        num = [list(r) for r in num]
        rows = len(num)
        cols = len(num[0]) if rows else 0
        if rows == 0 or cols == 0 or any(len(r) != cols for r in num):
            raise RationalError("matrix must be rectangular and nonempty")
        exact = all(p.exact for r in num for p in r) and (den is None or den.exact)
        if den is None:
            den = Poly.const(1, exact=exact)
        if not exact:
            num = [[p.to_float() for p in r] for r in num]
            den = den.to_float()
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.rows, self.cols = rows, cols
        if not canonical:
            num, den = _canonical(num, den, tol, den_roots)
        self.num = tuple(tuple(r) for r in num)
        self.den = den
        self._entries = None
        self._poles = None

    # -- constructors --

    @classmethod
    def from_entries(cls, grid):
        """Build from a grid of RatScalar / Poly / numbers."""
        grid = [[_as_rs(x) for x in row] for row in grid]
        exact = all(x.exact for row in grid for x in row)
        if not exact:
            grid = [[x.to_float() for x in row] for row in grid]
        den = Poly.const(1, exact=exact)
        for row in grid:
            for x in row:
                if x.den.degree > 0:
                    den = poly_lcm(den, x.den) if exact else den * x.den
        num = [[x.num * den.exact_div(x.den) if exact else
                x.num * den.divmod(x.den)[0] for x in row] for row in grid]
        if exact:
            return cls(num, den, canonical=True)
        return cls(num, den)

    @classmethod
    def const(cls, mat, exact=None):
        mat = [list(r) for r in (mat.tolist() if isinstance(mat, np.ndarray) else mat)]
        if exact is None:
            exact = all(_is_exact_number(x) for r in mat for x in r)
        return cls([[Poly([x], exact=exact) for x in r] for r in mat],
                   Poly.const(1, exact=exact), canonical=True)

    @classmethod
    def eye(cls, n, exact=True):
        return cls.const([[1 if i == j else 0 for j in range(n)] for i in range(n)],
                         exact=exact)

    @classmethod
    def zeros(cls, r, c, exact=True):
        return cls.const([[0] * c for _ in range(r)], exact=exact)

    @classmethod
    def scalar(cls, s):
        return cls.from_entries([[s]])

    @classmethod
    def diag(cls, items):
        items = [_as_rs(x) for x in items]
        n = len(items)
        zero = RatScalar(Poly.const(0, exact=items[0].exact))
        return cls.from_entries([[items[i] if i == j else zero for j in range(n)]
                                 for i in range(n)])

    @classmethod
    def block(cls, blocks):
        """Assemble from a 2-D list of RatMat blocks."""
        den = Poly.const(1, exact=all(b.exact for r in blocks for b in r))
        for r in blocks:
            for b in r:
                den = poly_lcm(den, b.den) if den.exact else den * b.den
        rows = []
        for brow in blocks:
            h = brow[0].rows
            if any(b.rows != h for b in brow):
                raise RationalError("block rows do not conform")
            for i in range(h):
                row = []
                for b in brow:
                    f = den.exact_div(b.den) if den.exact else den.divmod(b.den)[0]
                    row.extend(p * f for p in b.num[i])
                rows.append(row)
        return cls(rows, den, canonical=den.exact)

    # -- properties --

    @property
    def exact(self):
        return self.den.exact

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        if isinstance(i, slice) or isinstance(j, slice):
            ri = range(self.rows)[i] if isinstance(i, slice) else [i]
            cj = range(self.cols)[j] if isinstance(j, slice) else [j]
            return RatMat([[self.num[a][b] for b in cj] for a in ri], self.den)
        return self.entries()[i][j]

    def entries(self):
        if self._entries is None:
            self._entries = [[RatScalar(p, self.den) for p in r] for r in self.num]
        return self._entries

    def blocks(self, n=None):
        """The four square blocks (a11, a12, a21, a22) of a 2n x 2n matrix."""
        if n is None:
            n = self.rows // 2
        if self.rows != 2 * n or self.cols != 2 * n:
            raise RationalError("size mismatch: expected 2n x 2n")
        s1, s2 = slice(0, n), slice(n, 2 * n)
        return self[s1, s1], self[s1, s2], self[s2, s1], self[s2, s2]

    def is_polynomial(self):
        return self.den.degree == 0

    def is_zero(self):
        return all(p.is_zero() for r in self.num for p in r)

    def is_square(self):
        return self.rows == self.cols

    def max_degree(self):
        return max(p.degree for r in self.num for p in r)

    def poly_entries(self):
        """Entries of a polynomial matrix (den is 1)."""
        if not self.is_polynomial():
            raise RationalError("matrix has poles")
        c = self.den.coeff(0)
        inv = (_GR1 / c) if self.exact else 1 / c
        return [[p.scale(inv) for p in r] for r in self.num]

    # -- arithmetic --

    def _conform(self, o):
        if self.exact and not o.exact:
            return self.to_float(), o
        if o.exact and not self.exact:
            return self, o.to_float()
        return self, o

    def _addsub(self, o, sign):
        o = _as_ratmat(o, self)
        if o.shape != self.shape:
            raise RationalError(f"dimension mismatch {self.shape} vs {o.shape}")
        a, b = self._conform(o)
        if a.den == b.den:
            den, fa, fb = a.den, None, None
        elif a.exact:
            g = poly_gcd(a.den, b.den)
            fa, fb = b.den.exact_div(g), a.den.exact_div(g)
            den = a.den * fa
        else:
            den, fa, fb = a.den * b.den, b.den, a.den
        num = []
        for ra, rb in zip(a.num, b.num):
            row = []
            for x, y in zip(ra, rb):
                x = x if fa is None else x * fa
                y = y if fb is None else y * fb
                row.append(x + y if sign > 0 else x - y)
            num.append(row)
        return RatMat(num, den)

    def __add__(self, o):
        return self._addsub(o, 1)

    __radd__ = __add__

    def __sub__(self, o):
        return self._addsub(o, -1)

    def __rsub__(self, o):
        return (-self)._addsub(o, 1)

    def __neg__(self):
        return RatMat([[-p for p in r] for r in self.num], self.den, canonical=True)

    def __matmul__(self, o):
        if not isinstance(o, RatMat):
            return NotImplemented
        if self.cols != o.rows:
            raise RationalError(f"dimension mismatch {self.shape} @ {o.shape}")
        a, b = self._conform(o)
        num = []
        for i in range(a.rows):
            row = []
            for j in range(b.cols):
                acc = None
                for k in range(a.cols):
                    x, y = a.num[i][k], b.num[k][j]
                    if x.is_zero() or y.is_zero():
                        continue
                    t = x * y
                    acc = t if acc is None else acc + t
                row.append(acc if acc is not None else _zero_like(a.den))
            num.append(row)
        return RatMat(num, a.den * b.den)

    def __mul__(self, s):
        """Multiply by a scalar (number, Poly or RatScalar)."""
        if isinstance(s, RatMat):
            return NotImplemented
        s = _as_rs(s)
        if not s.exact and self.exact:
            return self.to_float() * s
        return RatMat([[p * s.num for p in r] for r in self.num], self.den * s.den)

    __rmul__ = __mul__

    def __truediv__(self, s):
        s = _as_rs(s)
        return self * RatScalar(s.den, s.num)

    @property
    def T(self):
        return RatMat([[self.num[i][j] for i in range(self.rows)]
                       for j in range(self.cols)], self.den, canonical=True)

    def sharp(self):
        """A#(z) = A(conj z)^*: conjugate coefficients and transpose."""
        return RatMat([[self.num[i][j].sharp() for i in range(self.rows)]
                       for j in range(self.cols)], self.den.sharp(), canonical=True)

    def derivative(self):
        d = self.den
        dd = d.derivative()
        return RatMat([[p.derivative() * d - p * dd for p in r] for r in self.num],
                      d * d)

    def hstack(self, o):
        return RatMat.block([[self, o]])

    def vstack(self, o):
        return RatMat.block([[self], [o]])

    # -- inverse / determinant --

    def det(self):
        if not self.is_square():
            raise RationalError("det of non-square matrix")
        dn, _ = _bareiss_det(self.num)
        return RatScalar(dn, self.den ** self.rows)

    def inverse(self):
        if not self.is_square():
            raise RationalError("inverse of non-square matrix")
        adj, detn = _bareiss_inverse(self.num)
        if detn is None:
            raise SingularMatrixError("identically singular matrix",
                                      _poly_null_vector(self))
        return RatMat([[p * self.den for p in r] for r in adj], detn)

    # -- evaluation --

    def eval(self, z):
        """Evaluate at z: exact GaussianRational matrix (list of lists) when
        both are exact, else a complex numpy array."""
        if self.exact and _is_exact_number(z):
            d = self.den.eval(z)
            if not d:
                raise PoleEvaluationError(f"evaluation at pole {complex(as_gr(z))}", z)
            inv = _GR1 / d
            return [[p.eval(z) * inv for p in r] for r in self.num]
        z = complex(z)
        self._check_pole(z)
        return self.eval_many(np.array([z]))[0]

    def __call__(self, z):
        return self.eval(z)

    def _check_pole(self, z, tol=1e-12):
        if self.den.degree <= 0:
            return
        for r, _ in self.den.roots():
            if abs(z - r) <= tol * max(1.0, abs(r)):
                raise PoleEvaluationError(f"evaluation at pole {r}", r)
        if self.den.eval(z) == 0:
            raise PoleEvaluationError(f"evaluation at pole {z}", z)

    def eval_many(self, zs):
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        d = self.den.eval_many(zs)
        out = np.empty((zs.size, self.rows, self.cols), dtype=complex)
        for i, r in enumerate(self.num):
            for j, p in enumerate(r):
                out[:, i, j] = p.eval_many(zs)
        return out / d[:, None, None]

    def to_float(self):
        if not self.exact:
            return self
        return RatMat([[p.to_float() for p in r] for r in self.num],
                      self.den.to_float(), canonical=True)

    # -- poles --

    def poles(self):
        """Union of entry poles, order = max entry order."""
        if self._poles is None:
            found = []
            for row in self.entries():
                for e in row:
                    if e.den.degree > 0:
                        found.extend(e.den.roots())
            merged = []
            for r, m in found:
                for k, (s, n) in enumerate(merged):
                    if abs(r - s) <= 1e3 * CLUSTER_TOL * max(1.0, abs(s)):
                        merged[k] = (s, max(n, m))
                        break
                else:
                    merged.append((r, m))
            self._poles = PoleList(_sort_roots(merged))
        return self._poles

    # -- comparison --

    def __eq__(self, o):
        if not isinstance(o, RatMat):
            return NotImplemented
        if o.shape != self.shape:
            return False
        for ra, rb in zip(self.num, o.num):
            for x, y in zip(ra, rb):
                if not (x * o.den == y * self.den):
                    return False
        return True

    __hash__ = None

    def _cross_arrays(self, o):
        out = []
        for ra, rb in zip(self.num, o.num):
            for x, y in zip(ra, rb):
                a = (x * o.den).to_float()._c
                b = (y * self.den).to_float()._c
                n = max(a.size, b.size)
                aa = np.zeros(n, complex)
                bb = np.zeros(n, complex)
                aa[:a.size] = a
                bb[:b.size] = b
                out.append((aa, bb))
        return out

    def residual(self, o):
        """Max coefficient mismatch of the cross-multiplied identity,
        relative to the largest coefficient on either side."""
        if o.shape != self.shape:
            raise RationalError(f"dimension mismatch {self.shape} vs {o.shape}")
        pairs = self._cross_arrays(o)
        sc = max(max(np.abs(a).max(initial=0), np.abs(b).max(initial=0))
                 for a, b in pairs)
        err = max(np.abs(a - b).max(initial=0) for a, b in pairs)
        return float(err / sc) if sc > 0 else 0.0

    def isclose(self, o, tol=1e-9):
        return o.shape == self.shape and self.residual(o) <= tol

    def equals(self, o, tol=1e-9):
        """Exact identity in exact mode, toleranced identity otherwise."""
        if self.exact and o.exact:
            return self == o
        return self.isclose(o, tol)

    def __repr__(self):
        rows = [", ".join(repr(e) for e in r) for r in self.entries()]
        return "RatMat([" + "; ".join(rows) + "])"


def _as_rs(x):
    if isinstance(x, RatScalar):
        return x
    if isinstance(x, Poly):
        return RatScalar(x)
    return RatScalar(Poly([x], exact=_is_exact_number(x)))


def _as_ratmat(o, like):
    if isinstance(o, RatMat):
        return o
    s = _as_rs(o)
    if like.rows != like.cols:
        raise RationalError("scalar shift needs a square matrix")
    return RatMat.eye(like.rows, exact=s.exact) * s


def _canonical(num, den, tol, den_roots=None):
    if den.exact:
        g = den
        for r in num:
            for p in r:
                if g.degree <= 0:
                    break
                if not p.is_zero():
                    g = poly_gcd(g, p)
        if g.degree > 0:
            num = [[p.exact_div(g) for p in r] for r in num]
            den = den.exact_div(g)
        lc = den.lc
        if lc != _GR1:
            inv = _GR1 / lc
            num = [[p.scale(inv) for p in r] for r in num]
            den = den.scale(inv)
        return num, den
    flat = [p for r in num for p in r]
    flat, den = _float_cancel(flat, den, tol, den_roots)
    lc = den.lc
    den = Poly.from_array(den._c / lc)
    flat = [Poly.from_array(p._c / lc) for p in flat]
    c = len(num[0])
    return [flat[i * c:(i + 1) * c] for i in range(len(num))], den


# ==========================
# Fraction-free elimination
# ==========================

def _pdiv(a, b):
    return a.exact_div(b) if a.exact else a.divmod(b)[0]


def _pick_pivot(m, k, n):
    best = None
    for i in range(k, n):
        if not m[i][k].is_zero():
            if best is None or len(m[i][k]) < len(m[best][k]):
                best = i
    return best


def _bareiss_det(num):
    n = len(num)
    m = [list(r) for r in num]
    one = _one_like(m[0][0])
    prev = one
    sign = 1
    for k in range(n - 1):
        p = _pick_pivot(m, k, n)
        if p is None:
            return _zero_like(one), 0
        if p != k:
            m[k], m[p] = m[p], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = _pdiv(m[k][k] * m[i][j] - m[i][k] * m[k][j], prev)
        prev = m[k][k]
    d = m[n - 1][n - 1]
    return (d if sign > 0 else -d), sign


def _bareiss_inverse(num):
    """Fraction-free Gauss-Jordan on [N | I]; returns (adj-like X, d) with
    N^{-1} = X / d, or (None, None) when N is identically singular."""
    n = len(num)
    one = _one_like(num[0][0])
    zero = _zero_like(one)
    m = [list(r) + [one if i == j else zero for j in range(n)]
         for i, r in enumerate(num)]
    prev = one
    for k in range(n):
        p = _pick_pivot(m, k, n)
        if p is None:
            return None, None
        if p != k:
            m[k], m[p] = m[p], m[k]
        pk = m[k][k]
        for i in range(n):
            if i == k:
                continue
            mik = m[i][k]
            for j in range(2 * n):
                if j == k:
                    continue
                m[i][j] = _pdiv(pk * m[i][j] - mik * m[k][j], prev)
            m[i][k] = zero
        prev = pk
    d = m[0][0]
    return [r[n:] for r in m], d


def _poly_null_vector(A):
    """Polynomial null vector of an identically singular square RatMat."""
    n = A.rows
    m = [[RatScalar(p) for p in r] for r in A.num]
    pivcols = []
    row = 0
    for col in range(n):
        piv = next((i for i in range(row, n) if not m[i][col].is_zero()), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = RatScalar(m[row][col].den, m[row][col].num)
        m[row] = [x * inv for x in m[row]]
        for i in range(n):
            if i != row and not m[i][col].is_zero():
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[row])]
        pivcols.append(col)
        row += 1
    free = next(c for c in range(n) if c not in pivcols)
    vec = [RatScalar(Poly.const(0, exact=A.exact)) for _ in range(n)]
    vec[free] = RatScalar(Poly.const(1, exact=A.exact))
    for r, c in enumerate(pivcols):
        vec[c] = -m[r][free]
    den = Poly.const(1, exact=A.exact)
    for v in vec:
        den = poly_lcm(den, v.den) if A.exact else den * v.den
    return [(v.num * _pdiv(den, v.den)) for v in vec]
