"""
Fixed sample grids for sampled (non-exact) checks.

Defaults: the upper half-plane grid is 21 equispaced abscissae on
[-5, 5] times heights {0.1, 0.5, 1, 2, 5}; the real-line grid is 41
Chebyshev points of [-10, 10]; the contractivity grid is 20 x 20 on
[-5, 5] x (0, 5].  Grid specs on the command line look like
``upper=-5:5:21/0.1,0.5,1,2,5;real=-10:10:41;pj=20``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GridSpec", "DEFAULT_GRID", "parse_grid", "POLE_MARGIN"]

POLE_MARGIN = 1e-6


@dataclass(frozen=True)
class GridSpec:
    x_range: tuple = (-5.0, 5.0)
    nx: int = 21
    heights: tuple = (0.1, 0.5, 1.0, 2.0, 5.0)
    real_range: tuple = (-10.0, 10.0)
    n_real: int = 41
    n_pj: int = 20

    def upper(self):
        xs = np.linspace(self.x_range[0], self.x_range[1], self.nx)
        return np.array([complex(x, y) for y in self.heights for x in xs])

    def lower(self):
        return self.upper().conj()

    def real(self):
        a, b = self.real_range
        k = np.arange(self.n_real)
        x = np.cos(np.pi * (2 * k + 1) / (2 * self.n_real))
        return np.sort(0.5 * (a + b) + 0.5 * (b - a) * x).astype(complex)

    def pj(self):
        xs = np.linspace(self.x_range[0], self.x_range[1], self.n_pj)
        ys = np.linspace(self.x_range[1] / self.n_pj, self.x_range[1], self.n_pj)
        return np.array([complex(x, y) for y in ys for x in xs])


DEFAULT_GRID = GridSpec()


def away_from(points, poles, margin=POLE_MARGIN):
    """Drop sample points within ``margin`` of any pole."""
    poles = [complex(p) for p in poles]
    return np.array([z for z in points
                     if all(abs(z - p) > margin * max(1.0, abs(p)) for p in poles)])


def parse_grid(text):
    """Parse a grid spec string into a GridSpec."""
    if not text:
        return DEFAULT_GRID
    kw = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"grid spec item {part!r} lacks '='")
        key, val = (s.strip() for s in part.split("=", 1))
        try:
            if key == "upper":
                rng, _, hs = val.partition("/")
                a, b, n = rng.split(":")
                kw["x_range"] = (float(a), float(b))
                kw["nx"] = int(n)
                if hs:
                    kw["heights"] = tuple(float(h) for h in hs.split(","))
            elif key == "real":
                a, b, n = val.split(":")
                kw["real_range"] = (float(a), float(b))
                kw["n_real"] = int(n)
            elif key == "pj":
                kw["n_pj"] = int(val)
            else:
                raise ValueError(f"unknown grid key {key!r}")
        except ValueError as err:
            raise ValueError(f"bad grid spec {part!r}: {err}") from None
    g = GridSpec(**kw)
    if g.nx < 1 or g.n_real < 1 or g.n_pj < 1 or any(h <= 0 for h in g.heights):
        raise ValueError("grid sizes must be positive and heights > 0")
    return g
