"""Chebyshev-Gauss collocation on a closed interval.

All radial profiles are sampled at the interior Chebyshev-Gauss nodes of the
moment interval (endpoints are never collocated, so removable 0/0 endpoint
ratios never get evaluated).  Quadrature uses Fejer's first rule, which is
spectrally accurate for smooth integrands and has positive weights.
Differentiation and off-grid evaluation go through the barycentric form of
the interpolating polynomial.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatch

__all__ = ["ChebGrid", "gauss_legendre_01"]


def _fejer1_weights(n: int) -> np.ndarray:
    """Fejer-I quadrature weights on [-1, 1] at the n Chebyshev-Gauss nodes."""
    j = np.arange(n)
    theta = (2.0 * j + 1.0) * np.pi / (2.0 * n)
    m = np.arange(1, n // 2 + 1)
    # w_j = (2/n) * (1 - 2 * sum_m cos(2 m theta_j) / (4 m^2 - 1))
    c = np.cos(2.0 * np.outer(theta, m))
    w = (2.0 / n) * (1.0 - 2.0 * (c / (4.0 * m**2 - 1.0)).sum(axis=1))
    return w


class ChebGrid:
    """Interior Chebyshev-Gauss collocation grid on [lo, hi].

    Attributes
    ----------
    x : ndarray
        Nodes in ascending order, strictly inside (lo, hi).
    w : ndarray
        Fejer-I quadrature weights for integrals of dx over [lo, hi].
    """

    def __init__(self, lo: float, hi: float, n: int):
        if n < 4:
            raise ValueError("grid needs at least 4 nodes")
        if not hi > lo:
            raise ValueError("empty interval")
        self.lo = float(lo)
        self.hi = float(hi)
        self.n = int(n)
        j = np.arange(n)
        theta = (2.0 * j + 1.0) * np.pi / (2.0 * n)
        xi = np.cos(theta)              # descending in (-1, 1)
        bary = ((-1.0) ** j) * np.sin(theta)
        # ascending node order; permute barycentric weights along with nodes
        self._xi = xi[::-1].copy()
        self._bary = bary[::-1].copy()
        half = 0.5 * (hi - lo)
        self.x = lo + half * (self._xi + 1.0)
        self.w = _fejer1_weights(n)[::-1] * half
        self._D = None
        for a in (self._xi, self._bary, self.x, self.w):
            a.setflags(write=False)

    # -- differentiation -------------------------------------------------

    @property
    def D(self) -> np.ndarray:
        """Spectral differentiation matrix (d/dx) at the nodes."""
        if self._D is None:
            x, b = self.x, self._bary
            diff = x[:, None] - x[None, :]
            np.fill_diagonal(diff, 1.0)
            D = (b[None, :] / b[:, None]) / diff
            np.fill_diagonal(D, 0.0)
            np.fill_diagonal(D, -D.sum(axis=1))  # negative-sum trick
            D.setflags(write=False)
            self._D = D
        return self._D

    def diff(self, f: np.ndarray) -> np.ndarray:
        return self.D @ f

    # -- quadrature ------------------------------------------------------

    def integrate(self, f: np.ndarray) -> float:
        """Integral of the interpolant of f over [lo, hi]."""
        return float(self.w @ f)

    # -- interpolation ---------------------------------------------------

    def interpolate(self, f: np.ndarray, xq) -> np.ndarray:
        """Barycentric evaluation of the interpolant at points xq."""
        xq_arr = np.atleast_1d(np.asarray(xq, dtype=float))
        d = xq_arr[:, None] - self.x[None, :]
        hit = np.isclose(d, 0.0, rtol=0.0, atol=1e-15 * max(1.0, abs(self.hi)))
        d = np.where(hit, 1.0, d)
        c = self._bary[None, :] / d
        vals = (c @ f) / c.sum(axis=1)
        row_hit = hit.any(axis=1)
        if row_hit.any():
            idx = hit[row_hit].argmax(axis=1)
            vals[row_hit] = f[idx]
        if np.isscalar(xq) or np.asarray(xq).ndim == 0:
            return float(vals[0])
        return vals

    def interp_row(self, x0: float) -> np.ndarray:
        """Row vector r with r @ f = interpolant of f at x0 (x0 off the nodes)."""
        c = self._bary / (x0 - self.x)
        return c / c.sum()

    def endpoint_values(self, f: np.ndarray) -> tuple[float, float]:
        v = self.interpolate(f, np.array([self.lo, self.hi]))
        return float(v[0]), float(v[1])

    def endpoint_slopes(self, f: np.ndarray) -> tuple[float, float]:
        df = self.diff(f)
        v = self.interpolate(df, np.array([self.lo, self.hi]))
        return float(v[0]), float(v[1])

    # -- misc --------------------------------------------------------------

    def refined(self, factor: int = 4) -> "ChebGrid":
        return ChebGrid(self.lo, self.hi, factor * self.n)

    def check_same(self, other: "ChebGrid") -> None:
        if (self.n != other.n) or (self.lo != other.lo) or (self.hi != other.hi):
            raise GridMismatch(
                f"grid ({self.n} nodes on [{self.lo},{self.hi}]) vs "
                f"({other.n} nodes on [{other.lo},{other.hi}])"
            )

    def __eq__(self, other):
        return (
            isinstance(other, ChebGrid)
            and self.n == other.n
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.n, self.lo, self.hi))

    def __repr__(self):
        return f"ChebGrid(lo={self.lo}, hi={self.hi}, n={self.n})"


def gauss_legendre_01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (t + 1.0), 0.5 * w
