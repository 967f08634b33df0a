"""B-spline basis on a clamped knot vector: evaluation and exact integrals.

Evaluation uses the span-local Cox-de Boor recursion (the classic triangular
scheme), vectorized over evaluation points. Integrals over [start, upper] are
computed panel by panel with a Gauss-Legendre rule of high enough order to be
exact for piecewise polynomials of the basis degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SplineBasis", "bspline_basis_eval", "bspline_basis_integrals"]


@dataclass(frozen=True)
class SplineBasis:
    """k = len(knots) - order basis functions of a given order.

    order is the polynomial order (degree + 1): order 1 is piecewise
    constant, order 4 is cubic. The knot vector must be nondecreasing and
    clamped (order-fold end knots) for partition of unity to hold on the
    whole span.
    """

    order: int
    knots: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        knots = np.asarray(self.knots, dtype=np.float64).copy()
        if knots.ndim != 1 or knots.size < 2 * self.order:
            raise ValueError("knot vector too short for the requested order")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be nondecreasing")
        if knots[-1] <= knots[0]:
            raise ValueError("knot span must have positive length")
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)

    @property
    def k(self) -> int:
        """Number of basis functions."""
        return self.knots.size - self.order

    @property
    def span(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        """Distinct knot values: the polynomial panels of the basis."""
        return np.unique(self.knots)

    @classmethod
    def geometric(cls, order: int, k: int, length: float, eps: float = 1.0):
        """Clamped basis on [0, length] with geometric interior breakpoints.

        The first breakpoint after 0 sits at eps and the rest are spaced
        geometrically up to length, concentrating resolution where the
        excitation kernels vary fastest. Falls back to uniform spacing for
        spans not much longer than eps.
        """
        if k < order:
            raise ValueError("need at least `order` basis functions")
        if length <= 0:
            raise ValueError("length must be positive")
        n_breaks = k - order + 2  # including both ends
        if length <= 10.0 * eps:
            inner = np.linspace(0.0, length, n_breaks)
        else:
            inner = np.concatenate(([0.0], np.geomspace(eps, length, n_breaks - 1)))
        knots = np.concatenate((np.zeros(order - 1), inner,
                                np.full(order - 1, length)))
        return cls(order=order, knots=knots)

    @classmethod
    def uniform(cls, order: int, k: int, length: float):
        """Clamped basis on [0, length] with uniform breakpoints."""
        if k < order:
            raise ValueError("need at least `order` basis functions")
        inner = np.linspace(0.0, length, k - order + 2)
        knots = np.concatenate((np.zeros(order - 1), inner,
                                np.full(order - 1, length)))
        return cls(order=order, knots=knots)

    def evaluate(self, t) -> np.ndarray:
        """Design matrix of shape (len(t), k); rows sum to 1 on the span."""
        return bspline_basis_eval(self, t)

    def integrals(self, upper: float) -> np.ndarray:
        """Vector of integrals of each basis function over [start, upper]."""
        return bspline_basis_integrals(self, upper)


def bspline_basis_eval(basis: SplineBasis, t) -> np.ndarray:
    """Evaluate all basis functions at the points t (scalar or array).

    Returns an array of shape (n_points, k). Points outside the knot span
    (beyond a small round-off tolerance) raise a ValueError; the right end
    of the span is treated as belonging to the last panel so partition of
    unity holds there too.
    """
    kn = basis.knots
    o = basis.order
    p = o - 1
    k = basis.k
    pts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    lo, hi = kn[0], kn[-1]
    tol = 1e-12 * max(1.0, abs(hi - lo))
    if np.any(pts < lo - tol) or np.any(pts > hi + tol):
        raise ValueError("evaluation point outside the knot span")
    x = np.clip(pts, lo, hi)

    spans = np.searchsorted(kn, x, side="right") - 1
    spans = np.clip(spans, p, k - 1)

    npts = x.size
    # triangular recursion, vectorized across points
    vals = np.zeros((npts, o))
    vals[:, 0] = 1.0
    left = np.empty((npts, o))
    right = np.empty((npts, o))
    for r in range(1, o):
        left[:, r] = x - kn[spans + 1 - r]
        right[:, r] = kn[spans + r] - x
        saved = np.zeros(npts)
        for j in range(r):
            denom = right[:, j + 1] + left[:, r - j]
            with np.errstate(divide="ignore", invalid="ignore"):
                term = np.where(denom > 0.0, vals[:, j] / denom, 0.0)
            vals[:, j] = saved + right[:, j + 1] * term
            saved = left[:, r - j] * term
        vals[:, r] = saved

    out = np.zeros((npts, k))
    cols = spans[:, None] - p + np.arange(o)[None, :]
    np.put_along_axis(out, cols, vals, axis=1)
    return out


def bspline_basis_integrals(basis: SplineBasis, upper: float) -> np.ndarray:
    """Integrals of each basis function over [span start, upper].

    Exact on each polynomial panel (Gauss-Legendre with enough nodes for the
    basis degree); upper must lie inside the knot span.
    """
    lo, hi = basis.span
    upper = float(upper)
    tol = 1e-12 * max(1.0, hi - lo)
    if upper < lo - tol or upper > hi + tol:
        raise ValueError("integration limit outside the knot span")
    upper = min(max(upper, lo), hi)

    nodes, weights = np.polynomial.legendre.leggauss(max(2, basis.order))
    breaks = basis.breakpoints
    total = np.zeros(basis.k)
    for a, b in zip(breaks[:-1], breaks[1:]):
        b_eff = min(b, upper)
        if b_eff <= a:
            break
        half = 0.5 * (b_eff - a)
        mid = 0.5 * (a + b_eff)
        xs = mid + half * nodes
        total += half * (weights @ basis.evaluate(xs))
    return total
