"""Leave-one-out, edge-corrected kernel density estimation.

Used to weight the regression estimators on non-uniform designs: each summand
is divided by a floored leave-one-out density estimate at its own design
point.  Higher-order kernels can dip negative, so a positive floor keeps the
weights bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DataSet, ValidationError
from .kernels import ProductKernel, product_kernel

__all__ = ["DensityEstimator", "loo_density", "floored_density", "loo_at_rows"]


@dataclass(frozen=True)
class DensityEstimator:
    """Leave-one-out product-kernel density estimator of the design density.

    The kernel order ``d1`` must exceed the dimension k; edge kernels take
    over in any coordinate within H of a face of the cube, which removes
    boundary bias for the estimator as a whole.
    """

    data: DataSet
    d1: int
    H: float
    floor: float = 0.05
    edge_corrected: bool = True
    family: ProductKernel = field(init=False)

    def __post_init__(self):
        if self.data.n < 2:
            raise ValidationError("leave-one-out density needs n >= 2")
        if not 0.0 < self.H < 1.0:
            raise ValidationError(f"bandwidth H must lie in (0, 1), got {self.H}")
        if self.floor <= 0.0:
            raise ValidationError(f"density floor must be positive, got {self.floor}")
        if not self.d1 > self.data.k:
            raise ValidationError(
                f"density kernel order d1={self.d1} must exceed k={self.data.k}"
            )
        object.__setattr__(self, "family", product_kernel(self.d1))

    def _coordinate_weights(self, x_j: float, col: np.ndarray) -> np.ndarray:
        if self.edge_corrected:
            spec = self.family.select(float(x_j), self.H)
        else:
            spec = self.family.interior
        return spec.eval((col - x_j) / self.H) / self.H


def loo_density(est: DensityEstimator, i: int, x) -> float:
    """Leave-one-out density estimate at x, dropping design row i.

    (n-1)^-1 sum_{j != i} H^-k L((X_j - x)/H) with per-coordinate edge
    switching at x.  Depends on design points only, never on responses.
    """
    n = est.data.n
    if not 0 <= i < n:
        raise ValidationError(f"row index {i} out of range for n={n}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = np.ones(n)
    for j in range(est.data.k):
        w *= est._coordinate_weights(float(x[j]), est.data.X[:, j])
    w[i] = 0.0
    return float(w.sum() / (n - 1))


def floored_density(est: DensityEstimator, i: int, x) -> float:
    """max(loo_density, floor): keeps estimator weights bounded."""
    return max(loo_density(est, i, x), est.floor)


def loo_at_rows(est: DensityEstimator, floored: bool = True) -> np.ndarray:
    """Vector of leave-one-out densities at the design rows themselves.

    Precomputed once per dataset by the regression estimators; equal to
    calling :func:`loo_density` (or its floored form) at every (i, X_i).
    """
    X = est.data.X
    n, k = X.shape
    w = np.ones((n, n))
    for j in range(k):
        col = X[:, j]
        for spec_kind, rows in _rows_by_region(est, col):
            if rows.size == 0:
                continue
            w[rows] *= spec_kind.eval((col[None, :] - col[rows, None]) / est.H) / est.H
    np.fill_diagonal(w, 0.0)
    vals = w.sum(axis=1) / (n - 1)
    if floored:
        vals = np.maximum(vals, est.floor)
    return vals


def _rows_by_region(est: DensityEstimator, col: np.ndarray):
    if not est.edge_corrected:
        return [(est.family.interior, np.arange(col.shape[0]))]
    left = np.flatnonzero(col < est.H)
    right = np.flatnonzero(col > 1.0 - est.H)
    interior = np.flatnonzero((col >= est.H) & (col <= 1.0 - est.H))
    return [
        (est.family.left, left),
        (est.family.right, right),
        (est.family.interior, interior),
    ]
