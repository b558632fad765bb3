"""Regression estimators built from derivative data.

Every term produced by :func:`derivreg.functionals.build_term_plan` is
estimated by the same sample analogue: responses are multiplied by the term's
nonlocal weights at their own design points, locally smoothed over the term's
free coordinates with an edge-switching product kernel, and divided by a
floored leave-one-out density estimate on non-uniform designs.  Summation
order is canonicalized so results are bit-identical under row permutations
and any degree of parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .core import DataSet, DerivIndex, ValidationError
from .density import DensityEstimator, loo_at_rows
from .functionals import Quadrature, Term, TermPlan, Weight, build_term_plan
from .kernels import BandwidthPlan, ProductKernel, check_orders, default_orders, product_kernel

__all__ = [
    "EstimationPlan",
    "FitResult",
    "nonlocal_estimate",
    "smoothed_nonlocal_estimate",
    "fit",
    "nadaraya_watson",
    "nadaraya_watson_grid",
    "limit_covariance",
    "make_grid",
]


def _canonical_order(ds: DataSet) -> np.ndarray:
    """Row order used for all summations: lexicographic in (X columns, Y)."""
    keys = [ds.Y] + [ds.X[:, j] for j in range(ds.k - 1, -1, -1)]
    return np.lexsort(keys)


def _term_value(
    term: Term,
    ds: DataSet,
    x: np.ndarray,
    h: float | None,
    family: ProductKernel,
    inv_density: np.ndarray,
    order: np.ndarray,
) -> float:
    """Sample analogue of one integral term at a single evaluation point."""
    w = ds.Y / inv_density
    for i, kind in enumerate(term.weights):
        col = ds.X[:, i]
        if kind is Weight.LOCAL:
            w = w * family.column_weights(float(x[i]), col, h)
        elif kind is Weight.CUM:
            w = w * (col <= x[i])
        elif kind is Weight.RAMP:
            w = w * (1.0 - col)
        elif kind is Weight.RECON:
            w = w * np.where(col <= x[i], col, col - 1.0)
        # FLAT multiplies by 1
    return float(w[order].sum() / ds.n)


def nonlocal_estimate(
    ds: DataSet,
    alpha: DerivIndex,
    x,
    density: np.ndarray | None = None,
) -> float:
    """Root-n estimate of the reconstruction integral from derivative data.

    n^-1 sum_i Y_i w_alpha(X_i, x), where w_alpha is the reconstruction
    weight.  With ``density`` (floored leave-one-out values at the design
    rows), each summand is divided by its entry; absent, the design is
    treated as uniform.
    """
    if ds.deriv != alpha:
        raise ValidationError(f"dataset holds {ds.deriv}, requested {alpha}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    term = Term(1, alpha, tuple(Weight.RECON if b else Weight.FLAT for b in alpha.bits))
    inv = np.ones(ds.n) if density is None else np.asarray(density, dtype=float)
    return _term_value(term, ds, x, None, product_kernel(2), inv, _canonical_order(ds))


def smoothed_nonlocal_estimate(
    ds: DataSet,
    beta: DerivIndex,
    x,
    p: int,
    h: float,
    d: int = 2,
    density: np.ndarray | None = None,
) -> float:
    """Partially smoothed estimate: nonlocal over the first p coordinates,
    kernel-smoothed (order d, bandwidth h) over the remaining k - p.

    (n h^(k-p))^-1 sum_i Y_i w_beta(X_i, x) K((X_i^last - x^last)/h) / f_i,
    with K the edge-switching product kernel and f_i the floored
    leave-one-out density (ones when ``density`` is omitted).
    """
    if not 1 <= p < ds.k:
        raise ValidationError(f"need 1 <= p < k for smoothing, got p={p}, k={ds.k}")
    if ds.deriv != beta:
        raise ValidationError(f"dataset holds {ds.deriv}, requested {beta}")
    if not beta.support <= set(range(p)):
        raise ValidationError(f"beta {beta} flags coordinates outside the first p={p}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    weights = tuple(
        (Weight.RECON if beta.bits[i] else Weight.FLAT) if i < p else Weight.LOCAL
        for i in range(ds.k)
    )
    term = Term(1, beta, weights)
    inv = np.ones(ds.n) if density is None else np.asarray(density, dtype=float)
    return _term_value(term, ds, x, h, product_kernel(d), inv, _canonical_order(ds))


# ---------------------------------------------------------------------------
# Full estimation plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimationPlan:
    """Everything needed to fit: term plan, datasets, kernels, bandwidths.

    ``density`` selects uniform-design weighting ("uniform", weights one) or
    floored leave-one-out weighting ("loo").
    """

    k: int
    coords: tuple[int, ...]
    ell: int
    d: int
    d1: int
    plan: TermPlan
    datasets: Mapping[DerivIndex, DataSet]
    bandwidths: BandwidthPlan = BandwidthPlan()
    density: str = "uniform"
    floor: float = 0.05

    @classmethod
    def build(
        cls,
        k: int,
        coords: Iterable[int],
        ell: int,
        datasets: Mapping[DerivIndex, DataSet],
        d: int | None = None,
        d1: int | None = None,
        bandwidths: BandwidthPlan | None = None,
        density: str = "uniform",
        floor: float = 0.05,
    ) -> "EstimationPlan":
        plan = build_term_plan(k, coords, ell)
        p = len(plan.coords)
        d_def, d1_def = default_orders(k, p)
        d = d_def if d is None else d
        d1 = d1_def if d1 is None else d1
        check_orders(d, d1, k, p)
        if density not in ("uniform", "loo"):
            raise ValidationError(f"density mode must be 'uniform' or 'loo', got {density!r}")
        for idx in plan.required_indices:
            if idx not in datasets:
                raise ValidationError(f"plan needs a dataset for derivative index {idx}")
            ds = datasets[idx]
            if ds.k != k:
                raise ValidationError(f"dataset for {idx} has k={ds.k}, plan has k={k}")
            if ds.deriv != idx:
                raise ValidationError(f"dataset registered under {idx} holds {ds.deriv}")
        return cls(
            k=k,
            coords=plan.coords,
            ell=ell,
            d=d,
            d1=d1,
            plan=plan,
            datasets=dict(datasets),
            bandwidths=bandwidths if bandwidths is not None else BandwidthPlan(),
            density=density,
            floor=floor,
        )

    @property
    def p(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class FitResult:
    """Fitted values on a point grid plus per-term contributions."""

    points: np.ndarray
    values: np.ndarray
    contributions: dict[str, np.ndarray]
    metadata: dict


def fit(plan: EstimationPlan, eval_points) -> FitResult:
    """Evaluate the full estimator (sum of per-term sample analogues).

    The fitted value at each point is exactly the sum of the per-term
    contribution columns.  Deterministic for fixed inputs: row order is
    canonicalized and points are processed independently.
    """
    pts = np.atleast_2d(np.asarray(eval_points, dtype=float))
    if pts.shape[1] != plan.k:
        raise ValidationError(f"evaluation points have {pts.shape[1]} columns, plan k={plan.k}")
    family = product_kernel(plan.d)

    orders: dict[DerivIndex, np.ndarray] = {}
    inv_density: dict[DerivIndex, np.ndarray] = {}
    for idx in plan.plan.required_indices:
        ds = plan.datasets[idx]
        orders[idx] = _canonical_order(ds)
        if plan.density == "loo":
            est = DensityEstimator(
                data=ds,
                d1=plan.d1,
                H=plan.bandwidths.H(ds.n, plan.d1, plan.d, plan.k - plan.p),
                floor=plan.floor,
            )
            inv_density[idx] = loo_at_rows(est, floored=True)
        else:
            inv_density[idx] = np.ones(ds.n)

    contribs: dict[str, np.ndarray] = {}
    meta_terms = []
    for term in plan.plan.terms:
        ds = plan.datasets[term.deriv]
        m_free = term.free_dims
        h = plan.bandwidths.h(ds.n, plan.d, m_free) if m_free > 0 else None
        col = np.empty(pts.shape[0])
        for j in range(pts.shape[0]):
            col[j] = term.coef * _term_value(
                term, ds, pts[j], h, family, inv_density[term.deriv], orders[term.deriv]
            )
        contribs[term.label] = col
        meta_terms.append(
            {"term": term.label, "coef": term.coef, "n": ds.n, "bandwidth": h, "free_dims": m_free}
        )

    values = np.zeros(pts.shape[0])
    for label in sorted(contribs):
        values = values + contribs[label]

    metadata = {
        "k": plan.k,
        "coords": list(plan.coords),
        "ell": plan.ell,
        "d": plan.d,
        "d1": plan.d1,
        "density": plan.density,
        "floor": plan.floor,
        "terms": meta_terms,
        "n_per_equation": {str(idx): plan.datasets[idx].n for idx in plan.plan.required_indices},
    }
    return FitResult(points=pts, values=values, contributions=contribs, metadata=metadata)


# ---------------------------------------------------------------------------
# Baseline full-dimensional smoother
# ---------------------------------------------------------------------------


def nadaraya_watson(
    ds: DataSet,
    x,
    h: float,
    d: int = 2,
    den_floor: float | None = None,
) -> float:
    """Locally weighted average over all k coordinates (the no-derivative
    baseline), with edge-switching product kernels.

    Raises when no design point carries kernel mass at x (bandwidth too
    small).  ``den_floor`` bounds the normalizing density estimate away from
    zero; higher-order edge kernels can otherwise produce near-zero or
    negative total weight.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    family = product_kernel(d)
    w = np.ones(ds.n)
    for j in range(ds.k):
        w = w * family.column_weights(float(x[j]), ds.X[:, j], h)
    if not np.any(w != 0.0):
        raise ValidationError(f"no design points within bandwidth h={h} of {x}; increase h")
    order = _canonical_order(ds)
    num = float((ds.Y * w)[order].sum())
    den = float(w[order].sum())
    if den_floor is not None:
        den = max(den, den_floor * ds.n)
    if den == 0.0:
        raise ValidationError(f"kernel mass cancels exactly at {x}; increase h")
    return num / den


def nadaraya_watson_grid(
    X: np.ndarray,
    Y: np.ndarray,
    pts: np.ndarray,
    h: float,
    d: int = 2,
    den_floor: float | None = 0.05,
    widen_on_empty: bool = False,
) -> np.ndarray:
    """Vectorized baseline smoother over many evaluation points.

    With ``widen_on_empty`` the bandwidth is doubled locally (at most six
    times) at points with no in-window data, instead of raising; Monte Carlo
    harnesses use this so one starved window cannot abort a replication.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    family = product_kernel(d)
    n, k = X.shape
    m = pts.shape[0]

    w = np.ones((m, n))
    for j in range(k):
        col = X[:, j]
        xj = pts[:, j]
        left = np.flatnonzero(xj < h)
        right = np.flatnonzero(xj > 1.0 - h)
        interior = np.flatnonzero((xj >= h) & (xj <= 1.0 - h))
        for spec, rows in ((family.left, left), (family.right, right), (family.interior, interior)):
            if rows.size:
                w[rows] *= spec.eval((col[None, :] - xj[rows, None]) / h) / h

    num = (w * Y[None, :]).sum(axis=1)
    den = w.sum(axis=1)
    mass = (w != 0.0).any(axis=1)
    if den_floor is not None:
        # den / n estimates the design density at the point; floor it there.
        den = np.maximum(den, den_floor * n)
    elif np.any(mass & (den == 0.0)):
        raise ValidationError("kernel mass cancels exactly at an evaluation point; increase h")
    out = num / np.where(den == 0.0, np.nan, den)

    starved = ~mass
    if np.any(starved):
        if not widen_on_empty:
            raise ValidationError(
                f"{int(starved.sum())} evaluation points have no design points within h={h}"
            )
        for idx in np.flatnonzero(starved):
            hj, tries = h, 0
            while tries < 6:
                hj *= 2.0
                try:
                    out[idx] = nadaraya_watson(
                        DataSet(k=k, deriv=DerivIndex.zeros(k), X=X, Y=Y),
                        pts[idx],
                        hj,
                        d=d,
                        den_floor=den_floor,
                    )
                    break
                except ValidationError:
                    tries += 1
            else:
                raise ValidationError(f"no design points near {pts[idx]} even after widening")
    return out


# ---------------------------------------------------------------------------
# Limit covariance of the root-n estimator
# ---------------------------------------------------------------------------


def limit_covariance(
    beta: DerivIndex,
    x1,
    x2,
    sigma2: float,
    f: Callable[[np.ndarray], np.ndarray] | None = None,
    quad: Quadrature | None = None,
) -> float:
    """Covariance kernel of the limiting Gaussian fluctuation of the
    root-n estimator:  sigma^2 * int w_beta(u, x1) w_beta(u, x2) / f(u) du.

    ``f`` is the design density (uniform when omitted).  Quadrature panels
    split at both x1 and x2 in every differentiated coordinate, making the
    rule exact for the piecewise-polynomial integrand.
    """
    quad = quad or Quadrature()
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    k = beta.k
    if x1.shape[0] != k or x2.shape[0] != k:
        raise ValidationError("x1/x2 dimension mismatch with beta")

    axes = []
    for i in range(k):
        if beta.bits[i]:
            breaks = sorted({0.0, float(x1[i]), float(x2[i]), 1.0})
            ts, ws = [], []
            for lo, hi in zip(breaks[:-1], breaks[1:]):
                if hi <= lo:
                    continue
                t, w = _gl_panel(quad.nodes, lo, hi)
                chi = np.where(t <= x1[i], t, t - 1.0) * np.where(t <= x2[i], t, t - 1.0)
                ts.append(t)
                ws.append(w * chi)
            axes.append((np.concatenate(ts), np.concatenate(ws)))
        else:
            axes.append(_gl_panel(quad.nodes, 0.0, 1.0))

    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wprod = np.ones(pts.shape[0])
    for wg in wgrids:
        wprod *= wg.ravel()
    dens = np.ones(pts.shape[0]) if f is None else np.asarray(f(pts), dtype=float)
    return float(sigma2 * np.sum(wprod / dens))


def _gl_panel(nodes: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x, 0.5 * (hi - lo) * w


def make_grid(k: int, per_dim: int, offset: float = 0.0) -> np.ndarray:
    """Tensor grid of evaluation points, inset by ``offset`` from each face."""
    if not 0.0 <= offset < 0.5:
        raise ValidationError(f"offset must lie in [0, 0.5), got {offset}")
    axis = np.linspace(offset, 1.0 - offset, per_dim)
    grids = np.meshgrid(*[axis] * k, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)
