"""Exact integral calculus for reconstructing a function from derivative data.

The reconstruction rests on the one-dimensional identity

    g(x) = int_0^1 g(u) du + int_0^1 (u - 1 + 1{u <= x}) g'(u) du,

whose k-variate tensorization writes g as a signed sum of integrals of its
mixed first partials against bounded weights.  Every weight arising here is a
product over coordinates of one of four univariate shapes:

    FLAT   integrate with weight 1 over [0, 1]
    CUM    integrate with weight 1 over [0, x_i]
    RAMP   integrate with weight (1 - u) over [0, 1]
    RECON  integrate with weight u - 1 + 1{u <= x_i}   (= CUM - RAMP)

plus LOCAL for coordinates that are not integrated at all (they stay fixed at
the evaluation point and, at estimation time, are handled by local kernel
smoothing).  :func:`build_term_plan` runs the iterative expansion that, for a
coordinate subset P of size p and a derivative-availability threshold ell,
rewrites g as

    sum of RECON-type integrals of g^alpha with |alpha| >= ell
  + sum of FLAT-type integrals of g itself over index sets beta with
    |beta| >= p - ell + 1,

which is exactly the structure the dimension-reduced estimators consume.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import DerivIndex, TestFunction, ValidationError, poly_function, product_function
from . import kernels as _kernels

__all__ = [
    "Weight",
    "recon_weight",
    "Quadrature",
    "weighted_integral",
    "reconstruction_integral",
    "integrate_out",
    "integrate_to",
    "corner_sum",
    "decomposition_residual",
    "partial_decomposition_residual",
    "Term",
    "TermPlan",
    "build_term_plan",
    "evaluate_plan",
    "plan_residual",
    "nonparametric_dimension",
    "subindices",
    "CheckResult",
    "identity_checks",
    "polynomial_suite",
    "analytic_suite",
]


class Weight(Enum):
    """Per-coordinate weight shapes for the integral terms (see module doc)."""

    LOCAL = "local"
    FLAT = "flat"
    CUM = "cum"
    RAMP = "ramp"
    RECON = "recon"


def recon_weight(alpha: DerivIndex, u, x) -> np.ndarray:
    """The product weight  prod_j w_{alpha_j}(u_j, x_j)  with w_0 = 1 and
    w_1(u, x) = u - 1 + 1{u <= x}  (value at equality u = x is u).

    Bounded by 1 in absolute value on the unit cube.  ``u`` and ``x`` may be
    single points or (m, k) arrays of points.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if u.shape[-1] != alpha.k or x.shape[-1] != alpha.k:
        raise ValidationError(
            f"dimension mismatch: alpha k={alpha.k}, u has {u.shape[-1]}, x has {x.shape[-1]}"
        )
    u, x = np.broadcast_arrays(u, x)
    out = np.ones(u.shape[:-1])
    for j in alpha.support:
        uj = u[..., j]
        out = out * np.where(uj <= x[..., j], uj, uj - 1.0)
    return out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=128)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel(n: int, lo: float, hi: float):
    x, w = _leggauss(n)
    t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    return t, 0.5 * (hi - lo) * w


@dataclass(frozen=True)
class Quadrature:
    """Gauss-Legendre rule with per-coordinate panel splitting.

    Panels are split at the evaluation point for CUM/RECON coordinates, so
    the integrand is smooth on every panel and the rule is exact for
    polynomials up to degree 2*nodes - 1 per panel.
    """

    nodes: int = 32

    def line_rule(self, weight: Weight, x_i: float) -> tuple[np.ndarray, np.ndarray]:
        """Return (nodes, weights) realizing the univariate weighted integral."""
        if weight is Weight.FLAT:
            return _panel(self.nodes, 0.0, 1.0)
        if weight is Weight.RAMP:
            t, w = _panel(self.nodes, 0.0, 1.0)
            return t, w * (1.0 - t)
        if weight is Weight.CUM:
            if x_i <= 0.0:
                return np.empty(0), np.empty(0)
            return _panel(self.nodes, 0.0, min(x_i, 1.0))
        if weight is Weight.RECON:
            parts = []
            if x_i > 0.0:
                t, w = _panel(self.nodes, 0.0, min(x_i, 1.0))
                parts.append((t, w * t))
            if x_i < 1.0:
                t, w = _panel(self.nodes, max(x_i, 0.0), 1.0)
                parts.append((t, w * (t - 1.0)))
            ts = np.concatenate([p[0] for p in parts])
            ws = np.concatenate([p[1] for p in parts])
            return ts, ws
        raise ValidationError(f"coordinate weight {weight} is not integrable")


def weighted_integral(
    f: Callable[[np.ndarray], np.ndarray],
    weights: Sequence[Weight],
    x,
    quad: Quadrature,
) -> float:
    """Tensor-product integral of f against per-coordinate weights.

    LOCAL coordinates are pinned at ``x``; all others are integrated with
    their weight shape.  ``f`` must accept an (m, k) array.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = len(weights)
    if x.shape[0] != k:
        raise ValidationError(f"x has {x.shape[0]} coordinates, weights describe {k}")
    axes = []
    for i, wkind in enumerate(weights):
        if wkind is Weight.LOCAL:
            continue
        t, w = quad.line_rule(wkind, float(x[i]))
        if t.size == 0:
            return 0.0
        axes.append((i, t, w))
    if not axes:
        return float(f(x[None, :])[0])
    grids = np.meshgrid(*[t for _, t, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, _, w in axes], indexing="ij")
    m = grids[0].size
    pts = np.tile(x, (m, 1))
    for (i, _, _), g in zip(axes, grids):
        pts[:, i] = g.ravel()
    wprod = np.ones(m)
    for wg in wgrids:
        wprod *= wg.ravel()
    vals = np.asarray(f(pts), dtype=float)
    return float(np.sum(vals * wprod))


# ---------------------------------------------------------------------------
# The basic operators
# ---------------------------------------------------------------------------


def _as_callable(b) -> Callable[[np.ndarray], np.ndarray]:
    return b if callable(b) else (lambda pts: np.full(pts.shape[0], float(b)))


def reconstruction_integral(
    alpha: DerivIndex,
    b,
    x,
    quad: Quadrature,
    coords: Iterable[int] | None = None,
) -> float:
    """Integral of b against the reconstruction weight of ``alpha``.

    Integrates over the coordinates in ``coords`` (default: all k), with the
    RECON weight on the support of ``alpha`` and FLAT weight elsewhere; the
    remaining coordinates of b stay pinned at ``x``.  RECON coordinates split
    quadrature panels at x_i, where the weight jumps.
    """
    k = alpha.k
    active = set(range(k)) if coords is None else set(coords)
    if not alpha.support <= active:
        raise ValidationError(f"alpha {alpha} differentiates outside the active coordinates")
    weights = [
        (Weight.RECON if alpha.bits[i] else Weight.FLAT) if i in active else Weight.LOCAL
        for i in range(k)
    ]
    return weighted_integral(_as_callable(b), weights, x, quad)


def integrate_out(index: DerivIndex, b, x, quad: Quadrature) -> float:
    """Integrate b over the flagged coordinates over [0, 1], others fixed at x.

    The all-zero index is the identity operator; composing two of these
    operators equals a single one over the union of their supports.
    """
    weights = [Weight.FLAT if bit else Weight.LOCAL for bit in index.bits]
    return weighted_integral(_as_callable(b), weights, x, quad)


def integrate_to(index: DerivIndex, b, x, quad: Quadrature) -> float:
    """Integrate b over the flagged coordinates from 0 to x_i, others fixed."""
    weights = [Weight.CUM if bit else Weight.LOCAL for bit in index.bits]
    return weighted_integral(_as_callable(b), weights, x, quad)


def corner_sum(b, x) -> float:
    """Signed corner sum  sum_gamma (-1)^{|gamma|} b(x with gamma-coords zeroed).

    Equals the full cumulative integral of the top mixed partial of b; used as
    an independent oracle for :func:`integrate_to`.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = x.shape[0]
    total = 0.0
    fn = _as_callable(b)
    for gamma in itertools.product((0, 1), repeat=k):
        pt = np.where(np.asarray(gamma, dtype=bool), 0.0, x)
        total += (-1) ** sum(gamma) * float(fn(pt[None, :])[0])
    return total


def subindices(alpha: DerivIndex) -> list[DerivIndex]:
    """All derivative indices whose support is contained in alpha's."""
    sup = sorted(alpha.support)
    out = []
    for r in range(len(sup) + 1):
        for combo in itertools.combinations(sup, r):
            out.append(DerivIndex.from_support(alpha.k, combo))
    return out


# ---------------------------------------------------------------------------
# Exact decomposition residuals
# ---------------------------------------------------------------------------


def decomposition_residual(g: TestFunction, x, quad: Quadrature) -> float:
    """|g(x) - sum over all 2^k indices of the reconstruction integrals|.

    Zero (up to quadrature error) for any g with bounded mixed first partials.
    """
    return partial_decomposition_residual(g, g.k, x, quad)


def partial_decomposition_residual(g: TestFunction, p: int, x, quad: Quadrature) -> float:
    """Residual of the decomposition over the first p coordinates only.

    The 2^p terms integrate only coordinates 1..p; the trailing k - p
    coordinates of each partial stay pinned at x.  p = k recovers
    :func:`decomposition_residual`.
    """
    if not 1 <= p <= g.k:
        raise ValidationError(f"need 1 <= p <= k, got p={p}, k={g.k}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coords = range(p)
    total = 0.0
    for beta in subindices(DerivIndex.from_support(g.k, coords)):
        total += reconstruction_integral(
            beta, lambda pts, b=beta: g.deriv(b, pts), x, quad, coords=coords
        )
    return abs(float(g(x[None, :])[0]) - total)


# ---------------------------------------------------------------------------
# Term plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """One signed integral term: coef times the weighted integral of g^deriv.

    ``weights[i]`` is LOCAL exactly for the coordinates that remain free (to
    be kernel-smoothed at estimation time or pinned at x in quadrature).
    """

    coef: int
    deriv: DerivIndex
    weights: tuple[Weight, ...]

    @property
    def free_dims(self) -> int:
        return sum(1 for w in self.weights if w is Weight.LOCAL)

    @property
    def label(self) -> str:
        if any(w is Weight.RECON for w in self.weights):
            return f"recon[{self.deriv}]"
        flat = "".join("1" if w is Weight.FLAT else "0" for w in self.weights)
        return f"avg[{flat}]"


@dataclass(frozen=True)
class TermPlan:
    """A complete rewrite of g as a signed sum of integral terms."""

    k: int
    coords: tuple[int, ...]
    ell: int
    terms: tuple[Term, ...]

    @property
    def required_indices(self) -> tuple[DerivIndex, ...]:
        seen = sorted({t.deriv for t in self.terms}, key=lambda d: d.bits)
        return tuple(seen)


def build_term_plan(k: int, coords: Iterable[int], ell: int) -> TermPlan:
    """Expand g into estimable terms for derivative data on a coordinate subset.

    ``coords`` is the 0-based subset P of coordinates with derivative data;
    ``ell`` is the smallest derivative order observed (order-0 data on g
    itself is always assumed available).  The expansion starts from the
    inclusion-exclusion identity on P and iteratively rewrites every plain
    average over too few coordinates, until each remaining term is either

      * a RECON-type integral of g^alpha with |alpha| >= ell (alpha inside P), or
      * a FLAT-type average of g over >= p - ell + 1 coordinates of P.

    Terms with identical shape are merged by summing integer coefficients.
    """
    coords = tuple(sorted(set(int(c) for c in coords)))
    p = len(coords)
    if k < 1:
        raise ValidationError(f"need k >= 1, got k={k}")
    if p < 1 or any(c < 0 or c >= k for c in coords):
        raise ValidationError(f"coords {coords} must be a nonempty subset of 0..{k - 1}")
    if not 0 <= ell <= p:
        raise ValidationError(f"need 0 <= ell <= p, got ell={ell}, p={p} (precondition)")

    cs = frozenset(coords)
    psi: dict[tuple[DerivIndex, tuple[Weight, ...]], int] = {}
    resid: dict[frozenset[int], int] = {frozenset(): 1}

    def weights_for(recon_set: frozenset[int], flat_set: frozenset[int]) -> tuple[Weight, ...]:
        out = []
        for i in range(k):
            if i in recon_set:
                out.append(Weight.RECON)
            elif i in flat_set:
                out.append(Weight.FLAT)
            else:
                out.append(Weight.LOCAL)
        return tuple(out)

    def add_psi(recon_set: frozenset[int], flat_set: frozenset[int], coef: int) -> None:
        key = (DerivIndex.from_support(k, recon_set), weights_for(recon_set, flat_set))
        psi[key] = psi.get(key, 0) + coef

    # Expand averages in order of support size; expansion only creates larger ones.
    for size in range(0, p - ell + 1):
        for beta in [b for b in list(resid) if len(b) == size]:
            coef = resid.pop(beta)
            if coef == 0:
                continue
            comp = cs - beta
            if not comp:
                # Full average over P: already an order-0 RECON-type term.
                add_psi(frozenset(), beta, coef)
                continue
            add_psi(comp, beta, coef)
            rest = sorted(comp)
            for r in range(1, len(rest) + 1):
                for combo in itertools.combinations(rest, r):
                    key = beta | frozenset(combo)
                    resid[key] = resid.get(key, 0) + coef * (-1) ** (r + 1)

    terms = []
    for (deriv, weights), coef in psi.items():
        if coef:
            terms.append(Term(coef, deriv, weights))
    for beta, coef in resid.items():
        if coef:
            terms.append(Term(coef, DerivIndex.zeros(k), weights_for(frozenset(), beta)))
    terms.sort(key=lambda t: (t.deriv.bits, tuple(w.value for w in t.weights)))

    plan = TermPlan(k=k, coords=coords, ell=ell, terms=tuple(terms))
    _check_plan(plan, p)
    return plan


def _check_plan(plan: TermPlan, p: int) -> None:
    cs = set(plan.coords)
    for t in plan.terms:
        integrated = {i for i, w in enumerate(t.weights) if w is not Weight.LOCAL}
        if not t.deriv.support <= integrated:
            raise AssertionError(f"term {t} differentiates a free coordinate")
        if any(w is Weight.RECON for w in t.weights):
            assert integrated == cs, "derivative terms must integrate all of P"
            assert t.deriv.order >= plan.ell, "derivative term below the observed order"
        elif t.deriv.order > 0:
            raise AssertionError("non-RECON term with a derivative index")
        elif integrated != cs:
            assert len(integrated) >= p - plan.ell + 1, "residual average over too few coordinates"


def evaluate_plan(plan: TermPlan, g: TestFunction, x, quad: Quadrature) -> float:
    """Numeric value of the signed term sum; equals g(x) up to quadrature error."""
    if g.k != plan.k:
        raise ValidationError(f"plan has k={plan.k}, function has k={g.k}")
    total = 0.0
    for t in plan.terms:
        total += t.coef * weighted_integral(
            lambda pts, d=t.deriv: g.deriv(d, pts), t.weights, x, quad
        )
    return total


def plan_residual(plan: TermPlan, g: TestFunction, x, quad: Quadrature) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return abs(float(g(x[None, :])[0]) - evaluate_plan(plan, g, x, quad))


# ---------------------------------------------------------------------------
# Nonparametric dimension bound
# ---------------------------------------------------------------------------


def nonparametric_dimension(k: int, observed: Iterable[DerivIndex]) -> int:
    """Upper bound on the number of coordinates still requiring local averaging.

    Enumerates every coordinate subset P and every order threshold supported
    by the observed derivative indices; each admissible pair (P, ell) bounds
    the dimension by k - p + ell - 1, and the minimum over pairs is returned.
    With no usable derivative data the bound is k.
    """
    if k > 12:
        raise ValidationError(f"dimension search supports k <= 12, got k={k}")
    obs = set(observed)
    if DerivIndex.zeros(k) not in obs:
        raise ValidationError("observed set must contain the all-zero index (data on g)")
    supports = {o.support for o in obs if o.order > 0}

    best = k
    for r in range(1, k + 1):
        for combo in itertools.combinations(range(k), r):
            pset = frozenset(combo)
            present_sizes = [
                sum(1 for s in supports if len(s) == size and s <= pset)
                for size in range(r + 1)
            ]
            # smallest ell such that every order >= ell inside P is fully observed
            ell = None
            for size in range(r, 0, -1):
                if present_sizes[size] == comb(r, size):
                    ell = size
                else:
                    break
            if ell is not None:
                best = min(best, k - r + ell - 1)
    return best


# ---------------------------------------------------------------------------
# Built-in test functions and the identity suite
# ---------------------------------------------------------------------------


def polynomial_suite(k: int) -> list[TestFunction]:
    if k == 1:
        return [
            poly_function(1, {(2,): 1.0}, "x^2"),
            poly_function(1, {(3,): 2.0, (1,): -1.0, (0,): 0.5}, "2x^3-x+1/2"),
        ]
    if k == 2:
        return [
            poly_function(2, {(1, 1): 1.0}, "x1*x2"),
            poly_function(2, {(2, 0): 1.0, (0, 1): 1.0}, "x1^2+x2"),
            poly_function(2, {(2, 1): 1.0, (0, 3): 0.3, (1, 0): -0.5}, "x1^2*x2+.3x2^3-.5x1"),
        ]
    if k == 3:
        return [
            poly_function(3, {(1, 1, 1): 1.0}, "x1*x2*x3"),
            poly_function(3, {(2, 1, 0): 1.0, (0, 1, 1): 1.0, (0, 0, 2): -0.7}, "mixed cubic"),
        ]
    raise ValidationError(f"no built-in polynomial suite for k={k}")


def analytic_suite(k: int) -> list[TestFunction]:
    exp_factor = (np.exp, np.exp)
    sin_factor = (lambda t: np.sin(t + 0.3), lambda t: np.cos(t + 0.3))
    cos_factor = (lambda t: np.cos(0.7 * t), lambda t: -0.7 * np.sin(0.7 * t))
    factors = [exp_factor, sin_factor, cos_factor]
    names = ["exp", "sin", "cos"]
    out = [product_function(factors[:k], label="*".join(names[:k]))]
    if k >= 2:
        out.append(
            product_function([sin_factor] + [cos_factor] * (k - 1), label="sin*cos^(k-1)")
        )
    return out


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def _grid_points(k: int) -> np.ndarray:
    pts = [np.full(k, 0.5)]
    for combo in itertools.product((0.3, 0.7), repeat=k):
        pts.append(np.asarray(combo))
    return np.asarray(pts)


def identity_checks(
    quad_nodes: int = 32,
    plan_mutator: Callable[[TermPlan], TermPlan] | None = None,
) -> list[CheckResult]:
    """Run the exact-identity suite; each entry is the max residual over a grid.

    ``plan_mutator`` is a test hook applied to every term plan before
    evaluation, used to confirm that a corrupted plan is caught.
    """
    quad = Quadrature(nodes=quad_nodes)
    results: list[CheckResult] = []

    for k in (1, 2, 3):
        pts = _grid_points(k)
        for g in polynomial_suite(k):
            r = max(decomposition_residual(g, x, quad) for x in pts)
            results.append(CheckResult(f"reconstruction/k={k}/poly:{g.label}", r, 1e-10))
        for g in analytic_suite(k):
            r = max(decomposition_residual(g, x, quad) for x in pts)
            results.append(CheckResult(f"reconstruction/k={k}/analytic:{g.label}", r, 1e-8))
        for p in range(1, k + 1):
            for g in polynomial_suite(k):
                r = max(partial_decomposition_residual(g, p, x, quad) for x in pts)
                results.append(CheckResult(f"partial-reconstruction/k={k}/p={p}/poly:{g.label}", r, 1e-10))
            for g in analytic_suite(k):
                r = max(partial_decomposition_residual(g, p, x, quad) for x in pts)
                results.append(
                    CheckResult(f"partial-reconstruction/k={k}/p={p}/analytic:{g.label}", r, 1e-8)
                )

    # Term plans across every admissible (k, coords-prefix, ell).
    for k in (1, 2, 3):
        pts = _grid_points(k)
        funcs = [polynomial_suite(k)[-1], analytic_suite(k)[0]]
        for p in range(1, k + 1):
            for ell in range(0, p + 1):
                plan = build_term_plan(k, range(p), ell)
                if plan_mutator is not None:
                    plan = plan_mutator(plan)
                for g in funcs:
                    r = max(plan_residual(plan, g, x, quad) for x in pts)
                    results.append(CheckResult(f"plan/k={k}/p={p}/ell={ell}/{g.label}", r, 1e-8))

    # Operator inclusion-exclusion identity over every index at k <= 3:
    # sum_beta (-1)^|beta| Avg_beta Cum_alpha b^alpha == sum_beta (-1)^|beta| Avg_beta b.
    for k in (1, 2, 3):
        g = analytic_suite(k)[0]
        pts = _grid_points(k)
        for alpha in subindices(DerivIndex.ones(k)):
            if alpha.order == 0:
                continue
            worst = 0.0
            for x in pts:
                lhs = rhs = 0.0
                for beta in subindices(alpha):
                    sign = (-1) ** beta.order
                    weights = []
                    for i in range(k):
                        if beta.bits[i]:
                            weights.append(Weight.RAMP if alpha.bits[i] else Weight.FLAT)
                        elif alpha.bits[i]:
                            weights.append(Weight.CUM)
                        else:
                            weights.append(Weight.LOCAL)
                    lhs += sign * weighted_integral(
                        lambda p_, a=alpha: g.deriv(a, p_), tuple(weights), x, quad
                    )
                    rhs += sign * integrate_out(beta, lambda p_: g(p_), x, quad)
                worst = max(worst, abs(lhs - rhs))
            results.append(CheckResult(f"iex-operator/k={k}/alpha={alpha}", worst, 1e-10))

    # Corner-sum identity: full cumulative integral of the top partial.
    for k in (1, 2, 3):
        g = polynomial_suite(k)[-1]
        top = DerivIndex.ones(k)
        r = max(
            abs(
                integrate_to(top, lambda p_: g.deriv(top, p_), x, quad)
                - corner_sum(lambda p_: g(p_), x)
            )
            for x in _grid_points(k)
        )
        results.append(CheckResult(f"corner-sum/k={k}", r, 1e-10))

    # Reconstruction weight bound |w| <= 1 on a random sample.
    rng = np.random.default_rng(20240213)
    worst = 0.0
    for k in (1, 2, 3):
        u = rng.uniform(size=(10_000, k))
        x = rng.uniform(size=(10_000, k))
        for alpha in subindices(DerivIndex.ones(k)):
            worst = max(worst, float(np.abs(recon_weight(alpha, u, x)).max()) - 1.0)
    results.append(CheckResult("recon-weight-bound", max(worst, 0.0), 1e-12))

    # Composition of plain averages: Avg_a Avg_b == Avg_{a|b}.
    g2 = analytic_suite(2)[0]
    a, b = DerivIndex.from_string("10"), DerivIndex.from_string("01")
    comp = max(
        abs(
            integrate_out(a, lambda y: np.array([integrate_out(b, lambda p_: g2(p_), yi, quad) for yi in y]), x, quad)
            - integrate_out(a | b, lambda p_: g2(p_), x, quad)
        )
        for x in _grid_points(2)
    )
    results.append(CheckResult("avg-compose", comp, 1e-10))

    # Panel-split integral vs dense double-resolution tensor rule.
    quad2 = Quadrature(nodes=2 * quad.nodes)
    alpha = DerivIndex.from_string("11")
    dense = max(
        abs(
            reconstruction_integral(alpha, lambda p_: g2.deriv(alpha, p_), x, quad)
            - reconstruction_integral(alpha, lambda p_: g2.deriv(alpha, p_), x, quad2)
        )
        for x in _grid_points(2)
    )
    results.append(CheckResult("panel-quadrature-refinement", dense, 1e-10))

    return results


def kernel_checks() -> list[CheckResult]:
    """Moment and endpoint checks for every built kernel order."""
    results = []
    for d in (2, 4, 6):
        spec = _kernels.make_interior_kernel(d)
        worst = max(
            abs(_kernels.kernel_moment(spec, j) - (1.0 if j == 0 else 0.0)) for j in range(d)
        )
        results.append(CheckResult(f"moment/interior-d{d}", worst, 1e-10))
        endpoint = max(abs(spec.eval(spec.support[0])), abs(spec.eval(spec.support[1])))
        results.append(CheckResult(f"endpoint/interior-d{d}", float(endpoint), 1e-12))
    for d in range(1, 6):
        for side in ("left", "right"):
            spec = _kernels.make_edge_kernel(d, side)
            worst = max(
                abs(_kernels.kernel_moment(spec, j) - (1.0 if j == 0 else 0.0)) for j in range(d)
            )
            results.append(CheckResult(f"moment/{side}-d{d}", worst, 1e-10))
            endpoint = max(abs(spec.eval(spec.support[0])), abs(spec.eval(spec.support[1])))
            results.append(CheckResult(f"endpoint/{side}-d{d}", float(endpoint), 1e-12))
    return results
