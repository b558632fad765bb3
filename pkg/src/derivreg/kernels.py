"""Higher-order interior and boundary kernels with exact moment conditions.

Kernels are polynomials times a weight that vanishes at the support endpoints
(interior weight 1 - t^2 on [-1, 1], edge weight t(1 - t) on [0, 1]), so every
kernel is bounded, compactly supported and Hoelder continuous on the real
line.  Coefficients are obtained from the moment linear system

    integral t^j kappa(t) dt = delta_{j0},   0 <= j <= order - 1.

Multivariate smoothing uses a product of univariate kernels, with the kernel
for coordinate i switched to a one-sided edge kernel whenever the evaluation
point is within one bandwidth of a face of the unit cube.  Kernel arguments
follow the convention u = (data - evaluation point) / bandwidth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .core import ValidationError

__all__ = [
    "KernelSpec",
    "make_interior_kernel",
    "make_edge_kernel",
    "kernel_moment",
    "ProductKernel",
    "product_kernel",
    "check_orders",
    "default_orders",
    "BandwidthPlan",
]


@dataclass(frozen=True)
class KernelSpec:
    """A univariate kernel: polynomial times a boundary-vanishing weight.

    Evaluation keeps the factored form q(t) * w(t) so the kernel is exactly
    zero at the endpoints of its support; ``coeffs`` carries the expanded
    polynomial for reporting.
    """

    kind: str  # "interior" | "left" | "right"
    order: int
    support: tuple[float, float]
    q_coeffs: tuple[float, ...]  # ascending powers of t
    coeffs: tuple[float, ...]  # expanded q(t) * w(t), ascending powers
    sup_abs: float

    def _weight(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "interior":
            return (1.0 - u) * (1.0 + u)
        if self.kind == "left":
            return u * (1.0 - u)
        return -u * (1.0 + u)

    def eval(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo, hi = self.support
        inside = (u >= lo) & (u <= hi)
        vals = P.polyval(u, np.asarray(self.q_coeffs)) * self._weight(u)
        return np.where(inside, vals, 0.0)

    def __repr__(self):
        return f"KernelSpec({self.kind}, order={self.order}, support={self.support})"


def _solve_moment_system(powers_weight, d: int, interval: tuple[float, float]) -> np.ndarray:
    """Solve for q in q(t) * w(t) with moments delta_{j0}, j < d.

    ``powers_weight(m)`` must return integral over the interval of t^m * w(t).
    The Gram-type matrix of a positive weight is nonsingular; a singular solve
    here indicates an internal error, hence the assert.
    """
    A = np.empty((d, d))
    for j in range(d):
        for m in range(d):
            A[j, m] = powers_weight(j + m)
    rhs = np.zeros(d)
    rhs[0] = 1.0
    q = np.linalg.solve(A, rhs)
    assert np.all(np.isfinite(q)), "moment system produced non-finite coefficients"
    return q


def _finalize(kind: str, order: int, support: tuple[float, float], q_coeffs, coeffs) -> KernelSpec:
    spec = KernelSpec(
        kind,
        order,
        support,
        tuple(float(c) for c in q_coeffs),
        tuple(float(c) for c in coeffs),
        0.0,
    )
    grid = np.linspace(support[0], support[1], 4097)
    object.__setattr__(spec, "sup_abs", float(np.abs(spec.eval(grid)).max()))
    return spec


def make_interior_kernel(d: int) -> KernelSpec:
    """Construct the order-d interior kernel q(t)(1 - t^2) on [-1, 1].

    Interior kernels are even-order; an odd request is rounded up with a
    warning.  d = 2 gives the Epanechnikov kernel 0.75 (1 - t^2).
    """
    if d < 2:
        raise ValidationError(f"interior kernel order must be >= 2, got {d}")
    if d % 2:
        warnings.warn(f"interior kernel order {d} is odd; using {d + 1}", stacklevel=2)
        d = d + 1

    def moment(m: int) -> float:
        # integral_{-1}^{1} t^m (1 - t^2) dt
        if m % 2:
            return 0.0
        return 2.0 / (m + 1) - 2.0 / (m + 3)

    q = _solve_moment_system(moment, d, (-1.0, 1.0))
    coeffs = P.polymul(q, np.array([1.0, 0.0, -1.0]))
    return _finalize("interior", d, (-1.0, 1.0), q, coeffs)


def make_edge_kernel(d: int, side: str) -> KernelSpec:
    """Construct the order-d boundary kernel for the given side.

    The left kernel is q(t) t(1 - t) on [0, 1]; the right kernel is its mirror
    on [-1, 0].  Both vanish at the endpoints of their support.
    """
    if d < 1:
        raise ValidationError(f"edge kernel order must be >= 1, got {d}")
    if side not in ("left", "right"):
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")

    def moment(m: int) -> float:
        # integral_0^1 t^m (t - t^2) dt
        return 1.0 / (m + 2) - 1.0 / (m + 3)

    q = _solve_moment_system(moment, d, (0.0, 1.0))
    coeffs = P.polymul(q, np.array([0.0, 1.0, -1.0]))
    if side == "left":
        return _finalize("left", d, (0.0, 1.0), q, coeffs)
    q_mirror = np.array([c * (-1.0) ** i for i, c in enumerate(q)])
    mirrored = np.array([c * (-1.0) ** i for i, c in enumerate(coeffs)])
    return _finalize("right", d, (-1.0, 0.0), q_mirror, mirrored)


def kernel_moment(spec: KernelSpec, j: int) -> float:
    """Gauss-Legendre moment  integral t^j kappa(t) dt, exact for polynomials."""
    if j < 0:
        raise ValidationError("moment index must be >= 0")
    deg = j + len(spec.coeffs) - 1
    nodes = deg // 2 + 2
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = spec.support
    t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    return float(0.5 * (hi - lo) * np.sum(w * t**j * spec.eval(t)))


@dataclass(frozen=True)
class ProductKernel:
    """Product kernel with per-coordinate interior/edge switching.

    Coordinate i uses the interior kernel iff the evaluation point satisfies
    x_i in [bandwidth, 1 - bandwidth]; otherwise the appropriate one-sided
    edge kernel of the same order takes over.
    """

    order: int
    interior: KernelSpec
    left: KernelSpec
    right: KernelSpec

    def select(self, x_i: float, bandwidth: float) -> KernelSpec:
        if x_i < bandwidth:
            return self.left
        if x_i > 1.0 - bandwidth:
            return self.right
        return self.interior

    def eval_product(self, x, u, bandwidth: float) -> float:
        """Evaluate prod_i kappa_i(u_i) with specs selected for point x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if x.shape != u.shape:
            raise ValidationError(f"x and u shapes differ: {x.shape} vs {u.shape}")
        out = 1.0
        for xi, ui in zip(x, u):
            out *= float(self.select(float(xi), bandwidth).eval(ui))
        return out

    def column_weights(self, x_i: float, col: np.ndarray, h: float) -> np.ndarray:
        """Kernel values kappa((col - x_i)/h) / h for one coordinate."""
        spec = self.select(float(x_i), h)
        return spec.eval((col - x_i) / h) / h


@lru_cache(maxsize=64)
def product_kernel(d: int) -> ProductKernel:
    """Build (and cache) the order-d product kernel family."""
    interior = make_interior_kernel(d)
    return ProductKernel(
        order=interior.order,
        interior=interior,
        left=make_edge_kernel(interior.order, "left"),
        right=make_edge_kernel(interior.order, "right"),
    )


def check_orders(d: int, d1: int, k: int, p: int) -> None:
    """Gate on kernel orders: require d > (k + p)/2 and d1 > k."""
    if not d > 0.5 * (k + p):
        raise ValidationError(
            f"kernel order d={d} violates d > (k + p)/2 = {(k + p) / 2} for k={k}, p={p}"
        )
    if not d1 > k:
        raise ValidationError(f"density kernel order d1={d1} violates d1 > k = {k}")


def default_orders(k: int, p: int) -> tuple[int, int]:
    """Smallest even orders passing :func:`check_orders`."""
    d = 2
    while not d > 0.5 * (k + p):
        d += 2
    d1 = 2
    while not d1 > k:
        d1 += 2
    return d, d1


@dataclass(frozen=True)
class BandwidthPlan:
    """Rate-correct bandwidth rules for smoothing (h) and density (H).

    ``h(n) = h_const * n^(-1/(2 d + m))`` where m is the number of locally
    smoothed coordinates.  ``H(n)`` sits strictly inside the admissible
    window: it must shrink faster than both n^(-1/(2 d1)) and h(n) while
    staying above n^(-1/(2k)), which the extra n^(-0.01) factor ensures for
    the supported orders.
    """

    h_const: float = 1.0
    H_const: float = 1.0

    def __post_init__(self):
        if self.h_const <= 0 or self.H_const <= 0:
            raise ValidationError("bandwidth constants must be positive")

    def h(self, n: int, d: int, free_dims: int) -> float:
        if free_dims <= 0:
            raise ValidationError("h() is only defined when coordinates are smoothed")
        return self.h_const * float(n) ** (-1.0 / (2 * d + free_dims))

    def H(self, n: int, d1: int, d: int, free_dims: int) -> float:
        # H must shrink faster than both n^(-1/(2 d1)) and the smoothing
        # bandwidth, i.e. at the larger of the two exponents.
        expo = 1.0 / (2 * d1)
        if free_dims > 0:
            expo = max(expo, 1.0 / (2 * d + free_dims))
        return self.H_const * float(n) ** (-expo) * float(n) ** (-0.01)
