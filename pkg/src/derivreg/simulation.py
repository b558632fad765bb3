"""Cost-function Monte Carlo benchmark and convergence-rate experiments.

The data generator follows a Cobb-Douglas technology: average cost is
degree-one homogeneous in factor prices, AC = r * g(Q, w/r), and average
labor is its price derivative AL = dAC/dw.  Output Q and the price ratio
w/r are drawn uniformly on [0.5, 1.5]; the two equations' Gaussian errors
may be correlated.  The derivative-based estimator reconstructs AC from
the labor data with a windowed cumulative sum plus a windowed average of
the remainder; the reference estimator smooths AC data alone in both
dimensions.  The benchmark reports the ratio of their mean squared errors.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import DataSet, DerivIndex, TestFunction, ValidationError, split_stream, product_function
from .estimators import EstimationPlan, fit, make_grid, nadaraya_watson_grid
from .functionals import build_term_plan
from .kernels import BandwidthPlan

__all__ = [
    "CobbDouglasConfig",
    "CobbDouglasOracle",
    "SimSample",
    "generate",
    "derivative_ac_estimate",
    "derivative_ac_curve",
    "BenchmarkRules",
    "McResult",
    "relative_mse_table",
    "RateResult",
    "convergence_rate_experiment",
    "equation_r2",
]

_LO, _HI = 0.5, 1.5  # support of Q and w/r


@dataclass(frozen=True)
class CobbDouglasConfig:
    """Parameters of the cost/labor data generator."""

    c1: float = 0.8
    c2: float = 0.7
    c: float = 1.0
    sigma: float = 0.35
    rho: float = 0.0
    n: int = 100
    seed: int = 0
    r_random: bool = False  # draw capital price r ~ U[0.5, 1.5] instead of r = 1

    def __post_init__(self):
        if min(self.c1, self.c2, self.c) <= 0:
            raise ValidationError("c1, c2, c must be positive")
        if abs(self.rho) > 1:
            raise ValidationError(f"|rho| <= 1 required, got {self.rho}")
        if self.sigma < 0:
            raise ValidationError("sigma must be nonnegative")
        if self.n < 1:
            raise ValidationError("n >= 1 required")

    @property
    def c_tilde(self) -> float:
        s = self.c1 + self.c2
        ratio = self.c1 / self.c2
        return (ratio ** (self.c2 / s) + ratio ** (-self.c1 / s)) * self.c ** (-1.0 / s)

    @property
    def q_exponent(self) -> float:
        return (1.0 - self.c1 - self.c2) / (self.c1 + self.c2)

    @property
    def v_exponent(self) -> float:
        return self.c2 / (self.c1 + self.c2)


@dataclass(frozen=True)
class CobbDouglasOracle:
    """Noise-free cost and labor functions implied by a config."""

    cfg: CobbDouglasConfig

    def g(self, q, v):
        """Average cost per unit of capital price: AC = r * g(Q, w/r)."""
        c = self.cfg
        return c.c_tilde * np.asarray(q, dtype=float) ** c.q_exponent * np.asarray(
            v, dtype=float
        ) ** c.v_exponent

    def ac(self, q, v, r=1.0):
        return np.asarray(r, dtype=float) * self.g(q, v)

    def al(self, q, v):
        c = self.cfg
        return (
            c.v_exponent
            * c.c_tilde
            * np.asarray(q, dtype=float) ** c.q_exponent
            * np.asarray(v, dtype=float) ** (c.v_exponent - 1.0)
        )


@dataclass(frozen=True)
class SimSample:
    """One generated sample: raw covariates, responses, and oracle truth.

    ``ds_ac``/``ds_al`` hold the same data with covariates shifted onto the
    unit square (the raw support [0.5, 1.5]^2 has unit width, so the map is
    a pure shift).
    """

    cfg: CobbDouglasConfig
    q: np.ndarray
    v: np.ndarray
    r: np.ndarray
    y_ac: np.ndarray
    y_al: np.ndarray
    ac_true: np.ndarray
    al_true: np.ndarray
    oracle: CobbDouglasOracle

    @property
    def ds_ac(self) -> DataSet:
        X = np.column_stack([self.q - _LO, self.v - _LO])
        return DataSet(k=2, deriv=DerivIndex.from_string("00"), X=X, Y=self.y_ac)

    @property
    def ds_al(self) -> DataSet:
        X = np.column_stack([self.q - _LO, self.v - _LO])
        return DataSet(k=2, deriv=DerivIndex.from_string("01"), X=X, Y=self.y_al)


def generate(cfg: CobbDouglasConfig, path_prefix: tuple[int, ...] = ()) -> SimSample:
    """Draw one sample; streams are addressed (*path_prefix, j) with
    j = 0 output, 1 price ratio, 2 error pair, 3 capital price.

    With a fixed prefix, changing rho changes only the error mixing, not the
    covariate draws, which couples Monte Carlo cells across correlations.
    """
    q = split_stream(cfg.seed, (*path_prefix, 0)).uniform(cfg.n, _LO, _HI)
    v = split_stream(cfg.seed, (*path_prefix, 1)).uniform(cfg.n, _LO, _HI)
    z = split_stream(cfg.seed, (*path_prefix, 2)).standard_normal((cfg.n, 2))
    if cfg.r_random:
        r = split_stream(cfg.seed, (*path_prefix, 3)).uniform(cfg.n, _LO, _HI)
    else:
        r = np.ones(cfg.n)
    eps_ac = cfg.sigma * z[:, 0]
    eps_al = cfg.sigma * (cfg.rho * z[:, 0] + math.sqrt(1.0 - cfg.rho**2) * z[:, 1])
    oracle = CobbDouglasOracle(cfg)
    ac_true = oracle.ac(q, v, r)
    al_true = oracle.al(q, v)
    return SimSample(
        cfg=cfg,
        q=q,
        v=v,
        r=r,
        y_ac=ac_true + eps_ac,
        y_al=al_true + eps_al,
        ac_true=ac_true,
        al_true=al_true,
        oracle=oracle,
    )


# ---------------------------------------------------------------------------
# Derivative-based average-cost estimator
# ---------------------------------------------------------------------------


def derivative_ac_curve(
    sample: SimSample,
    eval_q: np.ndarray,
    eval_v: np.ndarray,
    eval_r: np.ndarray | float,
    h: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized derivative-based AC estimate at many (Q, w/r, r) points.

    Part a cumulates labor responses over the price ratio inside a Q-window
    of width h; part b averages the window remainder of the cost responses.
    Both windowed sums are normalized by the realized window count, which is
    the boxcar-average form: the price ratio is uniform on a unit-width
    interval, so the estimand is unchanged while the normalizer stops
    injecting window-count noise proportional to the level of the target.
    Returns (part_a, part_b, part_a + part_b).  Raises if any Q-window is
    empty (bandwidth too small).
    """
    if h <= 0:
        raise ValidationError("window width h must be positive")
    eval_q = np.atleast_1d(np.asarray(eval_q, dtype=float))
    eval_v = np.atleast_1d(np.asarray(eval_v, dtype=float))
    eval_r = np.broadcast_to(np.asarray(eval_r, dtype=float), eval_q.shape)
    q, v = sample.q, sample.v

    def windowed_sums(pts_q, pts_v, vals_cum, vals_win):
        """Per point: (window count, cum-masked sum, window sum), in blocks."""
        m = pts_q.shape[0]
        counts = np.empty(m, dtype=np.int64)
        cum_sums = np.empty(m)
        win_sums = np.empty(m)
        block = max(1, int(2e7) // max(q.shape[0], 1))
        for lo in range(0, m, block):
            hi = min(lo + block, m)
            win = np.abs(q[None, :] - pts_q[lo:hi, None]) <= 0.5 * h
            counts[lo:hi] = win.sum(axis=1)
            cum = win & (v[None, :] <= pts_v[lo:hi, None])
            cum_sums[lo:hi] = (cum * vals_cum[None, :]).sum(axis=1)
            win_sums[lo:hi] = (win * vals_win[None, :]).sum(axis=1)
        return counts, cum_sums, win_sums

    # part a at the data points themselves (needed for the part-b remainder)
    counts_d, cum_d, _ = windowed_sums(q, v, sample.y_al, sample.y_al)
    ga_data = sample.r * cum_d / counts_d

    resid = (sample.y_ac - ga_data) / sample.r
    counts, cum_sums, win_sums = windowed_sums(eval_q, eval_v, sample.y_al, resid)
    if not np.all(counts > 0):
        raise ValidationError(f"empty Q-window at width h={h}; increase h")
    ga = eval_r * cum_sums / counts
    gb = eval_r * win_sums / counts
    return ga, gb, ga + gb


def derivative_ac_estimate(sample: SimSample, q: float, w_over_r: float, h: float, r: float = 1.0) -> float:
    """Single-point derivative-based AC estimate (see derivative_ac_curve)."""
    _, _, ac = derivative_ac_curve(sample, [q], [w_over_r], r, h)
    return float(ac[0])


# ---------------------------------------------------------------------------
# Relative-MSE benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkRules:
    """Bandwidth and evaluation rules for the relative-MSE benchmark.

    Both estimators use rate-correct bandwidths with free constants; the
    defaults were fixed by a calibration run recorded in the repository
    metadata.  MSE is measured at the in-sample design points with both
    covariates inside the trim interval, which keeps window starvation at
    the support edges out of the comparison.
    """

    h_deriv_const: float = 0.35
    h_deriv_expo: float = 1.0 / 5.0
    h_base_const: float = 0.30
    h_base_expo: float = 1.0 / 4.0
    trim: tuple[float, float] = (0.6, 1.4)
    base_order: int = 2
    base_floor: float = 0.05

    def h_deriv(self, n: int) -> float:
        return self.h_deriv_const * float(n) ** (-self.h_deriv_expo)

    def h_base(self, n: int) -> float:
        return self.h_base_const * float(n) ** (-self.h_base_expo)


@dataclass(frozen=True)
class McResult:
    """One benchmark cell: MSEs, their ratio, and the ratio's MC error."""

    n: int
    rho: float
    mse_deriv: float
    mse_base: float
    ratio: float
    reps: int
    se_ratio: float

    def __post_init__(self):
        if self.reps < 1:
            raise ValidationError("replication count must be >= 1")


def _replication_mse(cfg: CobbDouglasConfig, rep: int, rules: BenchmarkRules) -> tuple[float, float]:
    """(derivative-based MSE, baseline MSE) over trimmed in-sample points."""
    sample = generate(cfg, path_prefix=(rep,))
    lo, hi = rules.trim
    keep = (sample.q >= lo) & (sample.q <= hi) & (sample.v >= lo) & (sample.v <= hi)
    if not np.any(keep):
        return math.nan, math.nan

    _, _, ac_hat = derivative_ac_curve(
        sample, sample.q[keep], sample.v[keep], sample.r[keep], rules.h_deriv(cfg.n)
    )
    truth = sample.ac_true[keep]
    mse_d = float(np.mean((ac_hat - truth) ** 2))

    X = np.column_stack([sample.q - _LO, sample.v - _LO])
    pts = X[keep]
    g_hat = nadaraya_watson_grid(
        X,
        sample.y_ac / sample.r,
        pts,
        rules.h_base(cfg.n),
        d=rules.base_order,
        den_floor=rules.base_floor,
        widen_on_empty=True,
    )
    mse_b = float(np.mean((sample.r[keep] * g_hat - truth) ** 2))
    return mse_d, mse_b


def _run_chunk(args) -> list[tuple[float, float]]:
    cfg, rules, lo, hi = args
    return [_replication_mse(cfg, rep, rules) for rep in range(lo, hi)]


def relative_mse_table(
    ns=(100, 200, 500, 1000),
    rhos=(0.0, 0.4, 0.9),
    reps: int = 1000,
    seed: int = 42,
    cfg: CobbDouglasConfig | None = None,
    rules: BenchmarkRules | None = None,
    workers: int = 1,
) -> tuple[list[McResult], dict]:
    """Monte Carlo table of derivative-based vs baseline MSE ratios.

    Returns the per-cell summaries and a details dict with the per-replication
    MSE arrays.  Output is bit-identical for fixed (ns, rhos, reps, seed)
    regardless of ``workers``: replication r of every cell uses streams
    derived from (seed, r, equation), and results merge in replication order.
    """
    if reps < 1:
        raise ValidationError("reps >= 1 required")
    rules = rules or BenchmarkRules()
    base = cfg or CobbDouglasConfig(seed=seed)
    results: list[McResult] = []
    details: dict[tuple[int, float], dict[str, np.ndarray]] = {}
    for n in ns:
        for rho in rhos:
            cell_cfg = replace(base, n=int(n), rho=float(rho), seed=seed)
            pairs: list[tuple[float, float]] = []
            if workers > 1:
                bounds = np.linspace(0, reps, workers + 1).astype(int)
                chunks = [
                    (cell_cfg, rules, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                ]
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    for part in pool.map(_run_chunk, chunks):
                        pairs.extend(part)
            else:
                pairs = _run_chunk((cell_cfg, rules, 0, reps))
            a = np.array([p[0] for p in pairs])
            b = np.array([p[1] for p in pairs])
            results.append(_summarize_cell(int(n), float(rho), a, b))
            details[(int(n), float(rho))] = {"mse_deriv": a, "mse_base": b}
    meta = {
        "seed": seed,
        "reps": reps,
        "stream_layout": "(replication, equation): 0=Q, 1=w/r, 2=errors, 3=r",
        "rules": {
            "h_deriv": f"{rules.h_deriv_const}*n^(-{rules.h_deriv_expo})",
            "h_base": f"{rules.h_base_const}*n^(-{rules.h_base_expo})",
            "trim": list(rules.trim),
            "base_order": rules.base_order,
            "base_floor": rules.base_floor,
        },
        "config": {
            "c1": base.c1,
            "c2": base.c2,
            "c": base.c,
            "sigma": base.sigma,
            "r_random": base.r_random,
        },
    }
    return results, {"cells": details, "metadata": meta}


def _summarize_cell(n: int, rho: float, a: np.ndarray, b: np.ndarray) -> McResult:
    m = a.shape[0]
    abar, bbar = float(a.mean()), float(b.mean())
    ratio = abar / bbar
    if m > 1:
        va = float(a.var(ddof=1)) / m
        vb = float(b.var(ddof=1)) / m
        cab = float(np.cov(a, b, ddof=1)[0, 1]) / m
        se = abs(ratio) * math.sqrt(
            max(va / abar**2 + vb / bbar**2 - 2.0 * cab / (abar * bbar), 0.0)
        )
    else:
        se = math.nan
    return McResult(n=n, rho=rho, mse_deriv=abar, mse_base=bbar, ratio=ratio, reps=m, se_ratio=se)


# ---------------------------------------------------------------------------
# Convergence-rate experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateResult:
    slope: float
    se: float
    ns: tuple[int, ...]
    mse: tuple[float, ...]


def _rate_test_function(k: int) -> TestFunction:
    factor = (lambda t: t * t + t + 0.3, lambda t: 2.0 * t + 1.0)
    return product_function([factor] * k, label="prod(t^2+t+0.3)")


def _rate_rep_mse(
    k: int, p: int, d: int, n: int, rep: int, seed: int, g: TestFunction, pts: np.ndarray, sigma: float
) -> float:
    if p == 0:
        X = split_stream(seed, (rep, 0)).uniform((n, k))
        eps = split_stream(seed, (rep, 1)).standard_normal(n)
        Y = g(X) + sigma * eps
        h = 0.7 * float(n) ** (-1.0 / (2 * d + k))
        vals = nadaraya_watson_grid(X, Y, pts, h, d=d, den_floor=0.05, widen_on_empty=True)
        return float(np.mean((vals - g(pts)) ** 2))

    datasets = {}
    plan_terms = build_plan_indices(k, p)
    for j, idx in enumerate(plan_terms):
        X = split_stream(seed, (rep, 2 * j)).uniform((n, k))
        eps = split_stream(seed, (rep, 2 * j + 1)).standard_normal(n)
        datasets[idx] = DataSet(k=k, deriv=idx, X=X, Y=g.deriv(idx, X) + sigma * eps)
    plan = EstimationPlan.build(
        k,
        range(p),
        0,
        datasets,
        d=d if p < k else None,
        density="uniform",
        bandwidths=BandwidthPlan(h_const=0.8),
    )
    res = fit(plan, pts)
    return float(np.mean((res.values - g(pts)) ** 2))


def build_plan_indices(k: int, p: int) -> list[DerivIndex]:
    return list(build_term_plan(k, range(p), 0).required_indices)


def convergence_rate_experiment(
    k: int,
    p: int,
    d: int,
    ns=(250, 500, 1000, 2000, 4000, 8000),
    reps: int = 200,
    seed: int = 7,
    sigma: float = 1.0,
) -> RateResult:
    """Least-squares slope of log MSE against log n.

    p = k exercises the pure nonlocal (root-n) estimator, 0 < p < k the
    partially smoothed one, and p = 0 the full-dimensional baseline.
    """
    if len(ns) < 4 or max(ns) < 10 * min(ns):
        raise ValidationError("n-grid needs >= 4 points spanning at least one decade")
    g = _rate_test_function(k)
    pts = make_grid(k, 3, offset=0.3)
    mses = []
    for n in ns:
        acc = 0.0
        for rep in range(reps):
            acc += _rate_rep_mse(k, p, d, int(n), rep, seed, g, pts, sigma)
        mses.append(acc / reps)
    logn = np.log(np.asarray(ns, dtype=float))
    logm = np.log(np.asarray(mses))
    A = np.column_stack([np.ones_like(logn), logn])
    coef, res_ss, *_ = np.linalg.lstsq(A, logm, rcond=None)
    dof = len(ns) - 2
    resid = logm - A @ coef
    s2 = float(resid @ resid) / dof if dof > 0 else math.nan
    cov = s2 * np.linalg.inv(A.T @ A)
    return RateResult(
        slope=float(coef[1]), se=float(math.sqrt(cov[1, 1])), ns=tuple(int(n) for n in ns), mse=tuple(mses)
    )


def equation_r2(cfg: CobbDouglasConfig, n: int) -> tuple[float, float]:
    """Empirical signal fraction 1 - var(eps)/var(y) for the two equations."""
    if n < 100:
        raise ValidationError("n >= 100 required for a stable variance estimate")
    sample = generate(replace(cfg, n=int(n)))
    r2_ac = 1.0 - float(np.var(sample.y_ac - sample.ac_true) / np.var(sample.y_ac))
    r2_al = 1.0 - float(np.var(sample.y_al - sample.al_true) / np.var(sample.y_al))
    return r2_ac, r2_al
