"""Command-line interface: verify / simulate / estimate / kernels.

All outputs are CSV files plus a JSON metadata sidecar; payload bytes are
identical across reruns with the same flags and across worker counts.
Exit codes: 0 success, 1 validation failure, 2 numerical-tolerance failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    AffineMap,
    DataSet,
    DerivIndex,
    ParseError,
    ToleranceError,
    ValidationError,
)
from .estimators import EstimationPlan, fit, make_grid
from .functionals import build_term_plan, identity_checks, kernel_checks, nonparametric_dimension
from .kernels import BandwidthPlan, make_edge_kernel, make_interior_kernel, kernel_moment
from .simulation import CobbDouglasConfig, BenchmarkRules, relative_mse_table

__all__ = ["main", "RunConfig"]


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters common to every subcommand."""

    subcommand: str
    out_dir: Path
    seed: int
    workers: int
    quad_nodes: int

    def __post_init__(self):
        if self.workers < 1:
            raise ValidationError(f"--workers must be >= 1, got {self.workers}")
        if self.quad_nodes < 2:
            raise ValidationError(f"--quad-nodes must be >= 2, got {self.quad_nodes}")


def _common(args) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        out_dir=Path(args.out_dir),
        seed=args.seed,
        workers=args.workers,
        quad_nodes=args.quad_nodes,
    )


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)) or (isinstance(v, np.ndarray) and v.ndim == 0):
        return repr(float(v))
    return str(v)


def _write_metadata(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload["version"] = __version__
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def run_verify(args) -> int:
    cfg = _common(args)
    checks = identity_checks(quad_nodes=cfg.quad_nodes) + kernel_checks()
    _write_csv(
        cfg.out_dir / "verify_report.csv",
        ["name", "residual", "tol", "passed"],
        [(c.name, c.residual, c.tol, int(c.passed)) for c in checks],
    )
    _write_metadata(
        cfg.out_dir / "verify_metadata.json",
        {"quad_nodes": cfg.quad_nodes, "checks": len(checks)},
    )
    failed = [c for c in checks if not c.passed]
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = "ok" if c.passed else "FAIL"
        print(f"{c.name:<{width}}  residual={c.residual:10.3e}  tol={c.tol:.1e}  {status}")
    print(f"{len(checks) - len(failed)}/{len(checks)} identity checks passed")
    if failed:
        for c in failed:
            print(f"FAILED: {c.name} residual {c.residual:.3e} exceeds {c.tol:.1e}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def run_simulate(args) -> int:
    cfg = _common(args)
    if args.reps < 1:
        raise ValidationError("--reps must be >= 1")
    rhos = [float(r) for r in args.rhos]
    for r in rhos:
        if abs(r) > 1:
            raise ValidationError(f"|rho| <= 1 required, got {r}")
    ns = [int(n) for n in args.ns]
    if any(n < 2 for n in ns):
        raise ValidationError("sample sizes must be >= 2")
    rules = BenchmarkRules(
        h_deriv_const=args.h_deriv_const,
        h_base_const=args.h_base_const,
    )
    if args.reps < 30:
        print(f"warning: reps={args.reps} gives a noisy MC standard error", file=sys.stderr)
    results, extra = relative_mse_table(
        ns=ns,
        rhos=rhos,
        reps=args.reps,
        seed=cfg.seed,
        cfg=CobbDouglasConfig(sigma=args.sigma, seed=cfg.seed),
        rules=rules,
        workers=cfg.workers,
    )
    _write_csv(
        cfg.out_dir / "benchmark.csv",
        ["n", "rho", "mse_deriv", "mse_base", "ratio", "se_ratio", "reps"],
        [(r.n, r.rho, r.mse_deriv, r.mse_base, r.ratio, r.se_ratio, r.reps) for r in results],
    )
    if args.dump_reps:
        rows = []
        for (n, rho), arrs in extra["cells"].items():
            for rep, (a, b) in enumerate(zip(arrs["mse_deriv"], arrs["mse_base"])):
                rows.append((n, rho, rep, a, b))
        _write_csv(
            cfg.out_dir / "benchmark_replications.csv",
            ["n", "rho", "rep", "mse_deriv", "mse_base"],
            rows,
        )
    _write_metadata(cfg.out_dir / "benchmark_metadata.json", extra["metadata"])
    for r in results:
        print(
            f"n={r.n:5d} rho={r.rho:.1f}  ratio={r.ratio:.3f} (se {r.se_ratio:.3f})  "
            f"mse_deriv={r.mse_deriv:.5f} mse_base={r.mse_base:.5f}"
        )
    return 0


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------


def _read_raw_csv(path: Path, k: int) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("missing header row", 1) from None
        if len(header) != k + 1:
            raise ParseError(f"expected {k + 1} columns, found {len(header)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if len(rows[-1]) != k + 1:
                raise ParseError(f"expected {k + 1} cells, found {len(row)}", lineno)
    if not rows:
        raise ValidationError(f"n >= 1 required: {path} has no data rows")
    return np.asarray(rows, dtype=float)


def _load_estimate_config(path: Path):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise OSError(f"cannot read config file {path}")
    if "plan" not in parser:
        raise ValidationError("config needs a [plan] section")
    plan = parser["plan"]
    k = plan.getint("k")
    if k is None or k < 1:
        raise ValidationError("[plan] k must be a positive integer")
    coords_raw = plan.get("coords", "")
    coords = [int(c) - 1 for c in coords_raw.replace(",", " ").split()]
    if not coords:
        raise ValidationError("[plan] coords must list the 1-based derivative coordinates")
    ell = plan.getint("ell", 0)
    plan_cfg = {
        "k": k,
        "coords": coords,
        "ell": ell,
        "d": plan.getint("d", fallback=None),
        "d1": plan.getint("d1", fallback=None),
        "density": plan.get("density", "uniform"),
        "floor": plan.getfloat("floor", 0.05),
        "h_const": plan.getfloat("h_const", 1.0),
    }
    data_paths: dict[DerivIndex, Path] = {}
    for section in parser.sections():
        if section.startswith("data "):
            bits = section.split(None, 1)[1].strip()
            idx = DerivIndex.from_string(bits)
            if idx.k != k:
                raise ValidationError(f"[{section}] index has k={idx.k}, plan has k={k}")
            data_paths[idx] = Path(parser[section]["path"])
    grid = {
        "points": parser.getint("grid", "points", fallback=9),
        "offset": parser.get("grid", "offset", fallback="auto"),
    }
    rescale = parser.get("output", "rescale", fallback="auto")
    return plan_cfg, data_paths, grid, rescale


def run_estimate(args) -> int:
    cfg = _common(args)
    plan_cfg, data_paths, grid, rescale = _load_estimate_config(Path(args.config))
    k = plan_cfg["k"]

    term_plan = build_term_plan(k, plan_cfg["coords"], plan_cfg["ell"])
    needed = term_plan.required_indices
    missing = [idx for idx in needed if idx not in data_paths]
    if missing:
        raise ValidationError(
            "missing dataset for derivative index " + ", ".join(str(m) for m in missing)
        )

    if args.plan_report:
        bound = nonparametric_dimension(k, set(data_paths) | {DerivIndex.zeros(k)})
        print(f"plan: k={k} coords={[c + 1 for c in term_plan.coords]} ell={plan_cfg['ell']}")
        for t in term_plan.terms:
            print(f"  {t.coef:+d} * {t.label} (free dims {t.free_dims})")
        print(f"nonparametric dimension bound: {bound}")
        return 0

    raw = {idx: _read_raw_csv(data_paths[idx], k) for idx in needed}

    # Joint per-coordinate affine maps onto the unit cube.
    mins = np.min([r[:, :k].min(axis=0) for r in raw.values()], axis=0)
    maxs = np.max([r[:, :k].max(axis=0) for r in raw.values()], axis=0)
    in_unit = bool((mins >= 0.0).all() and (maxs <= 1.0).all())
    if rescale == "never" or (rescale == "auto" and in_unit):
        maps = [AffineMap(0.0, 1.0) for _ in range(k)]
    else:
        for j in range(k):
            if maxs[j] <= mins[j]:
                raise ValidationError(f"coordinate {j + 1} is constant; cannot rescale")
        maps = [AffineMap(float(mins[j]), float(maxs[j] - mins[j])) for j in range(k)]

    datasets = {}
    for idx, arr in raw.items():
        X = np.column_stack([maps[j].apply(arr[:, j]) for j in range(k)])
        # Chain rule: responses for differentiated coordinates scale with the map.
        scale = 1.0
        for j in idx.support:
            scale *= maps[j].scale
        datasets[idx] = DataSet(k=k, deriv=idx, X=X, Y=arr[:, k] * scale)

    plan = EstimationPlan.build(
        k,
        plan_cfg["coords"],
        plan_cfg["ell"],
        datasets,
        d=plan_cfg["d"],
        d1=plan_cfg["d1"],
        density=plan_cfg["density"],
        floor=plan_cfg["floor"],
        bandwidths=BandwidthPlan(h_const=plan_cfg["h_const"]),
    )

    if grid["offset"] == "auto":
        hs = [
            plan.bandwidths.h(datasets[t.deriv].n, plan.d, t.free_dims)
            for t in plan.plan.terms
            if t.free_dims > 0
        ]
        offset = max(hs) if hs else 0.0
    else:
        offset = float(grid["offset"])
    pts = make_grid(k, grid["points"], offset=offset)

    result = fit(plan, pts)

    labels = sorted(result.contributions)
    rows = []
    for i in range(pts.shape[0]):
        row = [maps[j].invert(pts[i, j]) for j in range(k)]
        row.append(result.values[i])
        row.extend(result.contributions[lab][i] for lab in labels)
        rows.append(row)
    header = [f"x{j + 1}" for j in range(k)] + ["ghat"] + [f"term_{lab}" for lab in labels]
    _write_csv(cfg.out_dir / "fit.csv", header, rows)

    meta = dict(result.metadata)
    meta.update(
        {
            "grid_points_per_dim": grid["points"],
            "grid_offset": offset,
            "rescale_maps": [{"offset": m.offset, "scale": m.scale} for m in maps],
            "seed": cfg.seed,
        }
    )
    _write_metadata(cfg.out_dir / "fit_metadata.json", meta)
    print(f"wrote {pts.shape[0]} fitted values to {cfg.out_dir / 'fit.csv'}")
    return 0


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def run_kernels(args) -> int:
    cfg = _common(args)
    specs = []
    for d in args.interior:
        specs.append((f"interior-d{d}", make_interior_kernel(int(d))))
    for d in args.edge:
        specs.append((f"left-d{d}", make_edge_kernel(int(d), "left")))
        specs.append((f"right-d{d}", make_edge_kernel(int(d), "right")))

    sample_rows = []
    for name, spec in specs:
        ts = np.linspace(spec.support[0], spec.support[1], args.samples)
        for t, v in zip(ts, spec.eval(ts)):
            sample_rows.append((name, t, v))
    _write_csv(cfg.out_dir / "kernel_samples.csv", ["kernel", "t", "value"], sample_rows)

    moment_rows = []
    for name, spec in specs:
        for j in range(spec.order + 1):
            target = 1.0 if j == 0 else 0.0
            m = kernel_moment(spec, j)
            moment_rows.append((name, j, m, m - target if j < spec.order else m))
    _write_csv(
        cfg.out_dir / "kernel_moments.csv",
        ["kernel", "j", "moment", "deviation"],
        moment_rows,
    )
    _write_metadata(
        cfg.out_dir / "kernels_metadata.json",
        {"interior": list(args.interior), "edge": list(args.edge), "samples": args.samples},
    )
    print(f"wrote {len(specs)} kernels to {cfg.out_dir}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="derivreg",
        description="Nonparametric regression with derivative data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out-dir", default="derivreg-out")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--quad-nodes", type=int, default=32)

    p = sub.add_parser("verify", help="run the exact-identity and kernel-moment suite")
    add_common(p)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("simulate", help="run the relative-MSE benchmark")
    add_common(p)
    p.add_argument("--ns", type=int, nargs="+", default=[100, 200, 500, 1000])
    p.add_argument("--rhos", type=float, nargs="+", default=[0.0, 0.4, 0.9])
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--sigma", type=float, default=0.35)
    p.add_argument("--h-deriv-const", type=float, default=BenchmarkRules.h_deriv_const)
    p.add_argument("--h-base-const", type=float, default=BenchmarkRules.h_base_const)
    p.add_argument("--dump-reps", action="store_true")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("estimate", help="fit an estimation plan to CSV datasets")
    add_common(p)
    p.add_argument("--config", required=True, help="INI config naming datasets and plan")
    p.add_argument("--plan-report", action="store_true", help="print the plan and exit")
    p.set_defaults(func=run_estimate)

    p = sub.add_parser("kernels", help="emit kernel samples and a moment report")
    add_common(p)
    p.add_argument("--interior", type=int, nargs="+", default=[2, 4, 6])
    p.add_argument("--edge", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=run_kernels)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ToleranceError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
