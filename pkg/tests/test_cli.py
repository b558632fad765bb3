import numpy as np
import pytest

from derivreg.cli import main
from derivreg import split_stream


def run(args):
    return main([str(a) for a in args])


class TestVerify:
    def test_passes_and_writes_report(self, tmp_path, capsys):
        code = run(["verify", "--out-dir", tmp_path, "--quad-nodes", "16"])
        assert code == 0
        out = capsys.readouterr().out
        assert "identity checks passed" in out
        report = (tmp_path / "verify_report.csv").read_text().splitlines()
        assert report[0] == "name,residual,tol,passed"
        assert all(line.endswith(",1") for line in report[1:])

    def test_failing_check_exits_two(self, tmp_path, monkeypatch, capsys):
        from derivreg.functionals import CheckResult

        monkeypatch.setattr(
            "derivreg.cli.identity_checks",
            lambda quad_nodes: [CheckResult("plan/k=2/p=1/ell=0/poly", 1.0, 1e-8)],
        )
        code = run(["verify", "--out-dir", tmp_path])
        assert code == 2
        assert "plan/k=2/p=1/ell=0/poly" in capsys.readouterr().err

    def test_coarse_quadrature_exceeds_tight_tolerances(self, tmp_path, capsys):
        # 4 nodes per panel stays exact for the polynomial checks but leaves
        # ~1e-9 residuals on the analytic integrands, which trips the
        # tightest (1e-10) identity tolerances: larger residuals are
        # reported and the run exits nonzero.
        code = run(["verify", "--out-dir", tmp_path, "--quad-nodes", "4"])
        assert code == 2
        assert "exceeds" in capsys.readouterr().err
        lines = (tmp_path / "verify_report.csv").read_text().splitlines()[1:]
        failing = [ln for ln in lines if ln.endswith(",0")]
        assert failing
        assert all("poly" not in ln.split(",")[0] for ln in failing)  # polynomials stay exact


class TestSimulate:
    def test_rerun_and_workers_byte_identical(self, tmp_path):
        args = ["simulate", "--ns", 60, "--rhos", 0.0, "--reps", 8, "--seed", 3]
        for sub, extra in (("a", []), ("b", []), ("c", ["--workers", "2"])):
            assert run(args + ["--out-dir", tmp_path / sub] + extra) == 0
        payload = (tmp_path / "a" / "benchmark.csv").read_bytes()
        assert payload == (tmp_path / "b" / "benchmark.csv").read_bytes()
        assert payload == (tmp_path / "c" / "benchmark.csv").read_bytes()
        meta = (tmp_path / "a" / "benchmark_metadata.json").read_bytes()
        assert meta == (tmp_path / "b" / "benchmark_metadata.json").read_bytes()

    def test_dump_reps(self, tmp_path):
        code = run(
            ["simulate", "--ns", 60, "--rhos", 0.0, "--reps", 3, "--out-dir", tmp_path, "--dump-reps"]
        )
        assert code == 0
        lines = (tmp_path / "benchmark_replications.csv").read_text().splitlines()
        assert len(lines) == 4  # header + 3 replications

    def test_invalid_rho_fails_before_writing(self, tmp_path):
        out = tmp_path / "never"
        code = run(["simulate", "--rhos", 2.0, "--reps", 2, "--out-dir", out])
        assert code == 1
        assert not out.exists()

    def test_low_reps_warns(self, tmp_path, capsys):
        assert run(["simulate", "--ns", 60, "--rhos", 0.0, "--reps", 2, "--out-dir", tmp_path]) == 0
        assert "noisy" in capsys.readouterr().err


def _write_csv(path, X, Y):
    k = X.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join([f"x{j + 1}" for j in range(k)] + ["y"]) + "\n")
        for i in range(X.shape[0]):
            fh.write(",".join(repr(float(v)) for v in X[i]) + f",{float(Y[i])!r}\n")


@pytest.fixture
def example_config(tmp_path):
    """Derivative data in the first coordinate only (k = 2)."""
    n = 400
    X0 = split_stream(17, [0]).uniform((n, 2))
    X1 = split_stream(17, [1]).uniform((n, 2))
    g = lambda X: X[:, 0] * X[:, 1] + 0.5 * X[:, 1]
    g10 = lambda X: X[:, 1]
    _write_csv(tmp_path / "g00.csv", X0, g(X0))
    _write_csv(tmp_path / "g10.csv", X1, g10(X1))
    cfg = tmp_path / "plan.ini"
    cfg.write_text(
        "[plan]\nk = 2\ncoords = 1\nell = 0\nd = 2\n\n"
        "[data 00]\npath = %s\n\n[data 10]\npath = %s\n\n"
        "[grid]\npoints = 4\noffset = auto\n" % (tmp_path / "g00.csv", tmp_path / "g10.csv")
    )
    return cfg


class TestEstimate:
    def test_fit_csv_schema_and_determinism(self, tmp_path, example_config):
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert run(["estimate", "--config", example_config, "--out-dir", out1]) == 0
        assert run(["estimate", "--config", example_config, "--out-dir", out2]) == 0
        text = (out1 / "fit.csv").read_text()
        header = text.splitlines()[0].split(",")
        assert header[:3] == ["x1", "x2", "ghat"]
        assert "term_recon[10]" in header and "term_avg[10]" in header
        assert (out1 / "fit.csv").read_bytes() == (out2 / "fit.csv").read_bytes()

    def test_fit_approximates_truth(self, tmp_path, example_config):
        out = tmp_path / "o"
        assert run(["estimate", "--config", example_config, "--out-dir", out]) == 0
        rows = np.loadtxt(out / "fit.csv", delimiter=",", skiprows=1)
        truth = rows[:, 0] * rows[:, 1] + 0.5 * rows[:, 1]
        assert np.max(np.abs(rows[:, 2] - truth)) < 0.2

    def test_missing_dataset_named(self, tmp_path, example_config, capsys):
        cfg = example_config.read_text().split("[data 10]")[0]
        bad = tmp_path / "bad.ini"
        bad.write_text(cfg)
        code = run(["estimate", "--config", bad, "--out-dir", tmp_path / "x"])
        assert code == 1
        assert "10" in capsys.readouterr().err

    def test_plan_report_does_not_fit(self, tmp_path, example_config, capsys):
        out = tmp_path / "report-only"
        code = run(["estimate", "--config", example_config, "--plan-report", "--out-dir", out])
        assert code == 0
        text = capsys.readouterr().out
        assert "nonparametric dimension bound: 1" in text
        assert not (out / "fit.csv").exists()

    def test_rescaled_units_with_chain_rule(self, tmp_path):
        # raw domain [0, 10]; derivative responses stay in raw units (dy/dx)
        n = 300
        x_raw = np.linspace(0.0, 10.0, n)[:, None]
        _write_csv(tmp_path / "f.csv", x_raw, 0.25 * x_raw[:, 0] ** 2)  # g(x) = x^2/4
        _write_csv(tmp_path / "df.csv", x_raw, 0.5 * x_raw[:, 0])  # g'(x) = x/2
        cfg = tmp_path / "p.ini"
        cfg.write_text(
            "[plan]\nk = 1\ncoords = 1\nell = 0\n\n"
            "[data 0]\npath = %s\n\n[data 1]\npath = %s\n\n"
            "[grid]\npoints = 5\noffset = 0.1\n" % (tmp_path / "f.csv", tmp_path / "df.csv")
        )
        out = tmp_path / "o"
        assert run(["estimate", "--config", cfg, "--out-dir", out]) == 0
        rows = np.loadtxt(out / "fit.csv", delimiter=",", skiprows=1)
        assert rows[:, 0].max() > 5.0  # grid reported in raw units
        assert np.max(np.abs(rows[:, 1] - 0.25 * rows[:, 0] ** 2)) < 0.5


class TestKernelsCommand:
    def test_writes_samples_and_moments(self, tmp_path):
        assert run(["kernels", "--out-dir", tmp_path, "--interior", 2, "--edge", 1, 2]) == 0
        moments = (tmp_path / "kernel_moments.csv").read_text().splitlines()
        assert moments[0] == "kernel,j,moment,deviation"
        first = moments[1].split(",")
        assert first[0] == "interior-d2" and abs(float(first[2]) - 1.0) < 1e-10
        assert (tmp_path / "kernel_samples.csv").exists()


class TestExitCodes:
    def test_io_failure_exits_three(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code = run(["kernels", "--out-dir", blocker / "sub"])
        assert code == 3

    def test_bad_workers_validated(self, tmp_path):
        assert run(["verify", "--workers", 0, "--out-dir", tmp_path]) == 1
