from __future__ import annotations

import csv
import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import CommandError, call_command
from django.test import TestCase

from linespec.artifacts import RMSE_COLUMNS, write_samples
from linespec.estimator import SolverConfig, estimate
from linespec.models import BenchmarkRun
from linespec.priors import VonMisesPrior
from linespec.signal_model import vandermonde

SCENARIO = {
    "name": "commands",
    "model": {"d": 2, "m": 16, "snr_db": 10},
    "priors": [{"mu_over_pi": 0.3, "kappa": 100}, {"fixed_over_pi": -0.4}],
    "signal": {"alpha": [1, 0.8], "phase": "uniform"},
    "sweep": {"type": "snr", "values": [0, 20]},
    "mc": {"trials": 3, "seed": 5},
    "solver": {"g": 64, "L": 4, "max_sweeps": 20},
    "estimators": ["map", "esprit"],
}


class CommandTestCase(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.scenario = self.write_scenario(SCENARIO)

    def tearDown(self):
        self.tmp.cleanup()

    def write_scenario(self, document: dict, name: str = "scenario.json") -> Path:
        path = self.dir / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    def call(self, *args, **options) -> str:
        out = StringIO()
        call_command(*args, stdout=out, **options)
        return out.getvalue()


class BenchmarkCommandTests(CommandTestCase):
    def test_writes_rmse_and_report(self):
        out = self.dir / "run"
        self.call("benchmark", scenario=str(self.scenario), out=str(out), threads=1)
        with (out / "rmse.csv").open(newline="") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(rows[0], RMSE_COLUMNS)
        self.assertEqual(len(rows) - 1, 2 * 2 * 2)
        report = json.loads((out / "report.json").read_text())
        self.assertEqual(report["seed"], 5)
        self.assertEqual(report["scenario"]["name"], "commands")
        self.assertEqual(set(report["timings_seconds"]), {"snr_db=0", "snr_db=20"})

    def test_rerun_and_thread_count_give_identical_csv(self):
        first, second = self.dir / "a", self.dir / "b"
        self.call("benchmark", scenario=str(self.scenario), out=str(first), threads=1)
        self.call("benchmark", scenario=str(self.scenario), out=str(second), threads=3)
        self.assertEqual((first / "rmse.csv").read_bytes(), (second / "rmse.csv").read_bytes())

    def test_overrides(self):
        out = self.dir / "override"
        self.call("benchmark", scenario=str(self.scenario), out=str(out), trials=1, seed=99, threads=1)
        report = json.loads((out / "report.json").read_text())
        self.assertEqual((report["trials"], report["seed"]), (1, 99))
        self.assertEqual(report["scenario"]["mc"], {"trials": 1, "seed": 99})

    def test_save_persists_the_run(self):
        output = self.call("benchmark", scenario=str(self.scenario), out=str(self.dir / "saved"), threads=1, save=True)
        run = BenchmarkRun.objects.get()
        self.assertIn(f"#{run.pk}", output)
        self.assertEqual(run.rows.count(), 8)
        self.assertEqual(run.sweep_var, BenchmarkRun.SweepVar.SNR_DB)

    def test_invalid_scenario_exits_with_config_error_before_running(self):
        bad = dict(SCENARIO, priors=[{"mu_over_pi": 0.3, "kappa": -1}, {"fixed_over_pi": -0.4}])
        out = self.dir / "never"
        with self.assertRaises(CommandError) as ctx:
            self.call("benchmark", scenario=str(self.write_scenario(bad, "bad.json")), out=str(out))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("priors[0].kappa", str(ctx.exception))
        self.assertFalse(out.exists())

    def test_zero_threads_is_a_config_error(self):
        out = self.dir / "never"
        with self.assertRaises(CommandError) as ctx:
            self.call("benchmark", scenario=str(self.scenario), out=str(out), threads=0)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("--threads", str(ctx.exception))
        self.assertFalse(out.exists())

    def test_unwritable_output_directory(self):
        blocker = self.dir / "file"
        blocker.write_text("x")
        with self.assertRaises(CommandError) as ctx:
            self.call("benchmark", scenario=str(self.scenario), out=str(blocker / "sub"))
        self.assertEqual(ctx.exception.returncode, 2)


class BoundsCommandTests(CommandTestCase):
    def test_single_line_bounds(self):
        document = dict(
            SCENARIO,
            model={"d": 1, "m": 16, "snr_db": 0},
            priors=[{"mu_over_pi": 0.2, "kappa": 0}],
            signal={"alpha": [1], "phase": "uniform"},
            sweep={"type": "samples", "values": [8, 32]},
        )
        self.call("bounds", scenario=str(self.write_scenario(document)), out=str(self.dir))
        with (self.dir / "bounds.csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        self.assertEqual(len(rows), 2)
        for row in rows:
            m = int(row["sweep_value"])
            self.assertAlmostEqual(float(row["crb_sqrt_rad"]), math.sqrt(6.0 / (m * (m * m - 1))), delta=1e-12)
            self.assertEqual(row["crb_sqrt_rad"], row["acrb_sqrt_rad"])
            self.assertEqual(row["status"], "ok")

    def test_missing_scenario_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("bounds", scenario=str(self.dir / "nope.json"), out=str(self.dir))
        self.assertEqual(ctx.exception.returncode, 2)


class EstimateCommandTests(CommandTestCase):
    def test_constant_signal_json(self):
        samples = write_samples(self.dir / "y.csv", np.ones(4, dtype=complex))
        output = self.call("estimate", samples=str(samples), prior=["0:0"], format="json")
        payload = json.loads(output)
        self.assertAlmostEqual(payload["omegas_rad"][0], 0.0, delta=1e-9)
        self.assertAlmostEqual(payload["s_hat"][0]["re"], 1.0, delta=1e-9)
        self.assertLess(payload["sigma2_hat"], 1e-20)
        self.assertTrue(payload["converged"])

    def test_prior_dominates(self):
        samples = write_samples(self.dir / "y.csv", np.ones(4, dtype=complex))
        payload = json.loads(self.call("estimate", samples=str(samples), prior=["0.1:1e8"], format="json"))
        cfg = SolverConfig.from_settings()
        self.assertAlmostEqual(payload["omegas_over_pi"][0], 0.1, delta=cfg.spacing(cfg.levels) / math.pi)

    def test_matches_library_call(self):
        rng = np.random.default_rng(13)
        truth = np.array([0.45, 0.6]) * math.pi
        y = vandermonde(truth, 24) @ np.ones(2) + 0.3 * (rng.standard_normal(24) + 1j * rng.standard_normal(24))
        samples = write_samples(self.dir / "y.csv", y)
        payload = json.loads(
            self.call("estimate", samples=str(samples), prior=["0.45:2000", "0.6:200"], grid=128, levels=5, format="json")
        )
        expected = estimate(
            y,
            [VonMisesPrior.from_multiple_of_pi(0.45, 2000), VonMisesPrior.from_multiple_of_pi(0.6, 200)],
            SolverConfig.from_settings(grid_points=128, levels=5),
        )
        self.assertEqual(payload["omegas_rad"], [float(w) for w in expected.omegas])
        self.assertEqual(payload["solver"]["g"], 128)

    def test_text_output(self):
        samples = write_samples(self.dir / "y.csv", np.ones(4, dtype=complex))
        output = self.call("estimate", samples=str(samples), prior=["0:0"])
        self.assertIn("omega_1 =", output)
        self.assertIn("sigma2 =", output)
        self.assertIn("converged", output)

    def test_configuration_errors(self):
        samples = write_samples(self.dir / "y.csv", np.ones(2, dtype=complex))
        cases = [
            {"prior": []},
            {"prior": ["0.1:-1"]},
            {"prior": ["0:0", "0.5:0"]},
        ]
        for options in cases:
            with self.subTest(**{k: str(v) for k, v in options.items()}), self.assertRaises(CommandError) as ctx:
                self.call("estimate", samples=str(samples), **options)
            self.assertEqual(ctx.exception.returncode, 2)

    def test_malformed_sample_file(self):
        path = self.dir / "bad.csv"
        path.write_text("1,2,3\n")
        with self.assertRaises(CommandError) as ctx:
            self.call("estimate", samples=str(path), prior=["0:0"])
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("samples", str(ctx.exception))


class PriorDensityCommandTests(CommandTestCase):
    def test_default_priors(self):
        self.call("prior_density", out=str(self.dir), points=10)
        with (self.dir / "prior_density.csv").open(newline="") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(len(rows), 11)
        self.assertEqual(len(rows[0]), 5)
        self.assertEqual(rows[0][:2], ["omega_rad", "omega_over_pi"])

    def test_custom_prior(self):
        self.call("prior_density", out=str(self.dir), points=4, prior=["0:0"])
        with (self.dir / "prior_density.csv").open(newline="") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(len(rows), 5)
        for row in rows[1:]:
            self.assertAlmostEqual(float(row[2]), 1 / (2 * math.pi), places=12)

    def test_too_few_points(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("prior_density", out=str(self.dir), points=1)
        self.assertEqual(ctx.exception.returncode, 2)


class ConvergenceCommandTests(CommandTestCase):
    def test_writes_error_per_sweep(self):
        self.call("convergence", scenario=str(self.scenario), out=str(self.dir), snr_db=30.0, seed=1)
        with (self.dir / "convergence.csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        self.assertEqual({r["freq_index"] for r in rows}, {"1", "2"})
        last = max(int(r["iteration"]) for r in rows)
        final = [float(r["abs_error_rad"]) for r in rows if int(r["iteration"]) == last]
        self.assertTrue(all(e < 0.05 for e in final), final)

    def test_rejects_short_realization(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("convergence", scenario=str(self.scenario), out=str(self.dir), m=2)
        self.assertEqual(ctx.exception.returncode, 2)
