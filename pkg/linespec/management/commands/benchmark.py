from __future__ import annotations

import time

from linespec.artifacts import write_report_json, write_rmse_csv
from linespec.harness import run_scenario
from linespec.presenters import BenchmarkPresenter

from ._base import LinespecCommand, logger


class Command(LinespecCommand):
    help = "Run a Monte Carlo scenario and write rmse.csv and report.json."

    def add_arguments(self, parser):
        self.add_scenario_arguments(parser)
        parser.add_argument("--save", action="store_true", help="Also store the run in the database.")

    def handle(self, *args, **options):
        scenario = self.load(options)
        threads = self.threads(options)
        out = self.output_dir(options)

        logger.info(
            "benchmark %s: %d sweep points x %d trials, seed %d, %d thread(s)",
            scenario.name, len(scenario.sweep_points()), scenario.trials, scenario.seed, threads,
        )
        started = time.perf_counter()
        with self.runtime_errors():
            outcome = run_scenario(scenario, threads=threads)
            report = outcome.report
            rmse_path = write_rmse_csv(report, out / "rmse.csv")
            report_path = write_report_json(report, out / "report.json")

        elapsed = time.perf_counter() - started
        self.stdout.write(f"Wrote {rmse_path} ({len(report.rows)} rows) and {report_path} in {elapsed:.1f}s")
        if report.failures:
            self.stdout.write(self.style.WARNING(f"{report.failures} estimator failure(s); see report.json"))
        if any(report.nonconverged.values()):
            self.stdout.write(self.style.WARNING(f"non-converged MAP trials: {report.nonconverged}"))

        if options["save"]:
            run = BenchmarkPresenter().record(report)
            self.stdout.write(self.style.SUCCESS(f"Stored as benchmark run #{run.pk}"))
        else:
            self.stdout.write(self.style.SUCCESS("Benchmark complete"))
