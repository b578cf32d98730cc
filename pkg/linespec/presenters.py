from __future__ import annotations

import logging
import math

from django.db import transaction

from .harness import AggregateReport
from .models import BenchmarkRun, RmseRow

logger = logging.getLogger(__name__)


def _nullable(value: float) -> float | None:
    return None if value is None or math.isnan(value) or math.isinf(value) else float(value)


class BenchmarkPresenter:
    """
    Persists benchmark reports:
    - record a run with its config echo and timings
    - store every aggregated RMSE row
    """

    def record(self, report: AggregateReport, notes: str | None = None) -> BenchmarkRun:
        scenario = report.scenario
        sweep_var = BenchmarkRun.SweepVar.SNR_DB if scenario["sweep"]["type"] == "snr" else BenchmarkRun.SweepVar.M
        with transaction.atomic():
            run = BenchmarkRun.objects.create(
                name=scenario.get("name", "scenario"),
                seed=report.seed,
                trials=report.trials,
                sweep_var=sweep_var,
                config=scenario,
                timings=report.timings,
                failures=report.failures,
                notes=notes,
            )
            RmseRow.objects.bulk_create(
                [
                    RmseRow(
                        run=run,
                        sweep_value=float(row.sweep_value),
                        estimator=row.estimator,
                        freq_index=row.freq_index,
                        rmse=_nullable(row.rmse),
                        crb_sqrt=_nullable(row.crb_sqrt),
                        crb_mean_sqrt=_nullable(row.crb_mean_sqrt),
                        acrb_sqrt=_nullable(row.acrb_sqrt),
                        trials=row.trials,
                        failures=row.failures,
                    )
                    for row in report.rows
                ]
            )
        logger.info("stored benchmark run #%s with %d rows", run.pk, len(report.rows))
        return run
