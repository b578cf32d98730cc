from __future__ import annotations

from django.db import models


class BenchmarkRun(models.Model):
    """
    Snapshot of one benchmark execution: the scenario echo, seed and timings
    stored as JSON, with one RmseRow per (estimator, frequency, sweep point).
    """
    class SweepVar(models.TextChoices):
        SNR_DB = "snr_db", "SNR (dB)"
        M = "m", "Number of samples"

    name = models.CharField(max_length=100)
    created_at = models.DateTimeField(auto_now_add=True)
    seed = models.PositiveBigIntegerField()
    trials = models.PositiveIntegerField()
    sweep_var = models.CharField(max_length=10, choices=SweepVar.choices)
    config = models.JSONField(default=dict)
    timings = models.JSONField(default=dict)
    failures = models.PositiveIntegerField(default=0)
    notes = models.TextField(blank=True, null=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self) -> str:  # pragma: no cover
        return f"{self.name} (seed {self.seed}, {self.trials} trials)"

    def as_dict(self, include_rows: bool = False) -> dict:
        data = {
            "run_id": self.pk,
            "name": self.name,
            "created_at": self.created_at,
            "seed": self.seed,
            "trials": self.trials,
            "sweep_var": self.sweep_var,
            "failures": self.failures,
            "config": self.config,
            "timings": self.timings,
        }
        if include_rows:
            data["rows"] = [row.as_dict() for row in self.rows.all()]
        return data


class RmseRow(models.Model):
    class Estimator(models.TextChoices):
        MAP = "map", "MAP (alternating projections)"
        ESPRIT = "esprit", "ESPRIT"

    run = models.ForeignKey(BenchmarkRun, on_delete=models.CASCADE, related_name="rows")
    sweep_value = models.FloatField()
    estimator = models.CharField(max_length=10, choices=Estimator.choices)
    freq_index = models.PositiveSmallIntegerField()
    # NULL where no value exists (every trial failed, no bound)
    rmse = models.FloatField(null=True)
    crb_sqrt = models.FloatField(null=True)
    crb_mean_sqrt = models.FloatField(null=True)
    acrb_sqrt = models.FloatField(null=True)
    trials = models.PositiveIntegerField()
    failures = models.PositiveIntegerField(default=0)

    class Meta:
        ordering = ["sweep_value", "estimator", "freq_index"]
        constraints = [
            models.UniqueConstraint(
                fields=["run", "sweep_value", "estimator", "freq_index"], name="uniq_rmse_row_per_point"
            ),
        ]

    def __str__(self) -> str:  # pragma: no cover
        return f"{self.estimator} w{self.freq_index} @ {self.sweep_value:g}: {self.rmse}"

    def as_dict(self) -> dict:
        return {
            "sweep_value": self.sweep_value,
            "estimator": self.estimator,
            "freq_index": self.freq_index,
            "rmse_rad": self.rmse,
            "crb_sqrt_rad": self.crb_sqrt,
            "crb_mean_sqrt_rad": self.crb_mean_sqrt,
            "acrb_sqrt_rad": self.acrb_sqrt,
            "trials": self.trials,
            "failures": self.failures,
        }
