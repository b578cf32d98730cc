"""
Reading sample files and writing benchmark artifacts.

CSV files use '.' decimals, '\n' line endings and repr() floats, so reruns
with the same seed produce identical bytes regardless of locale.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np
from django.core.exceptions import ValidationError
from django.core.serializers.json import DjangoJSONEncoder

from .harness import AggregateReport, BoundRow

RMSE_COLUMNS = [
    "sweep_var", "sweep_value", "estimator", "freq_index", "rmse_rad",
    "crb_sqrt_rad", "acrb_sqrt_rad", "trials", "failures", "crb_mean_sqrt_rad",
]
BOUNDS_COLUMNS = ["sweep_var", "sweep_value", "freq_index", "crb_sqrt_rad", "acrb_sqrt_rad", "status"]


def format_number(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


class ArrayJSONEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also understands numpy scalars, arrays and complex numbers."""

    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, (complex, np.complexfloating)):
            return {"re": float(o.real), "im": float(o.imag)}
        if isinstance(o, Path):
            return str(o)
        return super().default(o)


def read_samples(path: str | Path) -> np.ndarray:
    """Complex samples from a CSV of `re,im` rows; a header row is optional."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError({"samples": [f"cannot read {path}: {exc.strerror or exc}"]})
    values = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(not c for c in cells):
            continue
        if len(cells) != 2:
            raise ValidationError({"samples": [f"line {lineno}: expected two columns re,im, got {len(cells)}"]})
        try:
            re, im = float(cells[0]), float(cells[1])
        except ValueError:
            if lineno == 1 and not values:
                continue  # header
            raise ValidationError({"samples": [f"line {lineno}: not a number pair: {','.join(cells)}"]})
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValidationError({"samples": [f"line {lineno}: non-finite value"]})
        values.append(complex(re, im))
    if not values:
        raise ValidationError({"samples": [f"{path} holds no samples"]})
    return np.array(values, dtype=complex)


def write_samples(path: str | Path, y: Iterable[complex]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["re", "im"])
        for v in y:
            writer.writerow([repr(float(v.real)), repr(float(v.imag))])
    return path


def write_rows(stream, header: list[str], rows: Iterable[list]) -> None:
    """Header plus rows to any text stream, including an HttpResponse."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _write_csv(path: Path, header: list[str], rows: Iterable[list]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        write_rows(fh, header, rows)
    return path


def write_rmse_csv(report: AggregateReport, path: str | Path) -> Path:
    return _write_csv(
        Path(path),
        RMSE_COLUMNS,
        (
            [
                r.sweep_var, format_number(r.sweep_value), r.estimator, r.freq_index,
                format_number(r.rmse), format_number(r.crb_sqrt), format_number(r.acrb_sqrt),
                r.trials, r.failures, format_number(r.crb_mean_sqrt),
            ]
            for r in report.rows
        ),
    )


def write_bounds_csv(rows: list[BoundRow], path: str | Path) -> Path:
    return _write_csv(
        Path(path),
        BOUNDS_COLUMNS,
        (
            [r.sweep_var, format_number(r.sweep_value), r.freq_index,
             format_number(r.crb_sqrt), format_number(r.acrb_sqrt), r.status]
            for r in rows
        ),
    )


def report_document(report: AggregateReport, **extra) -> dict:
    doc = {
        "scenario": report.scenario,
        "seed": report.seed,
        "trials": report.trials,
        "failures": report.failures,
        "nonconverged": report.nonconverged,
        "bound_failures": report.bound_failures,
        "timings_seconds": report.timings,
        "notes": report.notes,
    }
    doc.update(extra)
    return doc


def write_report_json(report: AggregateReport, path: str | Path, **extra) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(report_document(report, **extra), cls=ArrayJSONEncoder, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return path


def write_density_csv(omegas: np.ndarray, table: np.ndarray, labels: list[str], path: str | Path) -> Path:
    return _write_csv(
        Path(path),
        ["omega_rad", "omega_over_pi", *labels],
        (
            [format_number(w), format_number(w / math.pi), *[format_number(v) for v in table[:, k]]]
            for k, w in enumerate(omegas)
        ),
    )


def write_convergence_csv(errors: np.ndarray, path: str | Path) -> Path:
    """errors: (iterations, d) absolute wrapped errors; iteration 0 is the initialization."""
    return _write_csv(
        Path(path),
        ["iteration", "freq_index", "abs_error_rad"],
        (
            [it, i + 1, format_number(errors[it, i])]
            for it in range(errors.shape[0])
            for i in range(errors.shape[1])
        ),
    )
