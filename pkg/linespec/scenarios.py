"""
Scenario files: JSON documents validated section by section with Django forms.

    {
      "name": "snr-sweep-m32",
      "model": {"d": 3, "m": 32, "snr_db": 0},
      "priors": [{"mu_over_pi": 0.45, "kappa": 2000}, {"mu_over_pi": 0.60, "kappa": 200},
                 {"fixed_over_pi": 0.75}],
      "signal": {"alpha": [1, 1, 1], "phase": "uniform"},
      "sweep": {"type": "snr", "values": [-10, 0, 10, 20]},
      "mc": {"trials": 500, "seed": 2013},
      "solver": {"g": 500, "L": 10, "max_sweeps": 50},
      "estimators": ["map", "esprit"]
    }

Every problem is reported under a dotted field path such as `priors[1].kappa`.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from .estimator import SolverConfig
from .exceptions import DomainError
from .forms import (
    EstimatorListField,
    ModelSectionForm,
    MonteCarloSectionForm,
    PriorEntryForm,
    SignalSectionForm,
    SolverSectionForm,
    SweepSectionForm,
)
from .harness import ESTIMATORS, SWEEP_SNR, FrequencySpec, Scenario
from .priors import VonMisesPrior

TOP_LEVEL_KEYS = {"name", "model", "priors", "signal", "sweep", "mc", "solver", "estimators"}
REQUIRED_SECTIONS = ("model", "priors", "sweep", "mc")


def _collect(form: forms.Form, prefix: str, errors: dict[str, list[str]]) -> None:
    for field, messages in form.errors.items():
        key = prefix if field == "__all__" else f"{prefix}.{field}"
        errors.setdefault(key, []).extend(messages)


def _section(document: dict, name: str, form_class, errors: dict, **kwargs):
    data = document.get(name, {})
    if not isinstance(data, dict):
        errors.setdefault(name, []).append("Expected an object.")
        return None
    form = form_class(data=data, **kwargs)
    if not form.is_valid():
        _collect(form, name, errors)
        return None
    return form.cleaned_data


def parse_prior_entries(entries: list, field: str = "priors", allow_fixed: bool = True) -> list[FrequencySpec]:
    errors: dict[str, list[str]] = {}
    specs = []
    for k, entry in enumerate(entries):
        path = f"{field}[{k}]"
        if not isinstance(entry, dict):
            errors.setdefault(path, []).append("Expected an object.")
            continue
        form = PriorEntryForm(data=entry, allow_fixed=allow_fixed)
        if not form.is_valid():
            _collect(form, path, errors)
            continue
        cleaned = form.cleaned_data
        if cleaned.get("fixed_over_pi") is not None:
            specs.append(FrequencySpec(prior=VonMisesPrior(0.0, 0.0), fixed=cleaned["fixed_over_pi"] * math.pi))
        else:
            specs.append(FrequencySpec(prior=VonMisesPrior.from_multiple_of_pi(cleaned["mu_over_pi"], cleaned["kappa"])))
    if errors:
        raise ValidationError(errors)
    return specs


def parse_prior_option(text: str) -> VonMisesPrior:
    """Parse the command-line form MU_OVER_PI:KAPPA, e.g. '0.45:2000'."""
    try:
        mu_text, kappa_text = text.split(":")
        return VonMisesPrior.from_multiple_of_pi(float(mu_text), float(kappa_text))
    except (ValueError, DomainError) as exc:
        raise ValidationError({"prior": [f"'{text}' is not MU_OVER_PI:KAPPA with kappa >= 0 ({exc})"]})


def parse_scenario(document: dict) -> Scenario:
    if not isinstance(document, dict):
        raise ValidationError({"scenario": ["A scenario must be a JSON object."]})
    errors: dict[str, list[str]] = {}
    for key in sorted(set(document) - TOP_LEVEL_KEYS):
        errors.setdefault(key, []).append("Unknown key.")
    for key in REQUIRED_SECTIONS:
        if key not in document:
            errors.setdefault(key, []).append("This section is required.")
    if errors:
        raise ValidationError(errors)

    model = _section(document, "model", ModelSectionForm, errors)
    signal = _section(document, "signal", SignalSectionForm, errors) or {}
    sweep = _section(document, "sweep", SweepSectionForm, errors)
    mc = _section(document, "mc", MonteCarloSectionForm, errors)
    solver = _section(document, "solver", SolverSectionForm, errors) or {}

    frequencies = []
    priors = document.get("priors")
    if not isinstance(priors, list) or not priors:
        errors.setdefault("priors", []).append("Enter a non-empty list of prior objects.")
    else:
        try:
            frequencies = parse_prior_entries(priors)
        except ValidationError as exc:
            for key, messages in exc.message_dict.items():
                errors.setdefault(key, []).extend(messages)

    estimators = list(ESTIMATORS)
    if "estimators" in document:
        field = EstimatorListField()
        try:
            estimators = field.clean(document["estimators"])
        except ValidationError as exc:
            errors.setdefault("estimators", []).extend(exc.messages)

    name = document.get("name", "scenario")
    if not isinstance(name, str) or not name.strip():
        errors.setdefault("name", []).append("Enter a non-empty string.")

    if errors:
        raise ValidationError(errors)

    d = model["d"]
    if len(frequencies) != d:
        errors.setdefault("priors", []).append(f"Expected {d} entries (model.d), got {len(frequencies)}.")
    alpha = signal.get("alpha") or [1.0] * d
    if len(alpha) != d:
        errors.setdefault("signal.alpha", []).append(f"Expected {d} amplitudes, got {len(alpha)}.")
    phase = signal.get("phase")
    if phase is not None and len(phase) != d:
        errors.setdefault("signal.phase", []).append(f"Expected {d} phases, got {len(phase)}.")

    if sweep["type"] == SWEEP_SNR:
        m_values, snr_values = [model["m"]], sweep["values"]
        if model["m"] <= d:
            errors.setdefault("model.m", []).append(f"Need m > d={d}.")
    else:
        m_values = sweep["values"]
        snr = model.get("snr_db")
        if snr is None:
            errors.setdefault("model.snr_db", []).append("Required for a sample-count sweep.")
        snr_values = [snr]
        if any(m <= d for m in m_values):
            errors.setdefault("sweep.values", []).append(f"Every sample count must exceed d={d}.")

    try:
        solver_config = SolverConfig.from_settings(
            grid_points=solver.get("g"),
            levels=solver.get("L"),
            max_sweeps_per_level=solver.get("max_sweeps"),
            eps_grid_points=solver.get("eps_grid_points"),
        )
    except DomainError as exc:
        errors.setdefault("solver", []).append(str(exc))

    if errors:
        raise ValidationError(errors)

    try:
        return Scenario(
            frequencies=tuple(frequencies),
            m_values=tuple(int(m) for m in m_values),
            snr_db_values=tuple(float(s) for s in snr_values),
            sweep=sweep["type"],
            alphas=tuple(float(a) for a in alpha),
            phases=None if phase is None else tuple(p * math.pi for p in phase),
            trials=mc["trials"] or settings.LINESPEC["DEFAULT_TRIALS"],
            seed=mc["seed"],
            estimators=tuple(estimators),
            solver=solver_config,
            name=name.strip(),
        )
    except DomainError as exc:
        raise ValidationError({"scenario": [str(exc)]})


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError({"scenario": [f"cannot read {path}: {exc.strerror or exc}"]})
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError({"scenario": [f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"]})
    return parse_scenario(document)


def describe_errors(exc: ValidationError) -> str:
    """One line per field: 'priors[1].kappa: Ensure this value is greater than or equal to 0.'"""
    if hasattr(exc, "error_dict"):
        return "\n".join(f"{field}: {' '.join(messages)}" for field, messages in sorted(exc.message_dict.items()))
    return " ".join(exc.messages)
