from __future__ import annotations

import math

from django import forms
from django.core.exceptions import ValidationError

from .harness import ESTIMATORS, SWEEP_SAMPLES, SWEEP_SNR


class StrictFormMixin:
    """
    Reject keys the form does not declare, so typos in scenario files
    fail loudly instead of silently falling back to defaults.
    """
    def unknown_keys(self) -> list[str]:
        return sorted(k for k in (self.data or {}) if k not in self.fields)

    def full_clean(self):
        super().full_clean()
        for key in self.unknown_keys():
            self.add_error(None, f"unknown key '{key}'")


class NumberListField(forms.Field):
    """A JSON list of numbers, optionally integers only."""

    def __init__(self, *, integers: bool = False, allow_infinite: bool = False, min_length: int = 1, **kwargs):
        self.integers = integers
        self.allow_infinite = allow_infinite
        self.min_length = min_length
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            raise ValidationError("Enter a list of numbers.", code="invalid")
        numbers = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ValidationError(f"'{item}' is not a number.", code="invalid")
            if self.integers and not float(item).is_integer():
                raise ValidationError(f"'{item}' is not an integer.", code="invalid")
            if math.isnan(item) or (math.isinf(item) and not self.allow_infinite):
                raise ValidationError(f"'{item}' is not a finite number.", code="invalid")
            numbers.append(int(item) if self.integers else float(item))
        return numbers

    def validate(self, value):
        super().validate(value)
        if self.required and len(value) < self.min_length:
            raise ValidationError(f"Enter at least {self.min_length} value(s).", code="min_length")


class PhaseField(forms.Field):
    """Either the string 'uniform' or a list of phases given as multiples of pi."""

    def to_python(self, value):
        if value in self.empty_values or value == "uniform":
            return None
        return NumberListField(required=True).to_python(value)


class ModelSectionForm(StrictFormMixin, forms.Form):
    d = forms.IntegerField(min_value=1)
    m = forms.IntegerField(min_value=2)
    snr_db = forms.FloatField(required=False)


class PriorEntryForm(StrictFormMixin, forms.Form):
    mu_over_pi = forms.FloatField(required=False)
    kappa = forms.FloatField(required=False, min_value=0)
    fixed_over_pi = forms.FloatField(required=False)

    def __init__(self, *args, allow_fixed: bool = True, **kwargs):
        self.allow_fixed = allow_fixed
        super().__init__(*args, **kwargs)

    def clean(self):
        cleaned = super().clean()
        fixed = cleaned.get("fixed_over_pi")
        mu = cleaned.get("mu_over_pi")
        kappa = cleaned.get("kappa")
        if fixed is not None:
            if not self.allow_fixed:
                self.add_error("fixed_over_pi", "Fixed frequencies are not allowed here.")
            elif mu is not None or kappa is not None:
                self.add_error(None, "Give either {mu_over_pi, kappa} or {fixed_over_pi}, not both.")
            return cleaned
        if "mu_over_pi" not in self.errors and mu is None:
            self.add_error("mu_over_pi", "This field is required.")
        if "kappa" not in self.errors and kappa is None:
            self.add_error("kappa", "This field is required.")
        return cleaned


class SignalSectionForm(StrictFormMixin, forms.Form):
    alpha = NumberListField(required=False)
    phase = PhaseField(required=False)

    def clean_alpha(self):
        alpha = self.cleaned_data["alpha"]
        if any(a < 0 for a in alpha):
            raise ValidationError("Amplitudes must be >= 0.")
        return alpha


class SweepSectionForm(StrictFormMixin, forms.Form):
    type = forms.ChoiceField(choices=[(SWEEP_SNR, "SNR"), (SWEEP_SAMPLES, "Number of samples")])
    values = NumberListField(allow_infinite=True)

    def clean(self):
        cleaned = super().clean()
        if cleaned.get("type") == SWEEP_SAMPLES and "values" in cleaned:
            values = cleaned["values"]
            if any(not float(v).is_integer() or v < 2 for v in values):
                self.add_error("values", "Sample counts must be integers >= 2.")
            else:
                cleaned["values"] = [int(v) for v in values]
        return cleaned


class MonteCarloSectionForm(StrictFormMixin, forms.Form):
    trials = forms.IntegerField(min_value=1, required=False)
    seed = forms.IntegerField(min_value=0)


class SolverSectionForm(StrictFormMixin, forms.Form):
    g = forms.IntegerField(min_value=8, required=False)
    L = forms.IntegerField(min_value=1, required=False)
    max_sweeps = forms.IntegerField(min_value=1, required=False)
    eps_grid_points = forms.FloatField(required=False)

    def clean_eps_grid_points(self):
        eps = self.cleaned_data["eps_grid_points"]
        if eps is not None and eps <= 0:
            raise ValidationError("Must be positive.")
        return eps


class EstimatorListField(forms.MultipleChoiceField):
    def __init__(self, **kwargs):
        super().__init__(choices=[(e, e) for e in ESTIMATORS], **kwargs)


class ComplexSamplesField(forms.Field):
    """A JSON list of [re, im] pairs."""

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            raise ValidationError("Enter a list of [re, im] pairs.", code="invalid")
        samples = []
        for k, pair in enumerate(value):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValidationError(f"Sample {k}: expected [re, im].", code="invalid")
            re, im = NumberListField(required=True).to_python(list(pair))
            samples.append(complex(re, im))
        return samples


class EstimateRequestForm(StrictFormMixin, forms.Form):
    samples = ComplexSamplesField()
    priors = forms.Field()
    g = forms.IntegerField(min_value=8, required=False)
    L = forms.IntegerField(min_value=1, required=False)
    max_sweeps = forms.IntegerField(min_value=1, required=False)

    def clean_priors(self):
        from .scenarios import parse_prior_entries

        entries = self.cleaned_data["priors"]
        if not isinstance(entries, list) or not entries:
            raise ValidationError("Enter a non-empty list of {mu_over_pi, kappa} objects.")
        try:
            specs = parse_prior_entries(entries, field="priors", allow_fixed=False)
        except ValidationError as exc:
            raise ValidationError(
                [f"{key}: {message}" for key, messages in sorted(exc.message_dict.items()) for message in messages]
            )
        return [spec.prior for spec in specs]

    def clean(self):
        cleaned = super().clean()
        samples, priors = cleaned.get("samples"), cleaned.get("priors")
        if samples and priors and len(samples) <= len(priors):
            self.add_error("samples", f"Need more samples than frequencies (m > d), got m={len(samples)}, d={len(priors)}.")
        return cleaned
