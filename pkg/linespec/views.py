from __future__ import annotations

import json
import logging

import numpy as np
from django.http import HttpRequest, HttpResponse, JsonResponse
from django.shortcuts import get_object_or_404
from django.utils.decorators import method_decorator
from django.views import View
from django.views.decorators.csrf import csrf_exempt

from .artifacts import RMSE_COLUMNS, ArrayJSONEncoder, format_number, write_rows
from .estimator import SolverConfig, estimate
from .exceptions import LinespecError
from .forms import EstimateRequestForm
from .models import BenchmarkRun

logger = logging.getLogger(__name__)


class RunListAPI(View):
    """
    Stored benchmark runs, newest first.
    GET params: sweep_var=<snr_db|m>, limit=<int, default 50>
    """

    def get(self, request: HttpRequest) -> JsonResponse:
        qs = BenchmarkRun.objects.all()
        sweep_var = request.GET.get("sweep_var")
        if sweep_var:
            if sweep_var not in BenchmarkRun.SweepVar.values:
                return JsonResponse({"error": f"Unknown sweep_var '{sweep_var}'."}, status=400)
            qs = qs.filter(sweep_var=sweep_var)
        try:
            limit = int(request.GET.get("limit") or 50)
        except ValueError:
            return JsonResponse({"error": "limit must be an integer."}, status=400)
        if limit < 1:
            return JsonResponse({"error": "limit must be positive."}, status=400)
        runs = [run.as_dict() for run in qs[:limit]]
        return JsonResponse({"runs": runs})


class RunDetailAPI(View):
    def get(self, request: HttpRequest, pk: int) -> JsonResponse:
        run = get_object_or_404(BenchmarkRun, pk=pk)
        return JsonResponse(run.as_dict(include_rows=True))


class RmseCsvExportView(View):
    """The stored rows of one run in the rmse.csv layout."""

    def get(self, request: HttpRequest, pk: int) -> HttpResponse:
        run = get_object_or_404(BenchmarkRun, pk=pk)
        response = HttpResponse(content_type="text/csv")
        response["Content-Disposition"] = f'attachment; filename="rmse_run_{run.pk}.csv"'

        def cell(value):
            return "nan" if value is None else format_number(value)

        write_rows(
            response,
            RMSE_COLUMNS,
            (
                [
                    run.sweep_var, format_number(row.sweep_value), row.estimator, row.freq_index,
                    cell(row.rmse), cell(row.crb_sqrt), cell(row.acrb_sqrt),
                    row.trials, row.failures, cell(row.crb_mean_sqrt),
                ]
                for row in run.rows.all()
            ),
        )
        return response


@method_decorator(csrf_exempt, name="dispatch")
class EstimateAPI(View):
    """
    Runs the MAP estimator on posted samples.
    Expected POST body (JSON):
        {"samples": [[re, im], ...], "priors": [{"mu_over_pi": 0.45, "kappa": 2000}, ...],
         "g": 500, "L": 10, "max_sweeps": 50}
    Returns the estimate as produced by `manage.py estimate --format json`.
    """

    def post(self, request: HttpRequest) -> JsonResponse:
        try:
            data = json.loads(request.body.decode() or "{}")
        except (ValueError, UnicodeDecodeError):
            return JsonResponse({"error": "Invalid JSON payload."}, status=400)
        if not isinstance(data, dict):
            return JsonResponse({"error": "Expected a JSON object."}, status=400)

        form = EstimateRequestForm(data=data)
        if not form.is_valid():
            return JsonResponse({"error": "Invalid request.", "fields": form.errors.get_json_data()}, status=400)

        cleaned = form.cleaned_data
        try:
            config = SolverConfig.from_settings(
                grid_points=cleaned.get("g"),
                levels=cleaned.get("L"),
                max_sweeps_per_level=cleaned.get("max_sweeps"),
            )
            result = estimate(np.asarray(cleaned["samples"], dtype=complex), cleaned["priors"], config)
        except LinespecError as exc:
            logger.info("estimate request rejected: %s", exc)
            return JsonResponse({"error": str(exc)}, status=400)

        payload = result.as_dict()
        payload["solver"] = config.as_dict()
        return JsonResponse(payload, encoder=ArrayJSONEncoder)
