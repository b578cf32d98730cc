from __future__ import annotations

from django.urls import path

from .views import EstimateAPI, RmseCsvExportView, RunDetailAPI, RunListAPI

urlpatterns = [
    # Benchmark runs
    path("api/runs/", RunListAPI.as_view(), name="api_run_list"),
    path("api/runs/<int:pk>/", RunDetailAPI.as_view(), name="api_run_detail"),
    path("runs/<int:pk>/rmse.csv", RmseCsvExportView.as_view(), name="run_rmse_csv"),

    # Estimation
    path("api/estimate/", EstimateAPI.as_view(), name="api_estimate"),
]
