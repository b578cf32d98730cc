"""
URL configuration for spectrumapp project.

The admin lists persisted benchmark runs; everything else is served by the
linespec app as JSON or CSV.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path("admin/", admin.site.urls),
    path("", include("linespec.urls")),
]
