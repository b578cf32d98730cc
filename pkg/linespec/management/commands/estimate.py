from __future__ import annotations

import json
import math

import numpy as np
from django.core.exceptions import ValidationError

from linespec.artifacts import ArrayJSONEncoder, read_samples
from linespec.estimator import SolverConfig, estimate
from linespec.scenarios import parse_prior_option

from ._base import LinespecCommand


class Command(LinespecCommand):
    help = (
        "Estimate line frequencies from a CSV of complex samples (re,im per line). "
        "Pass one --prior MU_OVER_PI:KAPPA per frequency."
    )

    def add_arguments(self, parser):
        parser.add_argument("--samples", required=True, help="CSV file with re,im columns; header optional.")
        parser.add_argument(
            "--prior", action="append", default=[], metavar="MU_OVER_PI:KAPPA",
            help="Von Mises prior for one frequency, e.g. 0.45:2000 (kappa 0 = uninformative).",
        )
        parser.add_argument("--grid", type=int, help="Grid points per search (g).")
        parser.add_argument("--levels", type=int, help="Refinement levels (L).")
        parser.add_argument("--max-sweeps", type=int, dest="max_sweeps", help="Sweep cap per level.")
        parser.add_argument("--format", choices=["text", "json"], default="text")

    def handle(self, *args, **options):
        with self.config_errors():
            if not options["prior"]:
                raise ValidationError({"prior": ["Give at least one --prior MU_OVER_PI:KAPPA."]})
            priors = [parse_prior_option(text) for text in options["prior"]]
            y = read_samples(options["samples"])
            if len(y) <= len(priors):
                raise ValidationError(
                    {"samples": [f"need more samples than frequencies (m > d), got m={len(y)}, d={len(priors)}"]}
                )
            config = SolverConfig.from_settings(
                grid_points=options.get("grid"),
                levels=options.get("levels"),
                max_sweeps_per_level=options.get("max_sweeps"),
            )

        with self.runtime_errors():
            result = estimate(y, priors, config)

        if options["format"] == "json":
            payload = result.as_dict()
            payload["solver"] = config.as_dict()
            self.stdout.write(json.dumps(payload, cls=ArrayJSONEncoder, indent=2, sort_keys=True))
            return

        self.stdout.write(f"m = {len(y)}, d = {len(priors)}")
        for i, (omega, s) in enumerate(zip(result.omegas, result.s_hat), start=1):
            self.stdout.write(
                f"omega_{i} = {omega:.9f} rad ({omega / math.pi:.9f} pi)  "
                f"s_{i} = {s.real:.6g}{s.imag:+.6g}j  |s| = {abs(s):.6g}  arg = {float(np.angle(s)):.6f} rad"
            )
        self.stdout.write(f"sigma2 = {result.sigma2_hat:.6g}")
        self.stdout.write(f"iterations = {result.iterations} (per level: {list(result.sweeps_used)})")
        if result.converged:
            self.stdout.write(self.style.SUCCESS("converged"))
        else:
            self.stdout.write(self.style.WARNING("not converged within the sweep caps"))
