from __future__ import annotations

import math

import numpy as np
from django.core.exceptions import ValidationError

from linespec.artifacts import write_convergence_csv
from linespec.estimator import estimate
from linespec.harness import SweepPoint, draw_signal, wrap_error

from ._base import LinespecCommand


class Command(LinespecCommand):
    help = (
        "Run the MAP estimator on one synthesized realization and write the absolute "
        "frequency error after every sweep (convergence.csv)."
    )

    def add_arguments(self, parser):
        parser.add_argument("--scenario", required=True, help="Path to a JSON scenario file.")
        parser.add_argument("--snr-db", type=float, dest="snr_db", help="SNR of the realization (default: first sweep point).")
        parser.add_argument("--m", type=int, help="Sample count of the realization (default: first sweep point).")
        parser.add_argument("--seed", type=int, help="Override mc.seed from the scenario.")
        parser.add_argument("--out", help="Output directory (default: LINESPEC['OUTPUT_DIR']).")

    def handle(self, *args, **options):
        scenario = self.load(options)
        first = scenario.sweep_points()[0]
        point = SweepPoint(
            index=0,
            m=options["m"] if options.get("m") is not None else first.m,
            snr_db=options["snr_db"] if options.get("snr_db") is not None else first.snr_db,
        )
        with self.config_errors():
            if point.m <= scenario.d:
                raise ValidationError({"m": [f"need m > d={scenario.d}, got m={point.m}"]})
        out = self.output_dir(options)

        rng = np.random.default_rng(scenario.seed)
        with self.runtime_errors():
            signal = draw_signal(scenario, point, rng)
            result = estimate(signal.y, scenario.priors, scenario.solver)
            errors = np.abs(wrap_error(signal.true_omegas[None, :], np.vstack(result.trace)))
            path = write_convergence_csv(errors, out / "convergence.csv")

        final = ", ".join(f"{e / math.pi:.3g}pi" for e in errors[-1])
        self.stdout.write(f"m = {point.m}, SNR = {point.snr_db:g} dB, {len(result.trace) - 1} sweeps; final |error|: {final}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
