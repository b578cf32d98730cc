from __future__ import annotations

import math

from django.core.exceptions import ValidationError

from linespec.artifacts import write_density_csv
from linespec.priors import VonMisesPrior, density_table
from linespec.scenarios import parse_prior_option

from ._base import LinespecCommand

DEFAULT_PRIORS = (
    VonMisesPrior.from_multiple_of_pi(0.45, 500.0),
    VonMisesPrior.from_multiple_of_pi(0.60, 50.0),
    VonMisesPrior.from_multiple_of_pi(-0.95, 5.0),
)


def label(prior: VonMisesPrior) -> str:
    return f"pdf_mu{prior.mu / math.pi:+.3g}pi_kappa{prior.kappa:g}"


class Command(LinespecCommand):
    help = "Tabulate von Mises prior densities over [-pi, pi) (prior_density.csv)."

    def add_arguments(self, parser):
        parser.add_argument(
            "--prior", action="append", default=[], metavar="MU_OVER_PI:KAPPA",
            help="Prior to tabulate; repeatable. Defaults to 0.45:500, 0.60:50 and -0.95:5.",
        )
        parser.add_argument("--points", type=int, default=1000, help="Angles in the table.")
        parser.add_argument("--out", help="Output directory (default: LINESPEC['OUTPUT_DIR']).")

    def handle(self, *args, **options):
        with self.config_errors():
            priors = [parse_prior_option(text) for text in options["prior"]] or list(DEFAULT_PRIORS)
            if options["points"] < 2:
                raise ValidationError({"points": ["Must be at least 2."]})
        out = self.output_dir(options)
        with self.runtime_errors():
            omegas, table = density_table(priors, options["points"])
            path = write_density_csv(omegas, table, [label(p) for p in priors], out / "prior_density.csv")
        self.stdout.write(self.style.SUCCESS(f"Wrote {path} ({len(priors)} priors x {len(omegas)} points)"))
