from __future__ import annotations

from linespec.artifacts import write_bounds_csv
from linespec.harness import bound_table

from ._base import LinespecCommand


class Command(LinespecCommand):
    help = "Write CRB and ACRB diagonals at the mean frequencies for every sweep point (bounds.csv)."

    def add_arguments(self, parser):
        self.add_scenario_arguments(parser)

    def handle(self, *args, **options):
        scenario = self.load(options)
        out = self.output_dir(options)
        with self.runtime_errors():
            rows = bound_table(scenario)
            path = write_bounds_csv(rows, out / "bounds.csv")

        unavailable = sorted({r.sweep_value for r in rows if r.status != "ok"})
        if unavailable:
            self.stdout.write(
                self.style.WARNING(f"no bound at {scenario.sweep_var} = {', '.join(f'{v:g}' for v in unavailable)}")
            )
        self.stdout.write(self.style.SUCCESS(f"Wrote {path} ({len(rows)} rows)"))
