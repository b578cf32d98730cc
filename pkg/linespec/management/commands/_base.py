from __future__ import annotations

import logging
import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from linespec.exceptions import DomainError, LinespecError
from linespec.harness import Scenario
from linespec.scenarios import describe_errors, load_scenario

logger = logging.getLogger("linespec.commands")

CONFIG_ERROR = 2
RUNTIME_ERROR = 3


class LinespecCommand(BaseCommand):
    """Shared flags and error translation for the linespec commands."""

    def add_scenario_arguments(self, parser, required: bool = True) -> None:
        parser.add_argument("--scenario", required=required, help="Path to a JSON scenario file.")
        parser.add_argument("--out", help="Output directory (default: LINESPEC['OUTPUT_DIR']).")
        parser.add_argument("--threads", type=int, help="Worker threads (default: LINESPEC['THREADS']).")
        parser.add_argument("--trials", type=int, help="Override mc.trials from the scenario.")
        parser.add_argument("--seed", type=int, help="Override mc.seed from the scenario.")

    def load(self, options) -> Scenario:
        with self.config_errors():
            scenario = load_scenario(options["scenario"])
            return scenario.with_overrides(trials=options.get("trials"), seed=options.get("seed"))

    def output_dir(self, options) -> Path:
        out = Path(options.get("out") or settings.LINESPEC["OUTPUT_DIR"])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CommandError(f"cannot create output directory {out}: {exc.strerror or exc}", returncode=CONFIG_ERROR)
        if not os.access(out, os.W_OK):
            raise CommandError(f"output directory {out} is not writable", returncode=CONFIG_ERROR)
        return out

    def threads(self, options) -> int:
        threads = options.get("threads")
        if threads is None:
            threads = settings.LINESPEC["THREADS"]
        if threads < 1:
            raise CommandError("--threads must be at least 1", returncode=CONFIG_ERROR)
        return threads

    @contextmanager
    def config_errors(self):
        try:
            yield
        except ValidationError as exc:
            raise CommandError(f"invalid configuration:\n{describe_errors(exc)}", returncode=CONFIG_ERROR)
        except DomainError as exc:
            raise CommandError(f"invalid configuration: {exc}", returncode=CONFIG_ERROR)

    @contextmanager
    def runtime_errors(self):
        try:
            yield
        except (LinespecError, np.linalg.LinAlgError) as exc:
            logger.exception("computation failed")
            raise CommandError(f"computation failed: {exc}", returncode=RUNTIME_ERROR)
        except OSError as exc:
            raise CommandError(f"cannot write output: {exc}", returncode=RUNTIME_ERROR)
