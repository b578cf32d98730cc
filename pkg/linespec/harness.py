"""
Monte Carlo benchmark engine.

A scenario is swept over either the SNR or the sample count. For every sweep
point and trial a child random stream is derived from (master seed, sweep
index, trial index), frequencies are drawn from the priors (fixed ones kept),
phases are drawn, the signal is synthesized and every estimator is run.
Wrapped errors are aggregated into RMSE values next to the mean CRB and ACRB
over the same draws.

Trials are independent, so they may run on a thread pool; records are always
reduced in trial order with exactly rounded sums, which keeps reports
identical for any thread count.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .baselines import default_window, esprit
from .bounds import ACRB_NOTE, CrbInputs, acrb, crb, mean_bound_diagonal, with_mean_frequencies
from .estimator import SolverConfig, estimate
from .exceptions import DomainError, LinespecError, SingularFisherError, UnsupportedOrderError
from .priors import VonMisesPrior, sample, wrap_angle
from .signal_model import SignalDraw, SignalInstance, draw_phases, snr_db_to_sigma2, synthesize

logger = logging.getLogger(__name__)

ESTIMATORS = ("map", "esprit")
SWEEP_SNR = "snr"
SWEEP_SAMPLES = "samples"
MAX_UNKEYED_ORDER = 6


def wrap_error(true: float, est: float):
    """Signed shortest arc from `true` to `est`, in [-pi, pi)."""
    return wrap_angle(np.asarray(est, dtype=float) - np.asarray(true, dtype=float))


def match_frequencies(truth, estimates, keyed: bool) -> np.ndarray:
    """Permutation p such that estimates[p[i]] is paired with truth[i].

    Keyed estimates (MAP) are already indexed by prior; unkeyed ones (ESPRIT)
    get the assignment with the smallest total absolute wrapped error.
    """
    truth = np.atleast_1d(np.asarray(truth, dtype=float))
    estimates = np.atleast_1d(np.asarray(estimates, dtype=float))
    if len(truth) != len(estimates):
        raise DomainError(f"{len(truth)} true frequencies but {len(estimates)} estimates")
    d = len(truth)
    if keyed:
        return np.arange(d)
    if d > MAX_UNKEYED_ORDER:
        raise UnsupportedOrderError(f"unkeyed matching supports d <= {MAX_UNKEYED_ORDER}, got {d}")
    cost = np.abs(wrap_error(truth[:, None], estimates[None, :]))
    rows, cols = linear_sum_assignment(cost)
    return cols[np.argsort(rows)]


@dataclass(frozen=True)
class FrequencySpec:
    prior: VonMisesPrior
    fixed: float | None = None

    @property
    def stochastic(self) -> bool:
        return self.fixed is None

    @property
    def mean(self) -> float:
        return self.prior.mu if self.fixed is None else float(self.fixed)

    @property
    def lam(self) -> float:
        """Prior information added by the ACRB: kappa when drawn, 0 when fixed."""
        return self.prior.kappa if self.stochastic else 0.0

    def draw(self, rng: np.random.Generator) -> float:
        if self.fixed is not None:
            return float(self.fixed)
        return float(sample(self.prior, rng))


@dataclass(frozen=True)
class SweepPoint:
    index: int
    m: int
    snr_db: float


@dataclass(frozen=True)
class Scenario:
    frequencies: tuple[FrequencySpec, ...]
    m_values: tuple[int, ...]
    snr_db_values: tuple[float, ...]
    sweep: str = SWEEP_SNR
    alphas: tuple[float, ...] = ()
    phases: tuple[float, ...] | None = None
    trials: int = 500
    seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    solver: SolverConfig = field(default_factory=SolverConfig)
    name: str = "scenario"

    def __post_init__(self):
        d = len(self.frequencies)
        if d < 1:
            raise DomainError("a scenario needs at least one frequency")
        if not self.alphas:
            object.__setattr__(self, "alphas", (1.0,) * d)
        if len(self.alphas) != d or any(a < 0 or not math.isfinite(a) for a in self.alphas):
            raise DomainError(f"alpha must list {d} finite non-negative amplitudes")
        if self.phases is not None and len(self.phases) != d:
            raise DomainError(f"phase must list {d} values")
        if self.sweep not in (SWEEP_SNR, SWEEP_SAMPLES):
            raise DomainError(f"sweep must be '{SWEEP_SNR}' or '{SWEEP_SAMPLES}', got {self.sweep!r}")
        if not self.m_values or not self.snr_db_values:
            raise DomainError("scenario needs at least one m and one SNR value")
        if len(self.m_values) > 1 and len(self.snr_db_values) > 1:
            raise DomainError("only one of the sample counts and SNR values may vary per sweep")
        if self.sweep == SWEEP_SNR and len(self.m_values) > 1:
            raise DomainError("an SNR sweep takes a single sample count")
        if self.sweep == SWEEP_SAMPLES and len(self.snr_db_values) > 1:
            raise DomainError("a sample-count sweep takes a single SNR")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise DomainError(f"seed must be >= 0, got {self.seed}")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown or not self.estimators:
            raise DomainError(f"estimators must be a non-empty subset of {ESTIMATORS}, got {list(self.estimators)}")
        for m in self.m_values:
            if m <= d:
                raise DomainError(f"need m > d for every sample count, got m={m}, d={d}")
            if "esprit" in self.estimators:
                p = default_window(m)
                if p < d + 1 or m - p + 1 < d:
                    raise DomainError(f"m={m} is too short for an ESPRIT window resolving d={d}")

    @property
    def d(self) -> int:
        return len(self.frequencies)

    @property
    def priors(self) -> list[VonMisesPrior]:
        return [f.prior for f in self.frequencies]

    @property
    def sweep_var(self) -> str:
        return "snr_db" if self.sweep == SWEEP_SNR else "m"

    def sweep_points(self) -> list[SweepPoint]:
        if self.sweep == SWEEP_SNR:
            return [SweepPoint(k, self.m_values[0], float(s)) for k, s in enumerate(self.snr_db_values)]
        return [SweepPoint(k, int(m), float(self.snr_db_values[0])) for k, m in enumerate(self.m_values)]

    def sweep_value(self, point: SweepPoint) -> float:
        return point.snr_db if self.sweep == SWEEP_SNR else point.m

    def with_overrides(self, trials: int | None = None, seed: int | None = None) -> "Scenario":
        changes = {}
        if trials is not None:
            changes["trials"] = int(trials)
        if seed is not None:
            changes["seed"] = int(seed)
        return replace(self, **changes) if changes else self

    def as_document(self) -> dict:
        """The scenario in scenario-file form (frequencies as multiples of pi)."""
        priors = []
        for f in self.frequencies:
            if f.fixed is not None:
                priors.append({"fixed_over_pi": f.fixed / math.pi})
            else:
                priors.append({"mu_over_pi": f.prior.mu / math.pi, "kappa": f.prior.kappa})
        m_base = self.m_values[0]
        snr_base = self.snr_db_values[0]
        values = list(self.snr_db_values) if self.sweep == SWEEP_SNR else list(self.m_values)
        solver = self.solver.as_dict()
        return {
            "name": self.name,
            "model": {"d": self.d, "m": m_base, "snr_db": snr_base},
            "priors": priors,
            "signal": {
                "alpha": list(self.alphas),
                "phase": "uniform" if self.phases is None else [p / math.pi for p in self.phases],
            },
            "sweep": {"type": self.sweep, "values": values},
            "mc": {"trials": self.trials, "seed": self.seed},
            "solver": solver,
            "estimators": list(self.estimators),
        }


def trial_rng(seed: int, sweep_index: int, trial: int) -> np.random.Generator:
    """Counter-based child stream; independent of execution order and thread count."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(sweep_index, trial)))


@dataclass(frozen=True)
class EstimatorOutcome:
    estimator: str
    errors: np.ndarray | None
    seconds: float
    converged: bool | None = None
    failure: str | None = None

    @property
    def failed(self) -> bool:
        return self.errors is None


@dataclass(frozen=True)
class TrialRecord:
    sweep_index: int
    trial: int
    omegas: np.ndarray
    outcomes: dict[str, EstimatorOutcome]
    crb_diag: np.ndarray | None = None
    acrb_diag: np.ndarray | None = None


@dataclass(frozen=True)
class AggregateRow:
    sweep_var: str
    sweep_value: float
    estimator: str
    freq_index: int
    rmse: float
    crb_sqrt: float
    acrb_sqrt: float
    trials: int
    failures: int
    crb_mean_sqrt: float


@dataclass
class AggregateReport:
    scenario: dict
    seed: int
    trials: int
    rows: list[AggregateRow] = field(default_factory=list)
    timings: dict[str, dict[str, float]] = field(default_factory=dict)
    nonconverged: dict[str, int] = field(default_factory=dict)
    bound_failures: dict[str, int] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=lambda: {"acrb": ACRB_NOTE})

    def row(self, estimator: str, freq_index: int, sweep_value: float) -> AggregateRow:
        for r in self.rows:
            if r.estimator == estimator and r.freq_index == freq_index and r.sweep_value == sweep_value:
                return r
        raise KeyError((estimator, freq_index, sweep_value))

    @property
    def failures(self) -> int:
        return sum(r.failures for r in self.rows)


@dataclass(frozen=True)
class ScenarioOutcome:
    report: AggregateReport
    trials: list[TrialRecord]


def _run_estimator(name: str, scenario: Scenario, y: np.ndarray, truth: np.ndarray) -> EstimatorOutcome:
    started = time.perf_counter()
    try:
        if name == "map":
            result = estimate(y, scenario.priors, scenario.solver)
            estimates, converged = result.omegas, result.converged
            perm = match_frequencies(truth, estimates, keyed=True)
        else:
            result = esprit(y, scenario.d, default_window(len(y)))
            estimates, converged = result.omegas, None
            perm = match_frequencies(truth, estimates, keyed=False)
        errors = np.atleast_1d(wrap_error(truth, estimates[perm]))
    except (LinespecError, np.linalg.LinAlgError) as exc:
        return EstimatorOutcome(name, None, time.perf_counter() - started, failure=f"{type(exc).__name__}: {exc}")
    return EstimatorOutcome(name, errors, time.perf_counter() - started, converged=converged)


def draw_signal(scenario: Scenario, point: SweepPoint, rng: np.random.Generator) -> SignalInstance:
    """One realization: frequencies first, then phases, then noise, all from `rng`."""
    omegas = np.array([f.draw(rng) for f in scenario.frequencies])
    if scenario.phases is None:
        phases = draw_phases(rng, scenario.d)
    else:
        phases = np.asarray(scenario.phases, dtype=float)
    sigma2 = snr_db_to_sigma2(point.snr_db)
    return synthesize(SignalDraw(omegas, np.asarray(scenario.alphas), phases, sigma2, point.m), rng)


def run_trial(scenario: Scenario, point: SweepPoint, trial: int) -> TrialRecord:
    signal = draw_signal(scenario, point, trial_rng(scenario.seed, point.index, trial))
    omegas, sigma2 = signal.true_omegas, signal.sigma2

    outcomes = {}
    for name in scenario.estimators:
        outcome = _run_estimator(name, scenario, signal.y, omegas)
        if outcome.failed:
            logger.warning("trial %d at sweep point %d: %s failed (%s)", trial, point.index, name, outcome.failure)
        outcomes[name] = outcome

    crb_diag = acrb_diag = None
    try:
        inputs = CrbInputs(omegas, signal.true_s, sigma2, point.m, [f.lam for f in scenario.frequencies])
        crb_diag = np.diag(crb(inputs)).copy()
        acrb_diag = np.diag(acrb(with_mean_frequencies(inputs, [f.mean for f in scenario.frequencies]))).copy()
    except (DomainError, SingularFisherError) as exc:
        logger.debug("no bound for trial %d at sweep point %d: %s", trial, point.index, exc)
    return TrialRecord(point.index, trial, omegas, outcomes, crb_diag, acrb_diag)


def _rmse(errors: Sequence[float]) -> float:
    if not errors:
        return math.nan
    return math.sqrt(math.fsum(e * e for e in errors) / len(errors))


def _aggregate_point(scenario: Scenario, point: SweepPoint, records: list[TrialRecord], report: AggregateReport) -> None:
    records = sorted(records, key=lambda r: r.trial)
    value = scenario.sweep_value(point)
    d = scenario.d

    crbs = [np.diag(r.crb_diag) for r in records if r.crb_diag is not None]
    acrbs = [np.diag(r.acrb_diag) for r in records if r.acrb_diag is not None]
    crb_mean = mean_bound_diagonal(crbs, d)
    acrb_mean = mean_bound_diagonal(acrbs, d)
    key = f"{scenario.sweep_var}={value:g}"
    report.bound_failures[key] = len(records) - crb_mean.count

    report.timings[key] = {}
    for name in scenario.estimators:
        outcomes = [r.outcomes[name] for r in records]
        succeeded = [o for o in outcomes if not o.failed]
        report.timings[key][name] = math.fsum(o.seconds for o in outcomes) / len(outcomes)
        if name == "map":
            report.nonconverged[key] = sum(1 for o in succeeded if o.converged is False)
        for i in range(d):
            report.rows.append(
                AggregateRow(
                    sweep_var=scenario.sweep_var,
                    sweep_value=value,
                    estimator=name,
                    freq_index=i + 1,
                    rmse=_rmse([float(o.errors[i]) for o in succeeded]),
                    crb_sqrt=float(crb_mean.sqrt_mean_c[i]),
                    acrb_sqrt=float(acrb_mean.sqrt_mean_c[i]),
                    trials=len(succeeded),
                    failures=len(outcomes) - len(succeeded),
                    crb_mean_sqrt=float(crb_mean.mean_sqrt_c[i]),
                )
            )


def run_scenario(scenario: Scenario, threads: int = 1) -> ScenarioOutcome:
    threads = max(1, int(threads))
    report = AggregateReport(scenario=scenario.as_document(), seed=scenario.seed, trials=scenario.trials)
    all_records: list[TrialRecord] = []
    for point in scenario.sweep_points():
        started = time.perf_counter()
        trials = range(scenario.trials)
        if threads == 1:
            records = [run_trial(scenario, point, t) for t in trials]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                records = list(pool.map(lambda t: run_trial(scenario, point, t), trials))
        _aggregate_point(scenario, point, records, report)
        all_records.extend(records)
        logger.info(
            "%s: %s=%g done, %d trials in %.2fs",
            scenario.name, scenario.sweep_var, scenario.sweep_value(point), scenario.trials,
            time.perf_counter() - started,
        )
    return ScenarioOutcome(report=report, trials=all_records)


@dataclass(frozen=True)
class BoundRow:
    sweep_var: str
    sweep_value: float
    freq_index: int
    crb_sqrt: float
    acrb_sqrt: float
    status: str


def bound_table(scenario: Scenario) -> list[BoundRow]:
    """CRB and ACRB diagonals at the mean frequencies for every sweep point, no Monte Carlo.

    Uniform phases are replaced by zero phases; fixed phases are used as given.
    """
    means = [f.mean for f in scenario.frequencies]
    lam = [f.lam for f in scenario.frequencies]
    phases = np.zeros(scenario.d) if scenario.phases is None else np.asarray(scenario.phases, dtype=float)
    s = np.asarray(scenario.alphas, dtype=float) * np.exp(1j * phases)
    rows = []
    for point in scenario.sweep_points():
        value = scenario.sweep_value(point)
        try:
            inputs = CrbInputs(means, s, snr_db_to_sigma2(point.snr_db), point.m, lam)
            crb_diag = np.sqrt(np.diag(crb(inputs)))
            acrb_diag = np.sqrt(np.diag(acrb(inputs)))
            status = "ok"
        except (DomainError, SingularFisherError) as exc:
            logger.warning("%s=%g: bound not available (%s)", scenario.sweep_var, value, exc)
            crb_diag = acrb_diag = np.full(scenario.d, np.nan)
            status = "singular" if isinstance(exc, SingularFisherError) else "invalid"
        for i in range(scenario.d):
            rows.append(BoundRow(scenario.sweep_var, value, i + 1, float(crb_diag[i]), float(acrb_diag[i]), status))
    return rows
