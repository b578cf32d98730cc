"""
MAP line-spectrum estimation with von Mises frequency priors.

The concentrated MAP cost is

    V(w) = (y* Pi_A^perp(w) y) * exp(phi(w)),   phi(w) = sum_i Re{beta_i e^{j w_i}},
    beta_i = -kappa_i e^{-j mu_i} / (m + 1),

and it is minimized one frequency at a time (alternating projections) over
grids that are halved around the current estimates at every refinement level.
Additive constants of the log-posterior never appear here; they do not move
the minimizer.

All comparisons happen in the log domain, so concentrations far beyond what
exp() can represent are fine.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError
from .priors import TWO_PI, VonMisesPrior, wrap_angle
from .projections import complement_projector, grid_residuals, orthonormal_basis, pseudo_inverse
from .signal_model import steering_matrix, vandermonde

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PriorWeights:
    beta: np.ndarray

    @classmethod
    def from_priors(cls, priors: Sequence[VonMisesPrior], m: int) -> "PriorWeights":
        kappa = np.array([p.kappa for p in priors], dtype=float)
        mu = np.array([p.mu for p in priors], dtype=float)
        return cls(beta=-kappa * np.exp(-1j * mu) / (m + 1))

    def pi_for(self, m: int) -> np.ndarray:
        """kappa_i e^{-j mu_i}, recovered from the weights built for m samples."""
        return -(m + 1) * self.beta

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.beta)

    def __len__(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class SolverConfig:
    grid_points: int = 500
    levels: int = 10
    eps_grid_points: float = 2.0
    max_sweeps_per_level: int = 50

    def __post_init__(self):
        if int(self.grid_points) != self.grid_points or self.grid_points < 8:
            raise DomainError(f"grid_points must be an integer >= 8, got {self.grid_points!r}")
        if int(self.levels) != self.levels or self.levels < 1:
            raise DomainError(f"levels must be an integer >= 1, got {self.levels!r}")
        if not (self.eps_grid_points > 0 and math.isfinite(self.eps_grid_points)):
            raise DomainError(f"eps_grid_points must be positive, got {self.eps_grid_points!r}")
        if int(self.max_sweeps_per_level) != self.max_sweeps_per_level or self.max_sweeps_per_level < 1:
            raise DomainError(f"max_sweeps_per_level must be an integer >= 1, got {self.max_sweeps_per_level!r}")

    @classmethod
    def from_settings(cls, **overrides) -> "SolverConfig":
        from django.conf import settings

        conf = getattr(settings, "LINESPEC", {})
        values = {
            "grid_points": conf.get("GRID_POINTS", 500),
            "levels": conf.get("REFINEMENT_LEVELS", 10),
            "eps_grid_points": conf.get("EPS_GRID_POINTS", 2.0),
            "max_sweeps_per_level": conf.get("MAX_SWEEPS_PER_LEVEL", 50),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def spacing(self, level: int) -> float:
        """Grid spacing at a 1-based refinement level."""
        return TWO_PI / (self.grid_points * 2 ** (level - 1))

    @property
    def resolution(self) -> float:
        """Worst-case quantization error at the last level, pi / (2^(L-1) g)."""
        return self.spacing(self.levels) / 2.0

    def as_dict(self) -> dict:
        return {
            "g": self.grid_points,
            "L": self.levels,
            "eps_grid_points": self.eps_grid_points,
            "max_sweeps": self.max_sweeps_per_level,
        }


@dataclass(frozen=True)
class LevelRecord:
    level: int
    spacing: float
    sweeps: int
    converged: bool


@dataclass(frozen=True)
class EstimateResult:
    omegas: np.ndarray
    s_hat: np.ndarray
    sigma2_hat: float
    sweeps_used: tuple[int, ...]
    converged: bool
    levels: tuple[LevelRecord, ...] = ()
    trace: tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def iterations(self) -> int:
        return int(sum(self.sweeps_used))

    def as_dict(self) -> dict:
        return {
            "omegas_rad": [float(w) for w in self.omegas],
            "omegas_over_pi": [float(w / math.pi) for w in self.omegas],
            "s_hat": [
                {
                    "re": float(s.real),
                    "im": float(s.imag),
                    "magnitude": float(abs(s)),
                    "phase_rad": float(np.angle(s)),
                }
                for s in self.s_hat
            ],
            "sigma2_hat": float(self.sigma2_hat),
            "converged": bool(self.converged),
            "sweeps_used": list(self.sweeps_used),
            "iterations": self.iterations,
        }


def _as_weights(beta, m: int | None = None) -> np.ndarray:
    if isinstance(beta, PriorWeights):
        return beta.beta
    beta = list(beta) if not isinstance(beta, np.ndarray) else beta
    if len(beta) and isinstance(beta[0], VonMisesPrior):
        if m is None:
            raise DomainError("m is required to turn priors into weights")
        return PriorWeights.from_priors(beta, m).beta
    return np.asarray(beta, dtype=complex)


def phi(omegas, beta) -> float:
    """phi(w) = Re{e_2* A(w) beta} = sum_i Re{beta_i e^{j w_i}}."""
    weights = _as_weights(beta)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if len(omegas) != len(weights):
        raise DomainError(f"{len(omegas)} frequencies but {len(weights)} prior weights")
    return float(np.sum(np.real(weights * np.exp(1j * omegas))))


def _check_y(y) -> np.ndarray:
    y = np.asarray(y, dtype=complex).ravel()
    if y.size == 0 or not np.all(np.isfinite(y)):
        raise DomainError("samples must be a non-empty vector of finite values")
    return y


def _resolve_m(y: np.ndarray, m: int | None) -> int:
    if m is not None and m != len(y):
        raise DomainError(f"m={m} does not match {len(y)} samples")
    return len(y)


def log_map_cost(y, omegas, priors: Sequence[VonMisesPrior], m: int | None = None) -> float:
    """ln V_map(w). -inf when the residual vanishes."""
    y = _check_y(y)
    m = _resolve_m(y, m)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if m <= len(omegas):
        raise DomainError(f"need m > d, got m={m}, d={len(omegas)}")
    Q, _ = orthonormal_basis(steering_matrix(omegas, m))
    r = y - Q @ (Q.conj().T @ y)
    residual = max(float(np.real(np.vdot(r, r))), 0.0)
    with np.errstate(divide="ignore"):
        log_residual = float(np.log(residual))
    return log_residual + phi(omegas, PriorWeights.from_priors(priors, m))


def map_cost(y, omegas, priors: Sequence[VonMisesPrior], m: int | None = None) -> float:
    """V_map(w) = (y* Pi^perp y) e^{phi(w)}; inf if e^{phi} overflows."""
    with np.errstate(over="ignore"):
        return float(np.exp(log_map_cost(y, omegas, priors, m)))


def log_per_frequency_cost(y, omega, others, prior: VonMisesPrior, m: int | None = None):
    """ln of the one-frequency cost with `others` held fixed. Vectorized over omega.

    Degenerate candidates (inside the span of `others`) come back as +inf and
    residuals are floored at residual_floor(y), exactly as in the grid search.
    """
    y = _check_y(y)
    m = _resolve_m(y, m)
    others = np.atleast_1d(np.asarray(others if others is not None else [], dtype=float))
    if m <= len(others) + 1:
        raise DomainError(f"need m > d, got m={m}, d={len(others) + 1}")
    candidates = np.atleast_1d(np.asarray(omega, dtype=float))
    beta = PriorWeights.from_priors([prior], m).beta[0]
    residuals = grid_residuals(steering_matrix(others, m), steering_matrix(candidates, m), y)
    values = _log_costs(residuals.brackets(), candidates, beta, residual_floor(y))
    return float(values[0]) if np.ndim(omega) == 0 else values


def per_frequency_cost(y, omega, others, prior: VonMisesPrior, m: int | None = None):
    with np.errstate(over="ignore"):
        return np.exp(log_per_frequency_cost(y, omega, others, prior, m))


def residual_floor(y: np.ndarray) -> float:
    """Residuals below eps * |y|^2 are rounding noise; the grid search treats them as equal."""
    return float(np.finfo(float).eps * np.real(np.vdot(y, y)))


def _log_costs(brackets: np.ndarray, candidates: np.ndarray, beta: complex, floor: float = 0.0) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        log_brackets = np.log(np.maximum(brackets, floor))
    if beta == 0:
        return log_brackets
    return log_brackets + np.real(beta * np.exp(1j * candidates))


class MapEstimator:
    """
    Alternating-projections MAP estimator for a fixed set of priors.

    Frequency i of the result always belongs to prior i: initialization runs
    in descending |beta_i| (ties by index) and every later sweep in index order.
    """

    def __init__(self, priors: Sequence[VonMisesPrior], config: SolverConfig | None = None):
        if not priors:
            raise DomainError("at least one prior is required")
        self.priors = tuple(priors)
        self.config = config or SolverConfig()

    @property
    def d(self) -> int:
        return len(self.priors)

    def initialization_order(self, m: int) -> list[int]:
        magnitudes = PriorWeights.from_priors(self.priors, m).magnitudes
        return sorted(range(self.d), key=lambda i: (-magnitudes[i], i))

    def estimate(self, y) -> EstimateResult:
        y = _check_y(y)
        m, d, cfg = len(y), self.d, self.config
        if m <= d:
            raise DomainError(f"need m > d, got m={m}, d={d}")
        beta = PriorWeights.from_priors(self.priors, m).beta
        t = np.arange(m)

        base_grid = -math.pi + cfg.spacing(1) * np.arange(cfg.grid_points)
        base_steering = np.exp(1j * np.outer(t, base_grid))

        omegas = np.zeros(d)
        done: list[int] = []
        for i in self.initialization_order(m):
            omegas[i] = self._search(y, beta[i], omegas[done], base_grid, base_steering, fallback=0.0)
            done.append(i)
        trace = [omegas.copy()]

        offsets = np.arange(cfg.grid_points) - cfg.grid_points // 2
        records: list[LevelRecord] = []
        for level in range(1, cfg.levels + 1):
            spacing = cfg.spacing(level)
            eps = cfg.eps_grid_points * spacing
            if level == 1:
                grids = [(base_grid, base_steering)] * d
            else:
                grids = []
                for i in range(d):
                    grid = wrap_angle(omegas[i] + spacing * offsets)
                    grids.append((grid, np.exp(1j * np.outer(t, grid))))

            level_converged = False
            sweeps = 0
            while sweeps < cfg.max_sweeps_per_level:
                sweeps += 1
                previous = omegas.copy()
                for i in range(d):
                    others = np.delete(omegas, i)
                    grid, steering = grids[i]
                    omegas[i] = self._search(y, beta[i], others, grid, steering, fallback=omegas[i])
                trace.append(omegas.copy())
                moved = np.abs(wrap_angle(omegas - previous))
                if np.all(moved < eps):
                    level_converged = True
                    break
            if not level_converged:
                logger.warning(
                    "level %d did not converge within %d sweeps (spacing %.3g rad)",
                    level, cfg.max_sweeps_per_level, spacing,
                )
            else:
                logger.debug("level %d converged after %d sweeps", level, sweeps)
            records.append(LevelRecord(level=level, spacing=spacing, sweeps=sweeps, converged=level_converged))

        A = vandermonde(omegas, m)
        s_hat = pseudo_inverse(A) @ y
        r = complement_projector(A).apply(y)
        sigma2_hat = max(float(np.real(np.vdot(r, r))), 0.0) / (m + 1)
        return EstimateResult(
            omegas=omegas,
            s_hat=s_hat,
            sigma2_hat=sigma2_hat,
            sweeps_used=tuple(rec.sweeps for rec in records),
            converged=all(rec.converged for rec in records),
            levels=tuple(records),
            trace=tuple(trace),
        )

    @staticmethod
    def _search(y, beta_i: complex, others: np.ndarray, grid: np.ndarray, steering: np.ndarray, fallback: float) -> float:
        m = len(y)
        residuals = grid_residuals(steering_matrix(others, m), steering, y)
        log_costs = _log_costs(residuals.brackets(), grid, beta_i, residual_floor(y))
        log_costs = np.where(np.isnan(log_costs), np.inf, log_costs)
        if np.all(np.isposinf(log_costs)):
            return float(fallback)
        # first (lowest index) minimizer wins ties
        return float(grid[int(np.argmin(log_costs))])


def estimate(y, priors: Sequence[VonMisesPrior], config: SolverConfig | None = None) -> EstimateResult:
    return MapEstimator(priors, config).estimate(y)
