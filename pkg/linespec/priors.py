"""
Von Mises priors over frequencies on the circle [-pi, pi).

The density is p(w) = exp(kappa * cos(w - mu)) / (2 pi I0(kappa)). For large
kappa it approaches a Gaussian with variance 1/kappa, so a prior standard
deviation sigma corresponds to kappa ~ 1/sigma**2; kappa = 0 is the uniform
circle. Callers pick kappa directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import DomainError

TWO_PI = 2.0 * math.pi
# Below this concentration the sampler draws from the uniform circle.
UNIFORM_KAPPA = 1e-6
# Largest argument for which the unscaled Bessel functions stay finite.
UNSCALED_LIMIT = 700.0


def wrap_angle(x):
    """Map angles into [-pi, pi). Works on scalars and arrays."""
    wrapped = np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    wrapped = np.where(wrapped >= math.pi, wrapped - TWO_PI, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class VonMisesPrior:
    mu: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        mu = float(self.mu)
        kappa = float(self.kappa)
        if not math.isfinite(mu):
            raise DomainError(f"mu must be finite, got {self.mu!r}")
        if not math.isfinite(kappa) or kappa < 0:
            raise DomainError(f"kappa must be finite and >= 0, got {self.kappa!r}")
        object.__setattr__(self, "mu", wrap_angle(mu))
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def from_multiple_of_pi(cls, mu_over_pi: float, kappa: float) -> "VonMisesPrior":
        return cls(mu=float(mu_over_pi) * math.pi, kappa=kappa)

    @property
    def is_uniform(self) -> bool:
        return self.kappa == 0.0

    def __str__(self) -> str:  # pragma: no cover
        return f"vM(mu={self.mu / math.pi:.4g}pi, kappa={self.kappa:g})"


def _check_bessel_args(order: int, x: float) -> float:
    if order not in (0, 1):
        raise DomainError(f"Bessel order must be 0 or 1, got {order!r}")
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"Bessel argument must be finite and >= 0, got {x!r}")
    return x


def bessel_i(order: int, x: float) -> float:
    """Modified Bessel function of the first kind I0 or I1.

    Overflows to inf above roughly x = 713; use bessel_i_scaled there.
    """
    x = _check_bessel_args(order, x)
    return float(special.i0(x) if order == 0 else special.i1(x))


def bessel_i_scaled(order: int, x: float) -> float:
    """Exponentially scaled exp(-x) * I_order(x), finite for every x >= 0."""
    x = _check_bessel_args(order, x)
    return float(special.i0e(x) if order == 0 else special.i1e(x))


def log_normalizer(kappa: float) -> float:
    """ln(2 pi I0(kappa)) evaluated without forming I0(kappa)."""
    return math.log(TWO_PI * bessel_i_scaled(0, kappa)) + kappa


def log_pdf(prior: VonMisesPrior, omega):
    # kappa*cos(d) - ln(2 pi I0) == kappa*(cos(d) - 1) - ln(2 pi I0e)
    delta = wrap_angle(np.asarray(omega, dtype=float) - prior.mu)
    value = prior.kappa * (np.cos(delta) - 1.0) - math.log(TWO_PI * bessel_i_scaled(0, prior.kappa))
    if np.ndim(value) == 0:
        return float(value)
    return value


def pdf(prior: VonMisesPrior, omega):
    return np.exp(log_pdf(prior, omega))


def mean_resultant_length(prior: VonMisesPrior) -> float:
    """Magnitude of the first trigonometric moment, I1(kappa)/I0(kappa)."""
    if prior.is_uniform:
        return 0.0
    return bessel_i_scaled(1, prior.kappa) / bessel_i_scaled(0, prior.kappa)


def circular_mean(prior: VonMisesPrior) -> float:
    return prior.mu


def circular_variance(prior: VonMisesPrior) -> float:
    return 1.0 - mean_resultant_length(prior)


def gaussian_std(prior: VonMisesPrior) -> float:
    """Standard deviation of the large-kappa Gaussian approximation."""
    if prior.is_uniform:
        return math.inf
    return 1.0 / math.sqrt(prior.kappa)


def sample(prior: VonMisesPrior, rng: np.random.Generator, size=None):
    """Draw variates in [-pi, pi).

    numpy's sampler is the Best-Fisher rejection scheme; tiny concentrations
    are drawn from the uniform circle directly.
    """
    if prior.kappa < UNIFORM_KAPPA:
        draws = rng.uniform(-math.pi, math.pi, size=size)
    else:
        draws = rng.vonmises(prior.mu, prior.kappa, size=size)
    return wrap_angle(draws)


def sample_circular_mean(angles) -> float:
    z = np.mean(np.exp(1j * np.asarray(angles, dtype=float)))
    return float(np.angle(z))


def sample_circular_variance(angles) -> float:
    z = np.mean(np.exp(1j * np.asarray(angles, dtype=float)))
    return float(1.0 - abs(z))


def density_table(priors: list[VonMisesPrior], points: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate each prior's pdf on `points` evenly spaced angles of [-pi, pi).

    Returns the angle grid and a (len(priors), points) array of densities.
    """
    if points < 2:
        raise DomainError("density_table needs at least 2 points")
    omegas = -math.pi + TWO_PI * np.arange(points) / points
    table = np.vstack([pdf(p, omegas) for p in priors]) if priors else np.empty((0, points))
    return omegas, table
