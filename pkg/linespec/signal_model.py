"""
Sum-of-cisoids signal model: y(t) = sum_i s_i exp(j w_i t) + n(t), t = 0..m-1.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .priors import TWO_PI

logger = logging.getLogger(__name__)

DUPLICATE_TOLERANCE = 1e-12


def _check_m(m: int) -> int:
    if int(m) != m or m < 1:
        raise DomainError(f"sample count m must be a positive integer, got {m!r}")
    return int(m)


def steering_vector(omega: float, m: int) -> np.ndarray:
    """a(w) = [1, e^{jw}, ..., e^{j(m-1)w}]."""
    m = _check_m(m)
    return np.exp(1j * float(omega) * np.arange(m))


def steering_matrix(omegas, m: int) -> np.ndarray:
    """Steering vectors for many frequencies as the columns of an m x n matrix."""
    m = _check_m(m)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    return np.exp(1j * np.outer(np.arange(m), omegas))


def near_duplicate_frequencies(omegas, tol: float = DUPLICATE_TOLERANCE) -> bool:
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    for i in range(len(omegas)):
        for k in range(i + 1, len(omegas)):
            gap = abs(math.remainder(omegas[i] - omegas[k], TWO_PI))
            if gap < tol:
                return True
    return False


def vandermonde(omegas, m: int) -> np.ndarray:
    """The m x d matrix A(w) whose i-th column is steering_vector(w_i, m).

    Near-duplicate frequencies are logged, not rejected; rank handling is
    left to the projections.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if len(omegas) and m <= len(omegas):
        raise DomainError(f"need m > d, got m={m}, d={len(omegas)}")
    if near_duplicate_frequencies(omegas):
        logger.warning("Vandermonde matrix with near-duplicate frequencies %s is ill-conditioned", omegas)
    return steering_matrix(omegas, m)


def snr_db_to_sigma2(snr_db: float) -> float:
    """Noise variance giving the requested SNR for unit-amplitude cisoids."""
    return 10.0 ** (-float(snr_db) / 10.0)


def draw_phases(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.uniform(0.0, TWO_PI, size=d)


@dataclass(frozen=True)
class SignalDraw:
    omegas: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    sigma2: float
    m: int

    @property
    def s(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=float) * np.exp(1j * np.asarray(self.phases, dtype=float))


@dataclass(frozen=True)
class SignalInstance:
    y: np.ndarray
    true_omegas: np.ndarray
    true_s: np.ndarray
    sigma2: float

    @property
    def m(self) -> int:
        return len(self.y)

    @property
    def d(self) -> int:
        return len(self.true_omegas)


def complex_noise(rng: np.random.Generator, sigma2: float, m: int) -> np.ndarray:
    """Circularly-symmetric complex Gaussian noise with E|n|^2 = sigma2."""
    scale = math.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m))


def synthesize(draw: SignalDraw, rng: np.random.Generator) -> SignalInstance:
    omegas = np.atleast_1d(np.asarray(draw.omegas, dtype=float))
    d = len(omegas)
    if draw.m <= d:
        raise DomainError(f"need m > d, got m={draw.m}, d={d}")
    if draw.sigma2 < 0 or not math.isfinite(draw.sigma2):
        raise DomainError(f"sigma2 must be finite and >= 0, got {draw.sigma2!r}")
    s = draw.s
    y = vandermonde(omegas, draw.m) @ s
    if draw.sigma2 > 0:
        y = y + complex_noise(rng, draw.sigma2, draw.m)
    return SignalInstance(y=y, true_omegas=omegas, true_s=s, sigma2=float(draw.sigma2))
