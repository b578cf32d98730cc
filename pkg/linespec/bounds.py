"""
Deterministic Cramer-Rao bound and the approximate hybrid bound (ACRB).

    CRB  = ((2/sigma2) Re{S* D* Pi^perp_A D S})^-1
    ACRB = ((2/sigma2) Re{S* D* Pi^perp_A D S} + diag(lambda))^-1, at the mean frequencies

The ACRB is a local Gaussian approximation of the von Mises prior and is only
meaningful for large concentrations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .exceptions import DomainError, SingularFisherError
from .priors import TWO_PI
from .projections import complement_projector
from .signal_model import steering_matrix

# Fisher matrices with a larger condition number are treated as singular.
MAX_CONDITION = 1e14

ACRB_NOTE = "approximation valid for large concentrations (local Gaussian prior)"


@dataclass(frozen=True)
class CrbInputs:
    omegas: np.ndarray
    s: np.ndarray
    sigma2: float
    m: int
    lam: np.ndarray = field(default=None)

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        s = np.atleast_1d(np.asarray(self.s, dtype=complex))
        lam = np.zeros(len(omegas)) if self.lam is None else np.atleast_1d(np.asarray(self.lam, dtype=float))
        if len(s) != len(omegas) or len(lam) != len(omegas):
            raise DomainError("omegas, s and lambda must have the same length")
        if self.m <= len(omegas):
            raise DomainError(f"need m > d, got m={self.m}, d={len(omegas)}")
        if not (self.sigma2 > 0 and math.isfinite(self.sigma2)):
            raise DomainError(f"sigma2 must be positive and finite, got {self.sigma2!r}")
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise DomainError("lambda entries must be finite and >= 0")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "lam", lam)

    @property
    def d(self) -> int:
        return len(self.omegas)


def steering_derivative(omega: float, m: int) -> np.ndarray:
    """da(w)/dw, entry t = j t e^{j w t}."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    t = np.arange(m)
    return 1j * t * np.exp(1j * float(omega) * t)


def fisher_information(inputs: CrbInputs) -> np.ndarray:
    """(2/sigma2) Re{S* D* Pi^perp_A D S} for the frequencies alone."""
    A = steering_matrix(inputs.omegas, inputs.m)
    D = np.column_stack([steering_derivative(w, inputs.m) for w in inputs.omegas])
    P = complement_projector(A).matrix
    DS = D * inputs.s[None, :]
    F = (2.0 / inputs.sigma2) * np.real(DS.conj().T @ P @ DS)
    return 0.5 * (F + F.T)


def _closest_pair(omegas: np.ndarray) -> tuple[int, int] | None:
    best, pair = math.inf, None
    for i in range(len(omegas)):
        for k in range(i + 1, len(omegas)):
            gap = abs(math.remainder(omegas[i] - omegas[k], TWO_PI))
            if gap < best:
                best, pair = gap, (i, k)
    return pair


def _invert(F: np.ndarray, inputs: CrbInputs) -> np.ndarray:
    cond = np.linalg.cond(F) if np.all(np.isfinite(F)) else math.inf
    if not math.isfinite(cond) or cond > MAX_CONDITION:
        zero = [i for i, s in enumerate(inputs.s) if s == 0]
        if zero:
            raise SingularFisherError(f"Fisher matrix is singular: zero amplitude at index {zero[0] + 1}")
        pair = _closest_pair(inputs.omegas)
        if pair is None:
            raise SingularFisherError("Fisher matrix is singular")
        i, k = pair
        raise SingularFisherError(
            f"Fisher matrix is singular: frequencies {i + 1} and {k + 1} "
            f"({inputs.omegas[i]:.6g} and {inputs.omegas[k]:.6g} rad) are nearly collinear",
            pair=pair,
        )
    C = np.linalg.inv(F)
    return 0.5 * (C + C.T)


def crb(inputs: CrbInputs) -> np.ndarray:
    """Deterministic CRB on the frequencies; lambda is ignored."""
    return _invert(fisher_information(inputs), inputs)


def acrb(inputs: CrbInputs) -> np.ndarray:
    """ACRB; `inputs.omegas` must hold the mean frequencies."""
    return _invert(fisher_information(inputs) + np.diag(inputs.lam), inputs)


def with_mean_frequencies(inputs: CrbInputs, means) -> CrbInputs:
    return replace(inputs, omegas=np.asarray(means, dtype=float))


@dataclass(frozen=True)
class BoundDiagonal:
    mean_c: np.ndarray
    mean_sqrt_c: np.ndarray
    count: int

    @property
    def sqrt_mean_c(self) -> np.ndarray:
        """sqrt(E[c_ii]), the default plotted bound."""
        return np.sqrt(self.mean_c)


def mean_bound_diagonal(matrices: Iterable[np.ndarray], d: int) -> BoundDiagonal:
    """Average diagonals of bound matrices, with exactly rounded sums so order does not matter."""
    diagonals = [np.diag(C) for C in matrices]
    if not diagonals:
        nan = np.full(d, np.nan)
        return BoundDiagonal(mean_c=nan, mean_sqrt_c=nan.copy(), count=0)
    stacked = np.vstack(diagonals)
    n = len(diagonals)
    mean_c = np.array([math.fsum(stacked[:, i]) / n for i in range(d)])
    mean_sqrt_c = np.array([math.fsum(np.sqrt(stacked[:, i])) / n for i in range(d)])
    return BoundDiagonal(mean_c=mean_c, mean_sqrt_c=mean_sqrt_c, count=n)
