"""
ESPRIT with a forward-backward covariance estimate: the prior-free baseline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import DomainError
from .priors import wrap_angle

# Eigenvalues below this fraction of the largest count as noise-only.
LOW_RANK_RATIO = 1e-10


@dataclass(frozen=True)
class CovarianceEstimate:
    R: np.ndarray
    p: int
    snapshots: int


@dataclass(frozen=True)
class EspritEstimate:
    omegas: np.ndarray
    low_rank: bool
    eigenvalues: np.ndarray


def default_window(m: int) -> int:
    return int(m) // 2


def forward_backward_covariance(y, p: int) -> CovarianceEstimate:
    """Average of the sliding-window sample covariance and its J R^* J image.

    The result is Hermitian and persymmetric. Its overall scale is irrelevant
    for ESPRIT, only the subspace matters.
    """
    y = np.asarray(y, dtype=complex).ravel()
    m = len(y)
    if int(p) != p or p < 1 or p > m:
        raise DomainError(f"window length must satisfy 1 <= p <= m={m}, got {p!r}")
    p = int(p)
    X = sliding_window_view(y, p).T  # p x N, one column per window
    snapshots = X.shape[1]
    forward = X @ X.conj().T / snapshots
    R = 0.5 * (forward + forward[::-1, ::-1].conj())
    return CovarianceEstimate(R=R, p=p, snapshots=snapshots)


def esprit(y, d: int, p: int | None = None) -> EspritEstimate:
    """Least-squares ESPRIT frequency estimates, wrapped to [-pi, pi) and unordered."""
    y = np.asarray(y, dtype=complex).ravel()
    m = len(y)
    p = default_window(m) if p is None else int(p)
    if d < 1:
        raise DomainError(f"model order must be >= 1, got {d!r}")
    if p < d + 1 or m - p + 1 < d:
        raise DomainError(f"window p={p} cannot resolve d={d} frequencies from m={m} samples")
    cov = forward_backward_covariance(y, p)
    eigenvalues, eigenvectors = np.linalg.eigh(cov.R)
    order = np.argsort(np.abs(eigenvalues))[::-1]
    eigenvalues = eigenvalues[order]
    Es = eigenvectors[:, order[:d]]
    low_rank = bool(abs(eigenvalues[d - 1]) <= LOW_RANK_RATIO * max(abs(eigenvalues[0]), np.finfo(float).tiny))

    psi, *_ = np.linalg.lstsq(Es[:-1], Es[1:], rcond=None)
    omegas = wrap_angle(np.angle(np.linalg.eigvals(psi)))
    return EspritEstimate(omegas=np.atleast_1d(omegas), low_rank=low_rank, eigenvalues=eigenvalues)
