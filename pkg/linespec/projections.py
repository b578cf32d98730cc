"""
Orthogonal projectors onto Vandermonde column spaces and their complements.

Projectors are built from an orthonormal basis of the column space (rank
revealing SVD) rather than from the normal equations, which keeps them
accurate when steering vectors are nearly collinear.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

# den below DEGENERATE_RATIO * m means the candidate lies in range(A_i).
DEGENERATE_RATIO = 1e-12


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise DomainError(f"expected a matrix, got an array of shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def _svd_threshold(shape: tuple[int, int], s: np.ndarray) -> float:
    if s.size == 0:
        return 0.0
    return max(shape) * np.finfo(float).eps * float(s[0])


def orthonormal_basis(A) -> tuple[np.ndarray, int]:
    """Orthonormal basis of range(A) and the numerical rank of A."""
    A = _as_matrix(A)
    m, d = A.shape
    if d == 0:
        return np.zeros((m, 0), dtype=complex), 0
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > _svd_threshold(A.shape, s)))
    return U[:, :rank], rank


def pseudo_inverse(A) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with threshold max(m, d) * eps * s_max."""
    A = _as_matrix(A)
    m, d = A.shape
    if d == 0:
        return np.zeros((0, m), dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > _svd_threshold(A.shape, s)
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (Vh.conj().T * inv_s) @ U.conj().T


@dataclass(frozen=True)
class Projector:
    matrix: np.ndarray
    source_rank: int

    def apply(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=complex)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        P = self.matrix
        return np.linalg.norm(P - P.conj().T) <= tol * max(np.linalg.norm(P), 1.0)

    def is_idempotent(self, tol: float = 1e-10) -> bool:
        P = self.matrix
        return np.linalg.norm(P @ P - P) <= tol * max(np.linalg.norm(P), 1.0)


def range_projector(A) -> Projector:
    A = _as_matrix(A)
    Q, rank = orthonormal_basis(A)
    return Projector(matrix=Q @ Q.conj().T, source_rank=rank)


def complement_projector(A) -> Projector:
    """Pi_A^perp = I - A A^dagger. Its trace is m - rank(A)."""
    A = _as_matrix(A)
    m = A.shape[0]
    Q, rank = orthonormal_basis(A)
    return Projector(matrix=np.eye(m, dtype=complex) - Q @ Q.conj().T, source_rank=rank)


@dataclass(frozen=True)
class ResidualComponents:
    r0: float
    num: complex
    den: float
    degenerate: bool

    @property
    def bracket(self) -> float:
        """y* Pi^perp_{[A_i, a]} y, i.e. r0 - |num|^2 / den."""
        if self.degenerate:
            return self.r0
        return self.r0 - abs(self.num) ** 2 / self.den


def _complement_apply(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    if Q.shape[1] == 0:
        return X
    return X - Q @ (Q.conj().T @ X)


def residual_components(A_i, a, y) -> ResidualComponents:
    """Split the residual of y against [A_i, a] using Pi_{A_i:a} = Pi_{A_i} + Pi_{a~}."""
    y = np.asarray(y, dtype=complex)
    a = np.asarray(a, dtype=complex)
    m = len(y)
    A_i = np.zeros((m, 0), dtype=complex) if A_i is None else _as_matrix(A_i)
    Q, _ = orthonormal_basis(A_i)
    ry = _complement_apply(Q, y)
    ra = _complement_apply(Q, a)
    den = float(np.real(np.vdot(ra, ra)))
    return ResidualComponents(
        r0=float(np.real(np.vdot(ry, ry))),
        num=complex(np.vdot(ry, a)),
        den=den,
        degenerate=den < DEGENERATE_RATIO * m,
    )


@dataclass(frozen=True)
class GridResiduals:
    r0: float
    num: np.ndarray
    den: np.ndarray
    degenerate: np.ndarray

    def brackets(self) -> np.ndarray:
        """r0 - |num|^2/den per candidate; degenerate candidates get +inf."""
        with np.errstate(divide="ignore", invalid="ignore"):
            values = self.r0 - np.abs(self.num) ** 2 / self.den
        return np.where(self.degenerate, np.inf, values)


def grid_residuals(A_i, candidates, y) -> GridResiduals:
    """residual_components for every column of `candidates` at once.

    The complement of range(A_i) is formed once; each candidate then costs a
    few matrix-vector products.
    """
    y = np.asarray(y, dtype=complex)
    m = len(y)
    C = np.asarray(candidates, dtype=complex)
    A_i = np.zeros((m, 0), dtype=complex) if A_i is None else _as_matrix(A_i)
    Q, _ = orthonormal_basis(A_i)
    ry = _complement_apply(Q, y)
    PC = _complement_apply(Q, C)
    den = np.sum(np.abs(PC) ** 2, axis=0)
    return GridResiduals(
        r0=float(np.real(np.vdot(ry, ry))),
        num=ry.conj() @ C,
        den=den,
        degenerate=den < DEGENERATE_RATIO * m,
    )
