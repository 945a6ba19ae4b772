"""Single-ancilla embedding of a contraction into a quasi-unitary matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonUnitaryError, SpectralError
from .piston import TransitionMatrix

SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class SingularDefect:
    """``T = left @ diag(singular_values) @ right`` with singular values clamped to [0, 1]."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    defect_rank: int


@dataclass(frozen=True)
class DilatedUnitary:
    """``[[T, b], [c^dagger, alpha]]`` with the ancilla as the last mode."""

    entries: np.ndarray
    unitary_error_pct: float
    defect_rank: int

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def ancilla_index(self) -> int:
        return self.dim - 1

    @property
    def block(self) -> np.ndarray:
        n = self.ancilla_index
        return self.entries[:n, :n]


def _as_array(T) -> np.ndarray:
    if isinstance(T, TransitionMatrix):
        T = T.entries
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {T.shape}")
    if not np.all(np.isfinite(T)):
        raise DomainError("matrix has non-finite entries")
    return T


def singular_defect(T) -> SingularDefect:
    """SVD of ``T`` and the number of singular values strictly below one."""
    T = _as_array(T)
    left, d, right = np.linalg.svd(T)
    if d.max(initial=0.0) > 1.0 + SINGULAR_TOL:
        raise SpectralError(f"singular value {d.max():.12f} exceeds 1: not a contraction")
    d = np.clip(d, 0.0, 1.0)
    rank = int(np.count_nonzero(d < 1.0 - SINGULAR_TOL))
    return SingularDefect(left, d, right, rank)


def unitary_error(U) -> float:
    """Percentage error ``100 |1 - F|`` with ``F = |Tr sqrt(U U^dagger)| / d``."""
    U = _as_array(U)
    sigma = U @ U.conj().T
    eig = np.linalg.eigvalsh((sigma + sigma.conj().T) / 2)
    if eig.min() < -SINGULAR_TOL:
        raise DomainError(f"U U^dagger has eigenvalue {eig.min():.3e} < 0")
    fidelity = abs(np.sum(np.sqrt(np.clip(eig, 0.0, None)))) / U.shape[0]
    return 100.0 * abs(1.0 - fidelity)


def dilate_single_ancilla(T) -> DilatedUnitary:
    """Embed ``T`` with one ancilla that absorbs its most deficient singular direction.

    With ``k`` the index of the smallest singular value (lowest index on ties)
    and ``s = sqrt(1 - d_k^2)``: ``b = s * left[:, k]``, ``c^dagger = s * right[k, :]``
    and ``alpha = -d_k``. This is exactly unitary when at most one singular
    value is below one; otherwise the residual shows up in the unitary error.
    """
    T = _as_array(T)
    svd = singular_defect(T)
    n = T.shape[0]
    k = int(np.argmin(svd.singular_values))
    s = np.sqrt(1.0 - svd.singular_values[k] ** 2)
    U = np.zeros((n + 1, n + 1), dtype=complex)
    U[:n, :n] = T
    U[:n, n] = s * svd.left[:, k]
    U[n, :n] = s * svd.right[k, :]
    U[n, n] = -svd.singular_values[k]
    return DilatedUnitary(U, unitary_error(U), svd.defect_rank)


def closest_unitary(U) -> np.ndarray:
    """Unitary polar factor of ``U``, the nearest unitary in Frobenius norm."""
    left, _, right = np.linalg.svd(_as_array(U))
    return left @ right


def require_unitary(U, tol_pct=1e-8):
    U = _as_array(U)
    eps = unitary_error(U)
    # The fidelity metric is second order in small perturbations; also check directly.
    if eps > tol_pct or np.linalg.norm(U @ U.conj().T - np.eye(U.shape[0])) > 1e-8:
        raise NonUnitaryError(f"matrix is not unitary (epsilon = {eps:.3e} %)", eps)
    return U
