"""Single-particle propagator of a box with a linearly moving wall.

Natural units hbar = m = 1 throughout. A particle starting in level ``i`` of a
box of length ``lambda0`` is expanded in the exact moving-wall solutions

    Phi_j(x, t) = exp[(i / lambda(t)) (v x^2 / 2 - E_j(lambda0) lambda0 t)] phi_j(x; lambda(t))

and projected onto the eigenfunctions of the final box. After the change of
variable ``y = x / lambda`` both the initial overlap and the final projection
reduce to the same kernel

    K(a)_{jk} = 2 int_0^1 exp(i a y^2 / 2) sin(j pi y) sin(k pi y) dy,

with ``a = -v lambda0`` for the overlaps ``c_ji`` and ``a = v lambda_tau`` for
the projections, so ``T = K(v lambda_tau) diag(exp(-i theta_j)) K(-v lambda0)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import CutoffWarning, DomainError, QuadratureError

#: Energy unit of the thermodynamic quantities: E_reduced = E / (pi^2 / 2).
REDUCED_ENERGY_UNIT = np.pi**2 / 2

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-12
QUAD_LIMIT = 1000
#: Largest admissible contribution of the j = jMax term to any amplitude.
CUTOFF_TERM_TOL = 1e-8
#: Largest admissible overlap weight sum_{j > jMax} |c_ji|^2 left outside the solution set.
CUTOFF_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class PistonProtocol:
    """Linear wall drive ``lambda(t) = lambda0 + v t`` from ``lambda0`` to ``lambda_tau``.

    The identity protocol is written with ``lambda_tau == lambda0``; any ``v``
    (including zero) is then accepted and ``tau == 0``.
    """

    lambda0: float
    lambda_tau: float
    v: float
    n_levels: int = 4
    j_max: int = 50

    def __post_init__(self):
        if not (self.lambda0 > 0 and self.lambda_tau > 0):
            raise DomainError(f"box lengths must be positive, got {self.lambda0}, {self.lambda_tau}")
        if not np.isfinite(self.v):
            raise DomainError("wall velocity must be finite")
        stroke = self.lambda_tau - self.lambda0
        if stroke != 0:
            if self.v == 0:
                raise DomainError("v = 0 with lambda_tau != lambda0 needs infinite time")
            if np.sign(self.v) != np.sign(stroke):
                raise DomainError(
                    f"velocity {self.v} points away from lambda_tau={self.lambda_tau} "
                    f"(lambda0={self.lambda0})"
                )
        if self.n_levels < 1:
            raise DomainError("n_levels must be >= 1")
        if self.j_max < self.n_levels:
            raise DomainError("j_max must be >= n_levels")

    @property
    def tau(self) -> float:
        if self.is_identity:
            return 0.0
        return (self.lambda_tau - self.lambda0) / self.v

    @property
    def is_identity(self) -> bool:
        return self.lambda_tau == self.lambda0

    def length_at(self, t):
        return self.lambda0 + self.v * t

    def reversed(self) -> "PistonProtocol":
        """The time-reversed stroke, back from ``lambda_tau`` to ``lambda0``."""
        return PistonProtocol(self.lambda_tau, self.lambda0, -self.v, self.n_levels, self.j_max)


@dataclass(frozen=True)
class TransitionMatrix:
    """Truncated amplitudes ``entries[f, i] = <f^{lambda_tau}| U(tau) |i^{lambda0}>`` (0-based)."""

    entries: np.ndarray
    column_completeness: np.ndarray
    protocol: PistonProtocol = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _check_level(n, name="n"):
    if int(n) != n or n < 1:
        raise DomainError(f"{name} must be an integer >= 1, got {n}")


def eigenenergy(n, lam):
    """Energy ``pi^2 n^2 / (2 lam^2)`` of level ``n`` in a box of length ``lam``."""
    _check_level(n)
    if not lam > 0:
        raise DomainError(f"box length must be positive, got {lam}")
    return np.pi**2 * n**2 / (2.0 * lam**2)


def reduced_energy(n, lam):
    """Energy of level ``n`` in units of ``pi^2 / 2``, i.e. ``n^2 / lam^2``."""
    _check_level(n)
    if not lam > 0:
        raise DomainError(f"box length must be positive, got {lam}")
    return n**2 / lam**2


def adiabaticity_parameter(n, m, v, lam):
    """Dimensionless ratio ``2 m n |v| lam / (m^2 - n^2)^2`` for the ``n -> m`` transition."""
    _check_level(n, "n")
    _check_level(m, "m")
    if m == n:
        raise DomainError("adiabaticity parameter needs m != n")
    if not lam > 0:
        raise DomainError(f"box length must be positive, got {lam}")
    return 2.0 * m * n * abs(v) * lam / (m**2 - n**2) ** 2


def _quad(func, a, b, abs_tol=QUAD_ABS_TOL, rel_tol=QUAD_REL_TOL):
    out = integrate.quad(func, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=QUAD_LIMIT, full_output=1)
    if len(out) > 3:
        value, err = out[0], out[1]
        if err > abs_tol:
            raise QuadratureError(f"quadrature did not converge (error estimate {err:.2e}): {out[3]}")
    return out[0]


def _complex_quad(phase, weight, a, b, abs_tol=QUAD_ABS_TOL):
    """``int_a^b exp(i phase(y)) weight(y) dy`` as two real adaptive integrals."""
    re = _quad(lambda y: np.cos(phase(y)) * weight(y), a, b, abs_tol)
    im = _quad(lambda y: np.sin(phase(y)) * weight(y), a, b, abs_tol)
    return complex(re, im)


@lru_cache(maxsize=256)
def _cosine_moments(a: float, n_max: int) -> np.ndarray:
    # int_0^1 exp(i a y^2 / 2) cos(n pi y) dy for n = 0..n_max.  The kernel entries
    # are differences of two moments, so moments carry half the kernel tolerance.
    moments = np.array(
        [
            _complex_quad(lambda y: 0.5 * a * y * y, lambda y, n=n: np.cos(n * np.pi * y), 0.0, 1.0,
                          abs_tol=QUAD_ABS_TOL / 4)
            for n in range(n_max + 1)
        ]
    )
    moments.setflags(write=False)
    return moments


def phase_kernel(a, size):
    """Matrix ``K(a)_{jk} = 2 int_0^1 exp(i a y^2/2) sin(j pi y) sin(k pi y) dy`` for ``j, k = 1..size``.

    For ``size -> inf`` this is the unitary operator of multiplication by the
    chirp ``exp(i a y^2 / 2)`` written in the sine basis of the unit box.
    """
    moments = _cosine_moments(float(a), 2 * int(size))
    j = np.arange(1, size + 1)
    return moments[np.abs(j[:, None] - j[None, :])] - moments[j[:, None] + j[None, :]]


def overlap_coefficient(j, i, protocol: PistonProtocol) -> complex:
    """Overlap ``c_ji`` of initial level ``i`` with solution ``Phi_j`` at ``t = 0``.

    Evaluated directly on ``[0, lambda0]`` by adaptive quadrature (independent of
    :func:`phase_kernel`, which shares the change of variables but not the code path).
    """
    _check_level(j, "j")
    _check_level(i, "i")
    lam0, v = protocol.lambda0, protocol.v
    k_j, k_i = j * np.pi / lam0, i * np.pi / lam0
    value = _complex_quad(
        lambda x: -v * x * x / (2.0 * lam0),
        lambda x: np.sin(k_j * x) * np.sin(k_i * x),
        0.0,
        lam0,
    )
    return 2.0 / lam0 * value


def _dynamical_phases(protocol: PistonProtocol):
    j = np.arange(1, protocol.j_max + 1)
    # E_j(lambda0) lambda0 tau / lambda_tau
    return np.pi**2 * j**2 * protocol.tau / (2.0 * protocol.lambda0 * protocol.lambda_tau)


def _propagator_factors(protocol: PistonProtocol):
    J = protocol.j_max
    overlaps = phase_kernel(-protocol.v * protocol.lambda0, J)
    projections = phase_kernel(protocol.v * protocol.lambda_tau, J)
    phases = np.exp(-1j * _dynamical_phases(protocol))
    return projections, phases, overlaps


def cutoff_tail(protocol: PistonProtocol) -> np.ndarray:
    """Estimate of ``sum_{j > jMax} |c_ji|^2`` for each retained input level ``i``."""
    if protocol.is_identity:
        return np.zeros(protocol.n_levels)
    overlaps = phase_kernel(-protocol.v * protocol.lambda0, protocol.j_max)[:, : protocol.n_levels]
    return 1.0 - np.sum(np.abs(overlaps) ** 2, axis=0)


def propagator_block(protocol: PistonProtocol, n_rows=None) -> np.ndarray:
    """Amplitudes ``T[f, i]`` for ``f < n_rows`` (default ``n_levels``) and ``i < n_levels``."""
    N = protocol.n_levels
    n_rows = N if n_rows is None else int(n_rows)
    if not 1 <= n_rows <= protocol.j_max:
        raise DomainError(f"n_rows must lie in [1, j_max], got {n_rows}")
    if protocol.is_identity:
        return np.eye(n_rows, N, dtype=complex)
    projections, phases, overlaps = _propagator_factors(protocol)
    P = projections[:n_rows]
    C = overlaps[:, :N]
    last = np.abs(P[:, -1, None] * phases[-1] * C[-1, None, :])
    tail = 1.0 - np.sum(np.abs(C) ** 2, axis=0)
    if last.max() > CUTOFF_TERM_TOL or tail.max() > CUTOFF_TAIL_TOL:
        warnings.warn(
            f"j_max = {protocol.j_max} leaves overlap weight {tail.max():.1e} outside the solution set "
            f"(last term {last.max():.1e}); consider a larger j_max",
            CutoffWarning,
            stacklevel=2,
        )
    return P @ (phases[:, None] * C)


def transition_amplitude(f, i, protocol: PistonProtocol) -> complex:
    """Single amplitude ``<f^{lambda_tau}| U(tau) |i^{lambda0}>`` with 1-based levels."""
    _check_level(f, "f")
    _check_level(i, "i")
    if f > protocol.n_levels or i > protocol.n_levels:
        raise DomainError(f"levels must be <= n_levels={protocol.n_levels}")
    return complex(propagator_block(protocol)[f - 1, i - 1])


def truncated_matrix(protocol: PistonProtocol) -> TransitionMatrix:
    """The ``n_levels x n_levels`` transition matrix with per-column retained probability."""
    T = propagator_block(protocol)
    completeness = np.sum(np.abs(T) ** 2, axis=0)
    T.setflags(write=False)
    completeness.setflags(write=False)
    return TransitionMatrix(T, completeness, protocol)


def full_row_completeness(protocol: PistonProtocol) -> np.ndarray:
    """``sum_{f <= jMax} |T_fi|^2`` per input level: probability kept below the cutoff."""
    T = propagator_block(protocol, n_rows=protocol.j_max)
    return np.sum(np.abs(T) ** 2, axis=0)
