"""Brute-force check of the moving-wall propagator in the instantaneous eigenbasis.

Writing ``psi = sum_m c_m(t) phi_m(x; lambda(t))`` turns the Schrodinger equation into

    i dc_m/dt = E_m(lambda) c_m - i v sum_{n != m} <m|d_lambda n> c_n,
    <m|d_lambda n> = (-1)^(m+n) 2 m n / (lambda (m^2 - n^2)).

The dynamical phases ``theta_m(t) = int_0^t E_m = E_m(lambda0) lambda0 t / lambda(t)``
are carried explicitly (interaction picture) and the remaining coupling is
integrated with fixed-step classical RK4. This discretizes time in an
eigenbasis, unlike :mod:`piston_forge.piston`, which integrates in space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DomainError, NormDriftError
from .piston import PistonProtocol, TransitionMatrix

NORM_TOL = 1e-6


@dataclass(frozen=True)
class OracleConfig:
    basis_cutoff: int = 100
    step_count: int = 200_000

    def __post_init__(self):
        if self.step_count < 1000:
            raise DomainError("step_count must be >= 1000")
        if self.basis_cutoff < 1:
            raise DomainError("basis_cutoff must be >= 1")


def derivative_coupling(size, lam=1.0):
    """Matrix ``<m|d_lambda n>`` for ``m, n = 1..size`` at box length ``lam``."""
    m = np.arange(1, size + 1, dtype=float)
    mm, nn = m[:, None], m[None, :]
    diff = mm**2 - nn**2
    np.fill_diagonal(diff, 1.0)
    coupling = (-1.0) ** (mm + nn) * 2.0 * mm * nn / diff
    np.fill_diagonal(coupling, 0.0)
    return coupling / lam


@numba.njit(cache=True, fastmath=True)
def _rk4_interaction(A, w, lam0, v, tau, steps, ar, ai, norm_tol):
    # ar, ai hold Re/Im of interaction-picture amplitudes, shape (columns, basis).
    # Returns the first step at which the norm drifted, or -1.
    N, J = ar.shape
    dt = tau / steps
    kr = np.empty((4, N, J))
    ki = np.empty((4, N, J))
    yr = np.empty((N, J))
    yi = np.empty((N, J))
    qr = np.empty((N, J))
    qi = np.empty((N, J))
    cs = np.empty(J)
    sn = np.empty(J)
    for s in range(steps):
        t0 = s * dt
        for st in range(4):
            if st == 0:
                t = t0
                yr[:] = ar
                yi[:] = ai
            else:
                h = dt if st == 3 else 0.5 * dt
                t = t0 + h
                for c in range(N):
                    for m in range(J):
                        yr[c, m] = ar[c, m] + h * kr[st - 1, c, m]
                        yi[c, m] = ai[c, m] + h * ki[st - 1, c, m]
            lam = lam0 + v * t
            g = -v / lam
            for m in range(J):
                th = w[m] * t / lam
                cs[m] = np.cos(th)
                sn[m] = np.sin(th)
            for c in range(N):
                for m in range(J):
                    qr[c, m] = cs[m] * yr[c, m] + sn[m] * yi[c, m]
                    qi[c, m] = cs[m] * yi[c, m] - sn[m] * yr[c, m]
            for c in range(N):
                for m in range(J):
                    sr = 0.0
                    si = 0.0
                    for n in range(J):
                        sr += A[m, n] * qr[c, n]
                        si += A[m, n] * qi[c, n]
                    kr[st, c, m] = g * (cs[m] * sr - sn[m] * si)
                    ki[st, c, m] = g * (cs[m] * si + sn[m] * sr)
        for c in range(N):
            norm = 0.0
            for m in range(J):
                ar[c, m] += dt / 6.0 * (kr[0, c, m] + 2.0 * kr[1, c, m] + 2.0 * kr[2, c, m] + kr[3, c, m])
                ai[c, m] += dt / 6.0 * (ki[0, c, m] + 2.0 * ki[1, c, m] + 2.0 * ki[2, c, m] + ki[3, c, m])
                norm += ar[c, m] * ar[c, m] + ai[c, m] * ai[c, m]
            if abs(norm - 1.0) > norm_tol:
                return s
    return -1


def evolve_eigenbasis(protocol: PistonProtocol, cfg: OracleConfig = OracleConfig()) -> np.ndarray:
    """Final coefficients ``c[m, i]`` in the eigenbasis at ``lambda_tau``, shape (basis_cutoff, n_levels)."""
    N, J = protocol.n_levels, cfg.basis_cutoff
    if J < N:
        raise DomainError(f"basis_cutoff {J} is smaller than n_levels {N}")
    if protocol.is_identity:
        return np.eye(J, N, dtype=complex)
    m = np.arange(1, J + 1, dtype=float)
    # theta_m(t) = w_m t / lambda(t)
    w = np.pi**2 * m**2 / (2.0 * protocol.lambda0)
    ar = np.zeros((N, J))
    ai = np.zeros((N, J))
    ar[np.arange(N), np.arange(N)] = 1.0
    failed = _rk4_interaction(
        derivative_coupling(J), w, float(protocol.lambda0), float(protocol.v),
        float(protocol.tau), int(cfg.step_count), ar, ai, NORM_TOL,
    )
    if failed >= 0:
        raise NormDriftError(f"norm drifted by more than {NORM_TOL} at step {failed}")
    amplitudes = (ar + 1j * ai).T
    return np.exp(-1j * w * protocol.tau / protocol.lambda_tau)[:, None] * amplitudes


def oracle_transition_matrix(protocol: PistonProtocol, cfg: OracleConfig = OracleConfig()) -> TransitionMatrix:
    """Truncated ``n_levels x n_levels`` transition matrix from the eigenbasis integrator."""
    N = protocol.n_levels
    T = evolve_eigenbasis(protocol, cfg)[:N]
    return TransitionMatrix(T, np.sum(np.abs(T) ** 2, axis=0), protocol)


def align_columns(T, reference):
    """Rephase each column of ``T`` to best match ``reference`` (maximal real overlap)."""
    T = np.asarray(T, dtype=complex)
    overlap = np.sum(np.conj(T) * reference, axis=0)
    phase = np.where(np.abs(overlap) > 0, overlap / np.where(overlap == 0, 1, np.abs(overlap)), 1.0)
    return T * phase[None, :]


def max_deviation(T, reference) -> float:
    """Largest elementwise ``|T - reference|`` after per-column phase alignment."""
    return float(np.max(np.abs(align_columns(T, reference) - reference)))
