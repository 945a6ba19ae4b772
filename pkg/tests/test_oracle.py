import numpy as np
import pytest

from piston_forge.errors import DomainError
from piston_forge.oracle import (
    OracleConfig,
    align_columns,
    derivative_coupling,
    evolve_eigenbasis,
    max_deviation,
    oracle_transition_matrix,
)
from piston_forge.piston import PistonProtocol, propagator_block

SMALL = PistonProtocol(1.0, 2.0, 1.1, j_max=8)


def test_coupling_is_antisymmetric_with_alternating_sign():
    A = derivative_coupling(6, 2.0)
    assert np.allclose(A, -A.T)
    assert np.isclose(A[0, 1], -2 * 1 * 2 / (2.0 * (1 - 4)))
    assert np.isclose(A[0, 2], 2 * 1 * 3 / (2.0 * (1 - 9)))


def test_coupling_matches_numerical_derivative():
    # <m| d/dlam n> by finite differences of the box eigenfunctions
    x = np.linspace(0, 1, 20001)
    lam, h = 1.3, 1e-5

    def phi(n, L):
        xs = x * lam
        return np.where(xs <= L, np.sqrt(2 / L) * np.sin(n * np.pi * xs / L), 0.0)

    for m, n in [(1, 2), (2, 3), (1, 4)]:
        d = (phi(n, lam + h) - phi(n, lam - h)) / (2 * h)
        val = np.trapezoid(phi(m, lam) * d, x) * lam
        assert np.isclose(val, derivative_coupling(4, lam)[m - 1, n - 1], atol=1e-4)


def test_identity():
    c = evolve_eigenbasis(PistonProtocol(1.0, 1.0, 0.0), OracleConfig(10, 1000))
    assert np.allclose(c, np.eye(10, 4))


def test_step_doubling_converged():
    a = evolve_eigenbasis(SMALL, OracleConfig(8, 100_000))
    b = evolve_eigenbasis(SMALL, OracleConfig(8, 200_000))
    assert np.abs(a - b).max() < 1e-8


def test_fourth_order_convergence():
    ref = evolve_eigenbasis(SMALL, OracleConfig(8, 200_000))
    errs = [np.abs(evolve_eigenbasis(SMALL, OracleConfig(8, n)) - ref).max() for n in (2000, 4000)]
    assert 14 < errs[0] / errs[1] < 18


def test_norm_preserved():
    c = evolve_eigenbasis(SMALL, OracleConfig(8, 20_000))
    assert np.allclose(np.sum(np.abs(c) ** 2, axis=0), 1.0, atol=1e-9)


def test_config_validation():
    with pytest.raises(DomainError):
        OracleConfig(10, 10)
    with pytest.raises(DomainError):
        evolve_eigenbasis(SMALL, OracleConfig(2, 1000))


def test_agrees_with_spectral_propagator():
    p = PistonProtocol(1.0, 2.0, 1.1)
    T = oracle_transition_matrix(p, OracleConfig(60, 50_000)).entries
    assert max_deviation(T, propagator_block(p)) < 1e-4


def test_align_columns_removes_column_phases():
    rng = np.random.default_rng(1)
    R = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    phased = R * np.exp(1j * rng.uniform(0, 2 * np.pi, 4))[None, :]
    assert np.allclose(align_columns(phased, R), R)
    assert max_deviation(phased, R) < 1e-12
