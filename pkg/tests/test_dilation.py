import numpy as np
import pytest
from scipy.stats import unitary_group

from piston_forge.dilation import (
    closest_unitary,
    dilate_single_ancilla,
    require_unitary,
    singular_defect,
    unitary_error,
)
from piston_forge.errors import DomainError, NonUnitaryError, SpectralError
from piston_forge.piston import PistonProtocol, truncated_matrix


def _rank_one_defect(n, d, seed):
    U = unitary_group.rvs(n, random_state=seed)
    V = unitary_group.rvs(n, random_state=seed + 100)
    s = np.ones(n)
    s[seed % n] = d
    return U @ np.diag(s) @ V


@pytest.mark.parametrize("seed", range(5))
def test_rank_one_defect_dilates_exactly(seed):
    T = _rank_one_defect(4, 0.3 + 0.1 * seed, seed)
    D = dilate_single_ancilla(T)
    assert D.defect_rank == 1
    assert D.unitary_error_pct <= 1e-7
    assert np.allclose(D.entries @ D.entries.conj().T, np.eye(5), atol=1e-12)
    assert np.allclose(D.block, T)
    assert D.ancilla_index == 4


def test_unitary_input_gives_decoupled_ancilla():
    U = unitary_group.rvs(4, random_state=7)
    D = dilate_single_ancilla(U)
    assert D.defect_rank == 0
    assert np.isclose(abs(D.entries[4, 4]), 1.0)
    assert D.unitary_error_pct < 1e-10


def test_closed_form_epsilon_for_diagonal():
    # diag(0.6, 1, 1, 1, 1): sqrt of the eigenvalues sums to 4.6, so F = 0.92
    assert np.isclose(unitary_error(np.diag([0.6, 1, 1, 1, 1])), 8.0, atol=1e-6)


def test_rank_two_defect_leaves_residual():
    T = np.diag([0.5, 0.7, 1.0, 1.0])
    D = dilate_single_ancilla(T)
    assert D.defect_rank == 2
    # only the 0.5 direction is absorbed; 0.7 remains
    expected = 100 * (1 - (4 + 0.7) / 5)
    assert np.isclose(D.unitary_error_pct, expected, atol=1e-9)


def test_spectral_error_on_expansion():
    with pytest.raises(SpectralError):
        singular_defect(np.diag([1.2, 1.0]))


def test_closest_unitary_snaps():
    T = np.diag([0.5, 0.7, 1.0, 1.0])
    D = dilate_single_ancilla(T)
    U = closest_unitary(D.entries)
    assert np.allclose(U @ U.conj().T, np.eye(5), atol=1e-12)
    assert unitary_error(U) < 1e-10


def test_require_unitary():
    U = unitary_group.rvs(3, random_state=2)
    assert require_unitary(U) is not None
    with pytest.raises(NonUnitaryError) as exc:
        require_unitary(np.diag([0.6, 1, 1, 1, 1]))
    assert np.isclose(exc.value.epsilon_pct, 8.0)


def test_domain_checks():
    with pytest.raises(DomainError):
        dilate_single_ancilla(np.ones((2, 3)))
    with pytest.raises(DomainError):
        dilate_single_ancilla(np.array([[np.nan, 0], [0, 1]]))


def test_long_stroke_has_defect():
    assert singular_defect(truncated_matrix(PistonProtocol(1.0, 3.1, 1.1))).defect_rank >= 1


def test_epsilon_grows_with_stroke_length():
    eps = [dilate_single_ancilla(truncated_matrix(PistonProtocol(1.0, lt, 11.0))).unitary_error_pct
           for lt in (1.05, 1.2, 1.5, 2.0, 2.5, 3.0)]
    assert np.all(np.diff(eps) >= 0)
