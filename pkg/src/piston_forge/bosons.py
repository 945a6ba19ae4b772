"""Fock-state statistics of non-interacting bosons through a linear network.

Canonical mode order is ascending single-particle energy: level 1, level 2,
..., with the ancilla (when present) as the last mode. A Fock state is a
tuple of occupations in that order. :func:`display_label` renders the
ancilla-first reversed label used in figures (``|n_a n_4 n_3 n_2 n_1>``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, prod

import numpy as np

from .errors import DomainError, NormalizationError, PhotonNumberError

MAX_PERMANENT_DIM = 12
NORM_TOL = 1e-9


def permanent(A) -> complex:
    """Permanent by Ryser's formula, visiting column subsets in Gray-code order."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"permanent needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n > MAX_PERMANENT_DIM:
        raise DomainError(f"dimension {n} above the supported maximum {MAX_PERMANENT_DIM}")
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    gray = 0
    for k in range(1, 2**n):
        flip = (k & -k).bit_length() - 1
        gray ^= 1 << flip
        if gray >> flip & 1:
            row_sums += A[:, flip]
        else:
            row_sums -= A[:, flip]
        sign = -1 if (n - bin(gray).count("1")) % 2 else 1
        total += sign * np.prod(row_sums)
    return complex(total)


def permanent_naive(A) -> complex:
    """Sum over all permutations; reference path for small matrices."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    return complex(sum(np.prod(A[np.arange(n), list(p)]) for p in itertools.permutations(range(n)))) if n else 1.0 + 0j


def state_energy(state, lam=1.0) -> float:
    """Total reduced energy ``sum_k n_k k^2 / lam^2`` with modes numbered from 1."""
    return sum(n * (k + 1) ** 2 for k, n in enumerate(state)) / lam**2


def fock_basis(modes, photons) -> list:
    """All occupation tuples, sorted by total energy then lexicographically."""
    if modes < 1 or photons < 0:
        raise DomainError("need modes >= 1 and photons >= 0")
    states = []
    for combo in itertools.combinations_with_replacement(range(modes), photons):
        occ = [0] * modes
        for m in combo:
            occ[m] += 1
        states.append(tuple(occ))
    states.sort(key=lambda s: (state_energy(s), s))
    assert len(states) == comb(modes + photons - 1, photons)
    return states


def display_label(state) -> str:
    """Label in reversed order, e.g. ``(2, 0, 0, 0, 0) -> '|00002>'``."""
    return "|" + "".join(str(n) for n in reversed(state)) + ">"


def _modes_of(state):
    return [m for m, n in enumerate(state) for _ in range(n)]


def transfer_amplitude(U, inp, out) -> complex:
    """Unnormalized permanent amplitude between two Fock states."""
    U = np.asarray(U)
    if sum(inp) != sum(out):
        raise PhotonNumberError(f"input has {sum(inp)} photons, output has {sum(out)}")
    if len(inp) != U.shape[1] or len(out) != U.shape[0]:
        raise DomainError(f"states of length {len(inp)}, {len(out)} do not match a {U.shape} matrix")
    return permanent(U[np.ix_(_modes_of(out), _modes_of(inp))])


def multi_photon_transfer(U, inp, out) -> float:
    """Probability ``|perm(U[out, in])|^2 / (prod n_i! prod m_j!)``."""
    amp = transfer_amplitude(U, inp, out)
    norm = prod(factorial(n) for n in inp) * prod(factorial(n) for n in out)
    return abs(amp) ** 2 / norm


def distinguishable_transfer(U, inp, out) -> float:
    """Same transition for distinguishable particles: permanent of ``|U|^2`` entries."""
    if sum(inp) != sum(out):
        raise PhotonNumberError(f"input has {sum(inp)} photons, output has {sum(out)}")
    P = np.abs(np.asarray(U)) ** 2
    sub = P[np.ix_(_modes_of(out), _modes_of(inp))]
    return permanent(sub).real / prod(factorial(n) for n in out)


@dataclass(frozen=True)
class FockDistribution:
    """Probabilities over a fixed ordered Fock basis."""

    states: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(self.states),):
            raise DomainError("one probability per state required")
        if np.any(p < -NORM_TOL):
            raise NormalizationError("negative probability")
        if len({sum(s) for s in self.states}) > 1:
            raise DomainError("states with different photon numbers")
        p.setflags(write=False)
        object.__setattr__(self, "states", tuple(tuple(s) for s in self.states))
        object.__setattr__(self, "probabilities", p)

    @property
    def photon_number(self) -> int:
        return sum(self.states[0]) if self.states else 0

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def as_dict(self) -> dict:
        return dict(zip(self.states, self.probabilities.tolist()))

    def __getitem__(self, state) -> float:
        return float(self.probabilities[self.states.index(tuple(state))])


def output_distribution(U, inp, renormalize=False) -> FockDistribution:
    """Output probabilities over ``fock_basis(M, n)`` for a Fock input."""
    U = np.asarray(U, dtype=complex)
    basis = fock_basis(U.shape[0], sum(inp))
    p = np.array([multi_photon_transfer(U, inp, out) for out in basis])
    total = p.sum()
    if abs(total - 1.0) > 1e-6:
        if not renormalize:
            raise NormalizationError(f"probabilities sum to {total:.9f}; U is not unitary")
    if renormalize and total > 0:
        p = p / total
    return FockDistribution(tuple(basis), p)


def conditional_distributions(U, inputs, renormalize=False) -> dict:
    """Output distribution for each input Fock state."""
    return {tuple(s): output_distribution(U, s, renormalize) for s in inputs}
