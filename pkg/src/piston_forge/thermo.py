"""Thermal preparation, two-point-measurement work statistics and cycles.

All energies and temperatures here are reduced: single-particle level ``k`` in
a box of length ``lam`` has energy ``k^2 / lam^2`` (units of pi^2/2, k_B = 1).
Modes beyond ``levels`` in a conditional distribution are ancilla modes; they
carry no defined work and their probability is booked as leakage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .bosons import FockDistribution, fock_basis, state_energy
from .errors import BasisMismatchError, CoverageError, DomainError
from .piston import PistonProtocol

WORK_TOL = 1e-6
COVERAGE_LEVELS = 12


@dataclass(frozen=True)
class GibbsWeights:
    temperature: float
    lam: float
    states: tuple
    weights: np.ndarray
    coverage: float

    def as_dict(self) -> dict:
        return dict(zip(self.states, self.weights.tolist()))


def _energies(states, lam):
    return np.array([state_energy(s, lam) for s in states])


def log_partition(temperature, lam, levels=4, photons=2) -> float:
    """``ln Z`` over the ``photons``-boson Fock basis of the lowest ``levels`` levels."""
    if not temperature > 0 or not lam > 0:
        raise DomainError("temperature and length must be positive")
    return float(logsumexp(-_energies(fock_basis(levels, photons), lam) / temperature))


def gibbs_weights(temperature, lam, levels=4, photons=2) -> GibbsWeights:
    """Boltzmann weights on the truncated basis and their share of a 12-level ensemble."""
    if not temperature > 0 or not lam > 0:
        raise DomainError("temperature and length must be positive")
    states = tuple(fock_basis(levels, photons))
    e = _energies(states, lam)
    w = np.exp(-(e - e.min()) / temperature)
    w /= w.sum()
    coverage = np.exp(
        log_partition(temperature, lam, levels, photons)
        - log_partition(temperature, lam, max(levels, COVERAGE_LEVELS), photons)
    )
    w.setflags(write=False)
    return GibbsWeights(float(temperature), float(lam), states, w, float(coverage))


def free_energy_theory(temperature, lambda0, lambda_tau, levels=4, photons=2) -> float:
    """``-T ln[Z(lambda_tau) / Z(lambda0)]`` over the resolved two-boson basis."""
    return -temperature * (
        log_partition(temperature, lambda_tau, levels, photons)
        - log_partition(temperature, lambda0, levels, photons)
    )


def jarzynski_estimator(works, probabilities, temperature) -> float:
    """``-T ln sum_W p(W) exp(-W/T)``; probabilities are used as given."""
    works = np.asarray(works, dtype=float)
    p = np.asarray(probabilities, dtype=float)
    mask = p > 0
    return float(-temperature * logsumexp(-works[mask] / temperature, b=p[mask]))


def group_work(works, probabilities, tol=WORK_TOL):
    """Merge work values closer than ``tol``; returns sorted ``(works, probabilities)``.

    Chained values are merged into one group, placed at the probability-weighted mean.
    """
    works = np.asarray(works, dtype=float)
    p = np.asarray(probabilities, dtype=float)
    if works.size == 0:
        return works, p
    order = np.argsort(works, kind="stable")
    works, p = works[order], p[order]
    breaks = np.flatnonzero(np.diff(works) > tol) + 1
    out_w, out_p = [], []
    for idx in np.split(np.arange(works.size), breaks):
        mass = p[idx].sum()
        out_w.append(np.dot(works[idx], p[idx]) / mass if mass > 0 else works[idx].mean())
        out_p.append(mass)
    return np.array(out_w), np.array(out_p)


@dataclass(frozen=True)
class WorkDistribution:
    """Grouped work values with leakage; scalars use the distribution renormalized over the resolved manifold."""

    works: np.ndarray
    probabilities: np.ndarray
    leakage_weight: float
    temperature: float
    df_th: float
    resolved_output: FockDistribution

    @property
    def normalized(self) -> np.ndarray:
        return self.probabilities / self.probabilities.sum()

    @property
    def mean_work(self) -> float:
        return float(np.dot(self.works, self.normalized))

    @property
    def df_exp(self) -> float:
        return jarzynski_estimator(self.works, self.normalized, self.temperature)

    @property
    def w_diss(self) -> float:
        return self.mean_work - self.df_th

    @property
    def entropy_production(self) -> float:
        return self.w_diss / self.temperature

    @property
    def variance(self) -> float:
        return float(np.dot((self.works - self.mean_work) ** 2, self.normalized))

    def positive_work_probability(self) -> float:
        return float(self.normalized[self.works > WORK_TOL].sum())


def work_from_weights(input_weights, conditionals, lambda0, lambda_tau, temperature, levels=4) -> WorkDistribution:
    """Two-point-measurement work distribution for arbitrary input populations.

    ``input_weights`` maps resolved Fock states to probabilities; every state with
    nonzero weight needs an entry in ``conditionals``.
    """
    works, probs = [], []
    leak = 0.0
    photons = sum(next(iter(input_weights))) if input_weights else 2
    resolved = fock_basis(levels, photons)
    out_mass = dict.fromkeys(resolved, 0.0)
    for state, w in input_weights.items():
        state = tuple(state)
        if w == 0:
            continue
        if state not in conditionals:
            raise CoverageError(f"no conditional distribution for input {state}")
        if any(state[levels:]):
            raise DomainError(f"input {state} occupies an ancilla mode")
        e_in = state_energy(state[:levels], lambda0)
        for out, p in zip(conditionals[state].states, conditionals[state].probabilities):
            if p <= 0:
                continue
            if any(out[levels:]):
                leak += w * p
                continue
            key = out[:levels]
            out_mass[key] += w * p
            works.append(state_energy(key, lambda_tau) - e_in)
            probs.append(w * p)
    works, probs = group_work(works, probs)
    total = sum(out_mass.values())
    resolved_output = FockDistribution(tuple(resolved), np.array([out_mass[s] / total for s in resolved]))
    df_th = free_energy_theory(temperature, lambda0, lambda_tau, levels)
    return WorkDistribution(works, probs, float(leak), float(temperature), df_th, resolved_output)


def work_distribution(protocol: PistonProtocol, temperature, conditionals, levels=4) -> WorkDistribution:
    """Thermal work distribution: Gibbs weights at ``lambda0`` combined with conditionals."""
    gibbs = gibbs_weights(temperature, protocol.lambda0, levels)
    missing = [s for s in gibbs.states if s not in conditionals]
    if missing:
        raise CoverageError(f"missing conditionals for inputs {missing}")
    return work_from_weights(gibbs.as_dict(), conditionals, protocol.lambda0, protocol.lambda_tau, temperature, levels)


def bhattacharyya(p: FockDistribution, q: FockDistribution) -> float:
    """Overlap ``sum sqrt(p q)`` of two distributions on the same basis."""
    if tuple(p.states) != tuple(q.states):
        raise BasisMismatchError("distributions are defined on different bases")
    return float(np.sum(np.sqrt(np.clip(p.probabilities, 0, None) * np.clip(q.probabilities, 0, None))))


@dataclass(frozen=True)
class CycleResult:
    expansion: WorkDistribution
    compression: WorkDistribution
    initial: FockDistribution
    final: FockDistribution
    use_estimator: bool = False

    @property
    def w_diss(self) -> float:
        """Dissipated work of the closed cycle (free energies per stroke from theory by default)."""
        if self.use_estimator:
            return (self.expansion.mean_work - self.expansion.df_exp) + (
                self.compression.mean_work - self.compression.df_exp
            )
        return self.expansion.w_diss + self.compression.w_diss

    @property
    def overlap(self) -> float:
        return bhattacharyya(self.initial, self.final)


def run_cycle(expansion: PistonProtocol, compression: PistonProtocol, temperature,
              expansion_conditionals=None, compression_conditionals=None, levels=4,
              use_estimator=False, snap_unitary=False) -> CycleResult:
    """Expansion from the Gibbs state, then compression seeded by the measured populations.

    The state between strokes is the projectively measured Fock population
    (ancilla mass removed and renormalized); no thermal reset. Conditionals
    not supplied are simulated with :func:`piston_forge.pipeline.simulate_stroke`.
    """
    if expansion_conditionals is None or compression_conditionals is None:
        from .pipeline import simulate_stroke

        if expansion_conditionals is None:
            expansion_conditionals = simulate_stroke(expansion, snap_unitary).conditionals
        if compression_conditionals is None:
            compression_conditionals = simulate_stroke(compression, snap_unitary).conditionals
    if not (np.isclose(compression.lambda0, expansion.lambda_tau) and np.isclose(compression.lambda_tau, expansion.lambda0)):
        raise DomainError("compression must reverse the expansion endpoints")
    gibbs = gibbs_weights(temperature, expansion.lambda0, levels)
    exp_work = work_distribution(expansion, temperature, expansion_conditionals, levels)
    mid = exp_work.resolved_output.as_dict()
    comp_work = work_from_weights(mid, compression_conditionals, compression.lambda0,
                                  compression.lambda_tau, temperature, levels)
    initial = FockDistribution(gibbs.states, gibbs.weights)
    return CycleResult(exp_work, comp_work, initial, comp_work.resolved_output, use_estimator)
