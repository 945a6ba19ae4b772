"""One piston stroke taken through the full compile-and-sample chain.

truncated matrix -> single-ancilla dilation -> closest unitary -> Clements mesh
-> reconstructed unitary -> two-boson conditional statistics.

Two sets of conditionals come out of a stroke. ``reference`` uses the
truncated ``n_levels x n_levels`` matrix directly, renormalized over the
resolved manifold (the ideal four-level theory). ``conditionals`` is what the
work statistics are built from: the mesh-reconstructed snapped unitary when
``snap_unitary`` is set, otherwise the raw quasi-unitary dilation with each
conditional renormalized (its resolved-manifold content is then identical to
the reference).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bosons, dilation, mesh, piston
from .bosons import FockDistribution, fock_basis


@dataclass(frozen=True)
class StrokeResult:
    protocol: piston.PistonProtocol
    transition: piston.TransitionMatrix
    dilated: dilation.DilatedUnitary
    program: mesh.MeshProgram
    implemented: np.ndarray
    mesh_error: float
    conditionals: dict
    reference: dict
    snapped_conditionals: dict

    @property
    def unitary_error_pct(self) -> float:
        return self.dilated.unitary_error_pct


def simulate_stroke(protocol: piston.PistonProtocol, snap_unitary=False, photons=2) -> StrokeResult:
    T = piston.truncated_matrix(protocol)
    dil = dilation.dilate_single_ancilla(T)
    target = dilation.closest_unitary(dil.entries)
    program = mesh.decompose(target)
    implemented = mesh.reconstruct(program)
    mesh_error = float(np.linalg.norm(implemented - target))

    inputs = fock_basis(protocol.n_levels, photons)
    padded = [s + (0,) for s in inputs]
    snapped = {s: bosons.output_distribution(implemented, p) for s, p in zip(inputs, padded)}
    if snap_unitary:
        conditionals = snapped
    else:
        conditionals = {s: bosons.output_distribution(dil.entries, p, renormalize=True) for s, p in zip(inputs, padded)}
    reference = {s: bosons.output_distribution(T.entries, s, renormalize=True) for s in inputs}
    return StrokeResult(protocol, T, dil, program, implemented, mesh_error, conditionals, reference, snapped)


def thermal_output(weights: dict, conditionals: dict) -> FockDistribution:
    """Mixture ``sum_n w_n P(out | n)`` over the conditionals' common basis."""
    states = next(iter(conditionals.values())).states
    p = np.zeros(len(states))
    for s, w in weights.items():
        p += w * conditionals[s].probabilities
    return FockDistribution(states, p)


def resolved_part(dist: FockDistribution, levels=4) -> FockDistribution:
    """Restrict to states without ancilla occupation and renormalize."""
    keep = [(s[:levels], p) for s, p in zip(dist.states, dist.probabilities) if not any(s[levels:])]
    states = tuple(s for s, _ in keep)
    p = np.array([q for _, q in keep])
    return FockDistribution(states, p / p.sum())
