"""Rectangular (Clements) MZI meshes: compilation, reconstruction and embedding.

MZI convention, acting on adjacent modes ``(k, k+1)``::

    U(theta, phi) = exp(i (theta/2 + pi/2)) [[e^{i phi} sin(theta/2),  cos(theta/2)],
                                            [e^{i phi} cos(theta/2), -sin(theta/2)]]

``theta = pi`` is the bar state, ``theta = 0`` the cross state; with
``theta = phi = pi`` the element is exactly the 2x2 identity, which is used
for passive routing around an embedded submesh.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dilation import require_unitary
from .errors import DomainError, GeometryError

TWO_PI = 2.0 * np.pi
_ZERO = 1e-14


def wrap_phase(x) -> float:
    r = float(np.mod(x, TWO_PI))
    return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class MziSetting:
    layer: int
    top_mode: int
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_phase(self.theta))
        object.__setattr__(self, "phi", wrap_phase(self.phi))


@dataclass(frozen=True)
class MeshProgram:
    """MZIs sorted by ``(layer, top_mode)`` followed by a diagonal output phase screen."""

    modes: int
    settings: tuple = ()
    output_phases: np.ndarray = field(default=None)

    def __post_init__(self):
        phases = np.zeros(self.modes) if self.output_phases is None else np.asarray(self.output_phases, float)
        if phases.shape != (self.modes,):
            raise DomainError(f"need {self.modes} output phases, got shape {phases.shape}")
        phases = np.array([wrap_phase(p) for p in phases])
        phases.setflags(write=False)
        object.__setattr__(self, "output_phases", phases)
        settings = tuple(sorted(self.settings, key=lambda s: (s.layer, s.top_mode)))
        for s in settings:
            if not 0 <= s.top_mode < self.modes - 1:
                raise DomainError(f"MZI on modes ({s.top_mode}, {s.top_mode + 1}) outside a {self.modes}-mode mesh")
        object.__setattr__(self, "settings", settings)

    @property
    def n_layers(self) -> int:
        return 1 + max((s.layer for s in self.settings), default=-1)


def mzi_transfer(theta, phi) -> np.ndarray:
    """2x2 transfer matrix of one MZI."""
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    e = np.exp(1j * phi)
    return np.exp(1j * (theta / 2 + np.pi / 2)) * np.array([[e * s, c], [e * c, -s]])


def _embedded(mzi, k, modes):
    T = np.eye(modes, dtype=complex)
    T[k : k + 2, k : k + 2] = mzi
    return T


def _null_from_right(xk, xk1):
    # (x @ U(theta, phi)^dagger)[0] = 0  <=>  e^{-i phi} sin(theta/2) xk + cos(theta/2) xk1 = 0
    if abs(xk) < _ZERO:
        return np.pi, np.pi
    theta = 2.0 * np.arctan2(abs(xk1), abs(xk))
    phi = 0.0 if abs(xk1) < _ZERO else np.angle(-xk / xk1)
    return theta, phi


def _null_from_left(yk, yk1):
    # (U(theta, phi) @ y)[1] = 0  <=>  e^{i phi} cos(theta/2) yk - sin(theta/2) yk1 = 0
    if abs(yk1) < _ZERO:
        return np.pi, np.pi
    theta = 2.0 * np.arctan2(abs(yk), abs(yk1))
    phi = 0.0 if abs(yk) < _ZERO else np.angle(yk1 / yk)
    return theta, phi


def _schedule(ops, modes):
    """Place ``(k, theta, phi)`` ops, in application order, into rectangular layers."""
    depth = np.zeros(modes, dtype=int)
    settings = []
    for k, theta, phi in ops:
        layer = max(depth[k], depth[k + 1])
        if (layer + k) % 2:
            layer += 1
        depth[k] = depth[k + 1] = layer + 1
        settings.append(MziSetting(layer, k, theta, phi))
    return settings


def decompose(target) -> MeshProgram:
    """Compile a unitary into ``M(M-1)/2`` MZIs plus output phases (Clements nulling order)."""
    U = require_unitary(target).copy()
    M = U.shape[0]
    right, left = [], []
    for i in range(1, M):
        if i % 2:
            for j in range(i):
                row, k = M - 1 - j, i - 1 - j
                theta, phi = _null_from_right(U[row, k], U[row, k + 1])
                U = U @ _embedded(mzi_transfer(theta, phi), k, M).conj().T
                right.append((k, theta, phi))
        else:
            for j in range(1, i + 1):
                row, col = M + j - i - 1, j - 1
                k = row - 1
                theta, phi = _null_from_left(U[k, col], U[row, col])
                U = _embedded(mzi_transfer(theta, phi), k, M) @ U
                left.append((k, theta, phi))

    # target = L_1^+ ... L_p^+ D R_q ... R_1. Push every L^+ through the diagonal:
    # U(th, ph)^+ diag(d1, d2) = e^{-i(th + pi)} d2 diag(e^{-i ph}, 1) U(th, arg(d1/d2)).
    d = np.diag(U).copy()
    moved = []
    for k, theta, phi in reversed(left):
        d1, d2 = d[k], d[k + 1]
        moved.append((k, theta, np.angle(d1 / d2)))
        scale = np.exp(-1j * (theta + np.pi)) * d2
        d[k], d[k + 1] = scale * np.exp(-1j * phi), scale
    return MeshProgram(M, tuple(_schedule(right + moved, M)), np.angle(d))


def reconstruct(program: MeshProgram) -> np.ndarray:
    """Unitary realized by the program: MZIs in layer order, then the phase screen."""
    M = program.modes
    U = np.eye(M, dtype=complex)
    for s in program.settings:
        k = s.top_mode
        U[k : k + 2, :] = mzi_transfer(s.theta, s.phi) @ U[k : k + 2, :]
    return np.exp(1j * program.output_phases)[:, None] * U


def embed_submesh(program: MeshProgram, chip_modes=12, offset=0) -> MeshProgram:
    """Place ``program`` on modes ``offset .. offset + modes - 1`` of a full rectangular mesh.

    Every other MZI of the ``chip_modes`` mesh is set to the identity bar state
    (theta = phi = pi), so the complement is routed straight through.
    """
    m = program.modes
    if offset < 0 or offset + m > chip_modes:
        raise GeometryError(f"{m}-mode block at offset {offset} does not fit {chip_modes} modes")
    parities = {(s.layer + s.top_mode) % 2 for s in program.settings}
    if len(parities) > 1:
        raise GeometryError("submesh is not in rectangular layout")
    shift = (parities.pop() + offset) % 2 if parities else 0
    placed = {}
    for s in program.settings:
        slot = (s.layer + shift, s.top_mode + offset)
        if slot[0] >= chip_modes:
            raise GeometryError(f"submesh needs layer {slot[0]} on a {chip_modes}-layer mesh")
        placed[slot] = MziSetting(slot[0], slot[1], s.theta, s.phi)
    settings = []
    for layer in range(chip_modes):
        for k in range(layer % 2, chip_modes - 1, 2):
            settings.append(placed.pop((layer, k), None) or MziSetting(layer, k, np.pi, np.pi))
    phases = np.zeros(chip_modes)
    phases[offset : offset + m] = program.output_phases
    return MeshProgram(chip_modes, tuple(settings), phases)


def write_phase_table(program: MeshProgram, dest) -> None:
    """Write the MZI phases as CSV, followed by a block of output phases.

    ``dest`` is a path or a text file object.
    """
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_phase_table(program, fh)
        return
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(["layer", "topMode", "theta_rad", "phi_rad"])
    for s in program.settings:
        w.writerow([s.layer, s.top_mode, repr(s.theta), repr(s.phi)])
    w.writerow([])
    w.writerow(["mode", "output_phase_rad"])
    for mode, phase in enumerate(program.output_phases):
        w.writerow([mode, repr(float(phase))])


def read_phase_table(src) -> MeshProgram:
    if isinstance(src, (str, Path)):
        with open(src, newline="") as fh:
            return read_phase_table(fh)
    text = src.read()
    mzi_block, phase_block = text.split("\n\n", 1)
    settings = [
        MziSetting(int(r["layer"]), int(r["topMode"]), float(r["theta_rad"]), float(r["phi_rad"]))
        for r in csv.DictReader(io.StringIO(mzi_block))
    ]
    phases = [float(r["output_phase_rad"]) for r in csv.DictReader(io.StringIO(phase_block))]
    return MeshProgram(len(phases), tuple(settings), np.array(phases))
