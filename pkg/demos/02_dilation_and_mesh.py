# Turn the leaky 4x4 block into a 5-mode unitary and compile it onto MZIs.
import numpy as np

from piston_forge.dilation import closest_unitary, dilate_single_ancilla
from piston_forge.mesh import decompose, embed_submesh, reconstruct, write_phase_table
from piston_forge.piston import PistonProtocol, truncated_matrix

p = PistonProtocol(1.0, 3.0, 6.0)
T = truncated_matrix(p)
D = dilate_single_ancilla(T)
print(f"defect rank {D.defect_rank}, unitary error {D.unitary_error_pct:.3f} %")

U = closest_unitary(D.entries)
prog = decompose(U)
print(f"{len(prog.settings)} MZIs over {prog.n_layers} layers")
print("reconstruction error:", np.linalg.norm(reconstruct(prog) - U))

# On the 12-mode chip the remaining MZIs sit at theta = phi = pi (identity).
chip = embed_submesh(prog, 12)
full = reconstruct(chip)
print("12-mode chip, spare block is identity:", np.allclose(full[5:, 5:], np.eye(7)))
write_phase_table(chip, "chip_phases.csv")
print("phase table written to chip_phases.csv")
