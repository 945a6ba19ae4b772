# Single-particle transitions of a box whose wall moves at constant speed.
# Slow strokes stay on the diagonal; fast strokes spread amplitude upward.
import numpy as np

from piston_forge.oracle import OracleConfig, max_deviation, oracle_transition_matrix
from piston_forge.piston import PistonProtocol, adiabaticity_parameter, truncated_matrix

np.set_printoptions(precision=4, suppress=True)

for v in (0.1, 1.1, 6.0):
    p = PistonProtocol(1.0, 3.0, v)
    T = truncated_matrix(p)
    print(f"v = {v}: xi12 = {adiabaticity_parameter(1, 2, v, p.lambda_tau):.3f}")
    print(np.abs(T.entries) ** 2)
    print("kept per column:", T.column_completeness)

# The same matrix from a completely different route: integrate the
# Schrodinger equation in the instantaneous eigenbasis.
p = PistonProtocol(1.0, 2.0, 1.1)
T_ode = oracle_transition_matrix(p, OracleConfig(basis_cutoff=80, step_count=50_000))
print("spectral vs ODE max deviation:", max_deviation(T_ode.entries, truncated_matrix(p).entries))
