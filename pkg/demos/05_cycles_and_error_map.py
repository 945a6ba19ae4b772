# Expansion then compression with no bath in between; how much comes back?
import numpy as np

from piston_forge.harness import ExperimentConfig, crossing, run_cycle_sweep, run_epsilon_mapping

cyc = run_cycle_sweep(ExperimentConfig.from_dict(
    {"kind": "cycle-sweep", "lambda0": 1.0, "lambdaTau": 3.0, "T": 5.0, "vGrid": [0.1, 0.5, 1, 2, 3, 4, 5, 6]}))
speeds, b = cyc.column("speed"), cyc.column("b_cycle")
for s, bb, w in zip(speeds, b, cyc.column("w_diss_cycle")):
    print(f"|v|={s:4}: B_cycle={bb:.5f}  W_diss,cyc={w:.3f}")
print("B_cycle < 0.90 from |v| ~", crossing(speeds, b, 0.90))

# Longer strokes at |v| = 11 need larger dilation errors
m = run_epsilon_mapping(ExperimentConfig.from_dict(
    {"kind": "epsilon-mapping", "lambda0": 1.0, "v": 11.0, "T": 5.0, "lambdaTauGrid": [1.05, 1.5, 2.0, 2.5, 3.0]}))
np.set_printoptions(precision=4, suppress=True)
print(m.table)
print(m.thresholds)
