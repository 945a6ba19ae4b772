# Thermal work distributions, the Jarzynski estimator and dissipated work.
import numpy as np

from piston_forge.pipeline import simulate_stroke
from piston_forge.piston import PistonProtocol
from piston_forge.thermo import gibbs_weights, work_distribution

T = 5.0
g = gibbs_weights(T, 1.0)
print(f"four-level coverage at T={T}: {g.coverage:.4f}")

for v in (0.1, 1.0, 3.0, 6.0):
    stroke = simulate_stroke(PistonProtocol(1.0, 3.0, v))
    wd = work_distribution(stroke.protocol, T, stroke.conditionals)
    print(f"v={v:4}: <W>={wd.mean_work:+.3f}  dF_th={wd.df_th:+.3f}  dF_exp={wd.df_exp:+.3f}  "
          f"W_diss={wd.w_diss:.3f}  leak={wd.leakage_weight:.4f}  P(W>0)={wd.positive_work_probability():.4f}")

# Fast compression from a cold, wide box: large positive work
stroke = simulate_stroke(PistonProtocol(5.0, 0.1, -0.7))
wd = work_distribution(stroke.protocol, 0.3, stroke.conditionals)
print(f"compression to 0.1: <W> = {wd.mean_work / 0.3:.0f} T, dF_th = {wd.df_th / 0.3:.0f} T")
