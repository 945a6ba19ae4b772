# Two indistinguishable photons bunch; two distinguishable particles do not.
import numpy as np

from piston_forge.bosons import display_label, distinguishable_transfer, output_distribution
from piston_forge.pipeline import simulate_stroke
from piston_forge.piston import PistonProtocol

bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
d = output_distribution(bs, (1, 1))
print("HOM:", {display_label(s): round(p, 6) for s, p in d.as_dict().items()})
print("distinguishable P(1,1):", distinguishable_transfer(bs, (1, 1), (1, 1)))

# Conditional Fock statistics for both bosons starting in the ground level
stroke = simulate_stroke(PistonProtocol(1.0, 3.0, 3.0), snap_unitary=True)
cond = stroke.conditionals[(2, 0, 0, 0)]
top = np.argsort(cond.probabilities)[::-1][:5]
for k in top:
    print(display_label(cond.states[k]), f"{cond.probabilities[k]:.4f}")
