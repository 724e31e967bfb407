# %% [markdown]
# # Perturbing the ground state
#
# Strang splitting is exact in each substep, so mass is conserved to
# roundoff.  We kick the converged mu = 1 ground state by 1e-3 in a
# direction tangent to the mass sphere and watch the distance to its orbit
# under phase and translation.  This is a numerical consistency check,
# not a proof of stability.

# %%
import math

from logns.domain import GridSpec
from logns.evolve import EvolveConfig, stability_experiment
from logns.gradflow import FlowConfig, minimize

grid = GridSpec(d=1, n=1)
theta = math.sqrt(2 * math.pi * math.sqrt(math.pi) * math.e**3)
u0 = minimize(FlowConfig(theta=theta, mu=1.0, init="random"), grid).field

# %%
report = stability_experiment(u0, 1e-3, EvolveConfig(dt=5e-4, steps=20000, record_every=1000))
for s in report.samples:
    print(f"t = {s.t:5.2f}: distance = {s.orbital_distance:.3e}  mass = {s.mass:.12f}  energy = {s.energy:.10f}")
print("max distance:", report.max_distance, " mass drift:", report.mass_drift)
