# %% [markdown]
# # The Gausson as an oracle
#
# On the line the logarithmic Schrodinger equation has an explicit
# Gaussian standing wave.  Its mass fixes both the frequency and the
# energy, which makes it a convenient yardstick for everything else.

# %%
import math

import numpy as np

from logns.domain import GridSpec, kinetic_split, mass
from logns.energy import energy, first_variation
from logns.oracle import gausson_energy, lambda_of_mass, sample_gausson

# %% [markdown]
# Frequency and energy as functions of the reduced mass.  The energy changes
# sign at mass sqrt(pi) e^2, where lambda = 1.

# %%
for power in (1, 2, 3, 4):
    m = math.sqrt(math.pi) * math.e**power
    print(f"mass sqrt(pi) e^{power}: lambda = {lambda_of_mass(m, 1):+.3f}, energy = {gausson_energy(m, 1):+.4f}")

# %% [markdown]
# Sample it on a grid and check the equation directly.

# %%
grid = GridSpec(d=1, n=0, L=12.0, points_x=256)
m_red = math.sqrt(math.pi) * math.e**3
u = sample_gausson(grid, math.sqrt(m_red))
lam = lambda_of_mass(m_red, 1)
r = first_variation(u, 1.0).samples + lam * u.samples
print("relative residual:", np.linalg.norm(r) / np.linalg.norm(u.samples))
print("energy on grid   :", energy(u).total, "closed form:", gausson_energy(m_red, 1))
print("Kx / mass        :", kinetic_split(u)[0] / mass(u), "(1/2 for d = 1)")

# %% [markdown]
# On the waveguide R x T the y-independent Gausson carries the reduced
# mass Theta^2 / 2pi and energy 2pi times the reduced value.

# %%
wg = GridSpec(d=1, n=1)
theta = math.sqrt(2 * math.pi * m_red)
print("waveguide energy:", energy(sample_gausson(wg, theta)).total, "=", 2 * math.pi * gausson_energy(m_red, 1))
