# %% [markdown]
# # Test-function upper bounds
#
# Two families of trial states: a Gausson in x times a mollified tent in
# y, and a dilated Dirichlet eigenfunction on a box.

# %%
import math

import numpy as np

from logns.bounds import EigenBoxParams, TentParams, eigen_testfield_scan, tent_chain, tent_norms, upper_bound_I0

sq, ent = tent_norms(math.pi - 1.0)
print("||phi||^2 =", sq, " int phi^2 log phi^2 =", ent)

# %% [markdown]
# Every row of the table below sits under the y-independent reference.
# The reduced term alone beats it only for narrow tents (a near pi); the
# remainder is negative and does the rest.

# %%
table = upper_bound_I0(6.0, np.linspace(0.5, math.pi - 0.05, 8))
for row in table.rows:
    print(f"a = {row.a:.3f}: I0 = {row.energy:9.4f}  reduced = {row.reduced_term:9.4f}  "
          f"ref = {row.reference:9.4f}  strict = {row.strict}  reduced_strict = {row.reduced_strict}")

# %% [markdown]
# The remainder tends to -n Theta^2 / 2 as the mollifier shrinks, so its
# magnitude grows toward that limit; the part that vanishes is the
# difference from the limit.

# %%
for eps in (1e-1, 1e-2, 1e-3):
    row = tent_chain(6.0, TentParams(math.pi - 1.0, eps))
    print(f"eps = {eps:.0e}: remainder = {row.remainder:.9f}, minus limit = {row.remainder_correction:.2e}")

# %%
for theta in (6.0, 30.0):
    rows = eigen_testfield_scan(EigenBoxParams(ell=1.0, theta=theta), [1.0, 6.0])
    for r in rows:
        print(f"Theta = {theta}: r = {r.r}: energy = {r.energy:10.3f}  window ({r.lower_direct:.2f}, {r.upper:.2f})"
              f"  in window = {r.in_window_direct}  empty = {r.window_empty}")
