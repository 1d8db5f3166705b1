# %% [markdown]
# # From divergences to total variation
#
# Several bounds convert a divergence into a TV bound. This demo locates
# the points where one conversion overtakes another.

# %%
import math

import numpy as np

from genbound import bounds_standard as bs
from genbound import divergences as dv

# %% [markdown]
# ## Pinsker against Bretagnolle-Huber
#
# Psi(x) = sqrt(min(x/2, 1 - exp(-x))). Pinsker wins for small KL and
# Bretagnolle-Huber for large KL; the switch happens near 1.594.

# %%
print(f"crossover at KL = {dv.pinsker_bh_crossover():.6f}")
for x in (0.5, 1.0, 1.5, 2.0, 5.0):
    print(f"KL={x:4.1f}  Pinsker {math.sqrt(x / 2):.4f}  BH {math.sqrt(1 - math.exp(-x)):.4f}  Psi {dv.psi(x):.4f}")

# %% [markdown]
# ## Chi-squared conversions
#
# For a loss of range L, the variational bound sqrt(Var chi2) beats
# L sqrt(log(1 + chi2) / 2) up to a crossover. At the largest possible
# variance, L^2/4, the crossover sits near chi2 = 2.51.

# %%
print(f"crossover at Var = L^2/4: chi2 = {bs.variational_crossover(0.25, 1.0):.4f}")
threshold = bs.variational_dominance_threshold(1.0)
print(f"variational bound never loses on chi2 <= e^2 - 1 when Var <= {threshold:.5f} L^2")

# %%
chis = np.linspace(0.01, math.expm1(2.0), 6)
for var in (0.10, threshold, 0.20):
    diffs = [bs.chi2_via_kl_term(c, 1.0) - bs.chi2_variational_term(var, c) for c in chis]
    print(f"Var={var:.4f}: via-KL minus variational over chi2 grid -> min {min(diffs):+.4f}")
