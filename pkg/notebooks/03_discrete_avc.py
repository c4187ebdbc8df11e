# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Discrete channels with a known parameter sequence
#
# A binary symmetric channel whose crossover depends on a known
# parameter `t` (1/4 or 5/12, each half of the time).  The jammer flips
# bits at a cost of 1 per flip, the user pays 1 per transmitted one.

# %%
import numpy as np

from avcap.discrete_avc import (
    bsc_example, bsc_spec, deterministic_capacity_fixed_params, find_symmetrizer,
    per_parameter_decomposition, random_capacity_fixed_params, symm_threshold,
)

spec = bsc_spec([0.25, 5 / 12], [0.5, 0.5], gamma=5 / 16, lam=0.25)

# %% [markdown]
# ## Symmetrizing kernels
#
# A kernel `J(s|x)` that makes the averaged channel symmetric in two
# inputs lets the jammer impersonate the user.  For a BSC the cheapest
# one flips exactly the less likely input.

# %%
p = np.array([0.7, 0.3])
k = find_symmetrizer(spec.W[0], p, spec.l)
print(k.J)
print("cost", k.cost, "residual", k.residual)

# %% [markdown]
# The threshold is the most the jammer may need to pay over all inputs
# the user can afford.  Deterministic codes have positive capacity only
# when the jammer budget is below it.

# %%
print("threshold", symm_threshold(spec).value)

# %% [markdown]
# ## Random and deterministic capacity
#
# The random code capacity is a min-max of the conditional mutual
# information.  The solver reports both sides, and the difference is a
# certified duality gap.

# %%
rnd = random_capacity_fixed_params(spec)
print(f"upper {rnd.value:.10f}  lower {rnd.lower_bound:.10f}  gap {rnd.gap:.1e}")
print(f"grid check {rnd.oracle_value:.6f} (slack {rnd.oracle_slack:.1e})")
det = deterministic_capacity_fixed_params(spec)
print("deterministic", det.value)

# %% [markdown]
# ## Joint against split coding
#
# The closed-form report fixes the jammer split that equalizes the two
# crossovers.  Against that split, joint coding beats coding each
# parameter separately.

# %%
rep = bsc_example(0.25, 5 / 12, 5 / 16, 0.25)
print(f"joint {rep.C_joint:.6f}  split {rep.C_split:.6f}  jammer split {rep.lam_alloc}")

# %% [markdown]
# That split is not the jammer's best one.  Solving the game over all
# splits gives a lower value, and the budget-split decomposition agrees
# with the joint solver.

# %%
dec = per_parameter_decomposition(spec)
print(f"solved {rnd.value:.6f}  decomposition {dec.value:.6f}  jammer budgets {dec.lam}")
