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
# # Double water filling on parallel Gaussian channels
#
# Ten parallel channels with noise variances `sigma2`, a user with total
# power 13 and a jammer with total power 8.  The jammer fills the noise
# floor first, then the user fills what the jammer left behind.

# %%
import numpy as np
import matplotlib.pyplot as plt

from avcap.channel_model import Constraints, ParallelGaussianSpec
from avcap.waterfill import (
    closed_form_capacity, double_waterfill, random_code_capacity_product, saddle_check, verify_kkt,
)

sigma2 = np.array([5, 8, 3, 1.5, 2.5, 1.8, 3.2, 9, 4.5, 5.5])
spec = ParallelGaussianSpec(sigma2, Constraints(13, 8))
a = double_waterfill(spec)
print(f"jammer level {a.beta:g}, user level {a.alpha:g}")
print("jammer powers", a.N_star)
print("user powers  ", a.P_star)

# %% [markdown]
# The two levels are all that is needed for the capacity: channels below
# the jammer level contribute `log(alpha/beta)/2`, channels between the
# levels `log(alpha/sigma2)/2`, and the rest nothing.

# %%
print(random_code_capacity_product(spec), closed_form_capacity(spec))

# %%
j = np.arange(1, sigma2.size + 1)
fig, ax = plt.subplots(figsize=(7, 3.5))
ax.bar(j, sigma2, color="0.7", label="noise")
ax.bar(j, a.N_star, bottom=sigma2, color="tab:red", label="jammer")
ax.bar(j, a.P_star, bottom=sigma2 + a.N_star, color="tab:blue", label="user")
ax.axhline(a.beta, ls="--", c="tab:red", lw=1)
ax.axhline(a.alpha, ls="--", c="tab:blue", lw=1)
ax.set_xlabel("channel")
ax.set_xticks(j)
ax.legend(loc="upper right")
plt.show()

# %% [markdown]
# ## Is it a saddle point?
#
# The jammer's optimality conditions hold with multiplier
# `(alpha - beta) / (alpha beta)`, and random unilateral deviations from
# either side never pay.

# %%
kkt = verify_kkt(spec, a)
print("multiplier", kkt.theta, "passed", kkt.passed)
s = saddle_check(spec, a, trials=20_000)
print(f"best user gain {s.max_user_gain:.2e}, best jammer gain {s.max_jammer_gain:.2e}")

# %% [markdown]
# ## Capacity against the jammer budget
#
# Random codes degrade smoothly as the jammer gets stronger.
# Deterministic codes stop working altogether once the jammer can match
# the user's power, because it can then send a fake codeword.

# %%
lams = np.linspace(0, 25, 101)
rnd = [random_code_capacity_product(ParallelGaussianSpec(sigma2, Constraints(13, l))) for l in lams]
det = [c if l < 13 else 0.0 for c, l in zip(rnd, lams)]
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(lams, rnd, label="random codes")
ax.plot(lams, det, "--", label="deterministic codes")
ax.set_xlabel("jammer power")
ax.set_ylabel("bits per use")
ax.legend()
plt.show()
