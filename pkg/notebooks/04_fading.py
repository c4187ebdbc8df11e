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
# # Known fading gains
#
# The channel gain takes the values 0.5 and 1, each half of the time,
# and both players know the sequence.  Each splits its power over the
# two gains.

# %%
import numpy as np
import matplotlib.pyplot as plt

from avcap.channel_model import Constraints, FadingSpec
from avcap.fading import fading_det_capacity, fading_random_capacity


def spec(lam, gamma=2.0):
    return FadingSpec(np.array([0.5, 1.0]), np.array([0.5, 0.5]), 1.0, Constraints(gamma, lam))


res = fading_random_capacity(spec(1.0))
print(f"value {res.value:.10f}, certified to {res.value - res.lower_bound:.1e}")
print("user", res.allocation.omega, "jammer", res.allocation.lam)

# %% [markdown]
# ## Deterministic codes
#
# To impersonate the user the jammer needs power equal to the received
# signal power.  Deterministic codes therefore work only when the user
# can keep that above the jammer budget, which forces power onto the
# strong gain once the budget gets close.

# %%
lams = np.linspace(0.05, 2.2, 44)
rnd, det = [], []
for l in lams:
    d = fading_det_capacity(spec(l), oracle=False)
    rnd.append(d.random)
    det.append(d.value)
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(lams, rnd, label="random codes")
ax.plot(lams, det, "--", label="deterministic codes")
ax.axvline(2.0, c="0.5", lw=0.8)
ax.set_xlabel("jammer power")
ax.set_ylabel("bits per use")
ax.legend()
plt.show()

# %%
d = fading_det_capacity(spec(1.8))
print(f"jammer 1.8: random {d.random:.6f}, deterministic {d.value:.6f}, constrained {d.constraint_active}")
print("user split", d.allocation.omega)
