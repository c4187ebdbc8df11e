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
# # Simulating the jammer
#
# Spherical codebooks, minimum distance decoding.  A jammer that sends a
# randomly chosen codeword of its own leaves the decoder guessing between
# two equally good candidates when it has enough power.  The error rate
# then sits near `(1 - 1/M)/2`, however long the block.

# %%
import numpy as np
import matplotlib.pyplot as plt

from avcap.jamming_sim import SimConfig, simulate

M = 16
for n in (32, 128, 512):
    cfg = SimConfig.from_codebook_size(n, M, gamma=1.0, lam=1.0, sigma2=0.1,
                                       strategy="mimic", trials=5000, seed=7)
    rep = simulate(cfg)
    print(f"n={n:4d}  error {rep.error_rate:.4f} +- {rep.half_width:.4f}")
print("confusion limit", 0.5 * (1 - 1 / M))

# %% [markdown]
# ## Sweeping the jammer power
#
# Below the user's power the impostor codeword is shrunk and the decoder
# recovers.  The drop is sharp around jammer power 1.

# %%
lams = np.linspace(0.5, 1.2, 15)
err = [simulate(SimConfig.from_codebook_size(128, M, gamma=1.0, lam=l, sigma2=0.1,
                                             strategy="mimic", trials=3000, seed=1)).error_rate
       for l in lams]
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(lams, err, "o-")
ax.axvline(1.0, c="0.5", lw=0.8)
ax.set_xlabel("jammer power (user power 1)")
ax.set_ylabel("block error rate")
plt.show()

# %% [markdown]
# ## Gaussian jamming below capacity
#
# With `2^(n R)` far beyond anything storable, the simulator averages
# over random spherical codebooks instead of drawing one.

# %%
cfg = SimConfig(n=512, rate=0.3, gamma=2.0, lam=0.5, sigma2=0.5, strategy="iid", trials=5000, seed=7)
rep = simulate(cfg)
print(rep.mode, rep.error_rate, "capacity", rep.metadata["capacity_bits"])
