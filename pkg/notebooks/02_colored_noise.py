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
# # Jamming over colored noise
#
# With stationary noise the parallel channels become frequencies.  The
# same two-stage water filling runs over the noise spectrum, and a block
# of `n` samples sees the eigenvalues of an `n x n` Toeplitz covariance,
# which approach the spectrum as `n` grows.

# %%
import numpy as np
import matplotlib.pyplot as plt

from avcap.channel_model import Constraints, SpectralSpec, ar1_autocorr
from avcap.spectral import colored_capacity, freq_double_waterfill, szego_convergence

r = ar1_autocorr(0.5)
spec = SpectralSpec(Constraints(2.0, 0.5), autocorr=r)
a = freq_double_waterfill(spec)
print(f"jammer level {a.beta:.6f}, user level {a.alpha:.6f}")
print("capacity (random, deterministic):", colored_capacity(spec))

# %%
fig, ax = plt.subplots(figsize=(7, 3.5))
ax.fill_between(a.omega, 0, a.psd, color="0.7", label="noise")
ax.fill_between(a.omega, a.psd, a.psd + a.b_star, color="tab:red", label="jammer")
ax.fill_between(a.omega, a.psd + a.b_star, a.psd + a.b_star + a.a_star, color="tab:blue", label="user")
ax.set_xlabel("frequency")
ax.set_xlim(-np.pi, np.pi)
ax.legend()
plt.show()

# %% [markdown]
# ## Finite blocks
#
# Block capacities from the covariance eigenvalues, against the spectral
# limit.  The gap shrinks roughly like `1/n`.

# %%
tab = szego_convergence(r, 2.0, 0.5, [8, 16, 32, 64, 128, 256])
print(f"limit {tab.limit:.10f}")
for n, c, g in zip(tab.n, tab.C_n, tab.gap):
    print(f"n={n:4d}  C_n={c:.10f}  gap={g:.3e}  n*gap={n * g:.4f}")

# %%
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.loglog(tab.n, tab.gap, "o-")
ax.set_xlabel("block length")
ax.set_ylabel("|C_n - C|")
plt.show()

# %% [markdown]
# ## Flat spectrum
#
# White noise has every eigenvalue equal to the variance, so every block
# length already gives the limit.

# %%
flat = szego_convergence([1.5], 2.0, 0.5, [1, 4, 16, 64])
print(flat.gap)
