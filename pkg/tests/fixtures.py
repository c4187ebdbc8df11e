"""Channel fixtures shared by several test modules."""

import numpy as np

from avcap.channel_model import Constraints, DiscreteAVCSpec
from avcap.discrete_avc import bsc_spec


def binary_slice(w0):
    """Binary slice from ``W(y=0|x,s)`` listed as ``[x0s0, x0s1, x1s0, x1s1]``."""
    W = np.zeros((2, 2, 2))
    W[:, :, 0] = np.asarray(w0, float).reshape(2, 2)
    W[:, :, 1] = 1 - W[:, :, 0]
    return W


def binary_spec(slices, P_T, gamma, lam):
    W = np.stack([binary_slice(w) for w in slices])
    return DiscreteAVCSpec(W, P_T, [0.0, 1.0], [0.0, 1.0], Constraints(gamma, lam))


# channels where the restriction on the input's symmetrizability cost binds,
# so the deterministic capacity is strictly below the random one
RESTRICTED = [
    ([0.84102, 0.853779, 0.001723, 0.975683], 0.742341, 0.476408),
    ([0.355373, 0.037021, 0.797713, 0.197701], 0.91995, 0.549708),
]

EXAMPLE1 = dict(eps=[0.25, 5 / 12], P_T=[0.5, 0.5], gamma=5 / 16, lam=0.25)


def example1():
    return bsc_spec(**EXAMPLE1)


def binary_fixtures():
    """Binary-alphabet specs with at most two parameter values."""
    out = [
        ("example1", example1()),
        ("bsc_T1", bsc_spec([0.25], [1.0], 0.5, 0.25)),
        ("bsc_unequal_type", bsc_spec([0.1, 0.3], [0.3, 0.7], 0.4, 0.2)),
    ]
    for i, (w, g, lam) in enumerate(RESTRICTED):
        out.append((f"restricted{i}", binary_spec([w], [1.0], g, lam)))
    out.append(("mixed_T2", binary_spec(
        [RESTRICTED[0][0], [0.9, 0.2, 0.3, 0.6]], [0.6, 0.4], 0.5, 0.3)))
    return out
