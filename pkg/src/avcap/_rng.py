"""Counter-based random streams.

Every stream is keyed by ``(seed, tag, index)`` through numpy's
``SeedSequence`` hashing, so the numbers drawn for trial block ``k`` do
not depend on how many other blocks were drawn before it or in which
order.
"""

import zlib

import numpy as np


def _tag_word(tag):
    if isinstance(tag, str):
        return zlib.crc32(tag.encode())
    return int(tag)


def stream(seed, tag, *index):
    """Return an independent ``Generator`` for ``(seed, tag, *index)``."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF, _tag_word(tag)]
    words.extend(int(i) for i in index)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))
