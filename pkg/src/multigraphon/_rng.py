"""Reproducible random streams.

Every consumer asks for a generator keyed by ``(seed, tag, *index)`` so
that draws never depend on the order in which workers are scheduled.
"""

import zlib

import numpy as np


def _tag_key(tag):
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed, tag, *index):
    """Return an independent ``numpy.random.Generator`` for one purpose.

    Parameters
    ----------
    seed : int
        Master seed.
    tag : str
        Purpose label, e.g. ``"edges"`` or ``"restart"``.
    *index : int
        Extra integer coordinates (layer index, replicate index, ...).
    """
    key = (_tag_key(tag),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
