"""
Named, independent random-number substreams.

Every stream is a numpy PCG64 Generator seeded from the master seed and a
stable hash of the stream key, so drawing from one stream never moves another
and the same master seed always reproduces the same draws per stream.
"""

import zlib

import numpy as np

_WORD = 32
_WORD_MASK = (1 << _WORD) - 1


def _words(value):
    """Split an integer into 32-bit words for SeedSequence entropy; the sign takes its own word."""
    value = int(value)
    words = [1 if value < 0 else 0]
    value = abs(value)
    while True:
        words.append(value & _WORD_MASK)
        value >>= _WORD
        if not value:
            return words


def _key_entropy(key):
    parts = key if isinstance(key, tuple) else (key,)
    entropy = []
    for part in parts:
        if isinstance(part, (int, np.integer)) and not isinstance(part, bool):
            entropy.extend(_words(part))
        else:
            entropy.append(zlib.crc32(str(part).encode("utf-8")))
    return entropy


class RngStreams:
    """
    Keyed registry of generators, e.g. ("arrivals", "outpatient", 0),
    ("service", "d", "outpatient", 1), ("routing", 0), ("compliance",).

    A shared registry hands out the same generator for every key; the
    clairvoyant clones use it to run on one oracle stream.
    """

    def __init__(self, master_seed, shared=None):
        self.master_seed = int(master_seed)
        self._streams = {}
        self._shared = shared

    @classmethod
    def shared(cls, generator, master_seed=0):
        return cls(master_seed, shared=generator)

    def get(self, key):
        if self._shared is not None:
            return self._shared
        stream = self._streams.get(key)
        if stream is None:
            stream = self.spawn(key)
            self._streams[key] = stream
        return stream

    def spawn(self, key):
        """Fresh generator for `key` that is not registered (never shares state)."""
        master = _words(self.master_seed)
        # the length word keeps (seed, key) splits from colliding
        seed_seq = np.random.SeedSequence([len(master), *master, *_key_entropy(key)])
        return np.random.Generator(np.random.PCG64(seed_seq))

    def keys(self):
        return sorted(self._streams, key=repr)
