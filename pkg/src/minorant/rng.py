"""Reproducible, splittable random streams.

Streams are Philox (counter-based) generators keyed by a root seed and a
tuple of labels. The same (seed, labels) always gives the same stream, no
matter which worker or in which order it is created.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


def _label(k) -> int:
    if isinstance(k, (int, np.integer)):
        if k < 0:
            raise ValueError("stream labels must be non-negative")
        return int(k)
    return zlib.crc32(str(k).encode("utf-8"))


def stream(seed: int, *key) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_label(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key) -> int:
    """A 63-bit child seed, used to give independent sample sets their own root."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_label(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class RngStream:
    """Value-like handle on a stream; cheap to copy and send to workers."""

    seed: int
    key: tuple = ()

    def child(self, *key) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(key))

    def generator(self) -> np.random.Generator:
        return stream(self.seed, *self.key)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot make a generator from {type(rng).__name__}")
