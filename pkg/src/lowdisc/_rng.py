"""Seeded random streams.

Every random draw in the package comes from a Philox4x64 counter-based
generator (numpy's ``Philox`` bit generator) whose key is derived by
``numpy.random.SeedSequence`` from a tuple ``(seed, role, *index)``.
A draw therefore depends only on the user seed, a fixed role tag and the
position (dimension, replication, level) it is used for, never on the
order in which other draws happened.
"""
from __future__ import annotations

import numpy as np

ROLES = {
    "shift": 1,
    "digital_shift": 2,
    "scramble": 3,
    "permute": 4,
    "lattice_spec": 5,
    "digital_spec": 6,
    "iid": 7,
    "pilot": 8,
    "replication": 9,
    "level": 10,
}

_MASK64 = (1 << 64) - 1


def _words(value: int) -> list[int]:
    value = int(value) & _MASK64
    return [value & 0xFFFFFFFF, value >> 32]


def stream(seed: int, role: str, *index: int) -> np.random.Generator:
    """Independent generator for ``(seed, role, *index)``."""
    entropy = _words(seed) + [ROLES[role]]
    for k in index:
        entropy += _words(k)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def child_seed(seed: int, role: str, *index: int) -> int:
    """A 64-bit seed derived from ``(seed, role, *index)``."""
    return int(stream(seed, role, *index).integers(0, 1 << 64, dtype=np.uint64))
