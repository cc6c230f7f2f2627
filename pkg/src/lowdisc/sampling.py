"""Extensible, optionally randomized point streams.

A :class:`Sampler` bundles a sequence family, its parameters and one
randomization.  ``sampler.points(n, start)`` returns the points with indices
``start .. start + n - 1``, so a stream can be grown in stages without
regenerating (or re-evaluating) earlier points.
"""
from __future__ import annotations

import numpy as np

from . import _rng
from .randomize import (
    RandomizeSpec,
    apply_shift_bits,
    digital_shift,
    halton_permute,
    linear_scramble,
    shift_mod1,
)
from .seqgen import (
    DigitalSpec,
    HaltonSpec,
    LatticeSpec,
    PointSet,
    _freeze,
    default_lattice_spec,
    digital_points,
    grid_points,
    halton_points,
    hammersley_points,
    lattice_points,
    sobol_spec,
)

FAMILIES = ("lattice", "sobol", "digital", "halton", "hammersley", "grid", "iid")

# CLI spelling -> RandomizeSpec kind
RANDOMIZE_ALIASES = {
    "none": "none",
    "shift": "shift_mod1",
    "digital-shift": "digital_shift",
    "lms": "linear_scramble",
    "permute": "halton_permute",
}

_IID_BLOCK = 4096


class Sampler:
    """Point stream for one replication of one (family, randomization) pair."""

    def __init__(
        self,
        family: str,
        d: int,
        randomize: str = "none",
        seed: int = 0,
        *,
        lattice: LatticeSpec | None = None,
        digital: DigitalSpec | None = None,
        halton: HaltonSpec | None = None,
        order: str = "extensible",
    ):
        if family not in FAMILIES:
            raise ValueError(f"unknown sequence family {family!r}")
        kind = RANDOMIZE_ALIASES.get(randomize, randomize)
        RandomizeSpec(kind, seed).check_family(family)
        self.family, self.d, self.kind, self.seed, self.order = family, d, kind, seed, order
        self._shift = None
        self._state = None
        if family == "lattice":
            self.lattice = lattice or default_lattice_spec(d)
            if self.lattice.d != d:
                raise ValueError("lattice generating vector length differs from d")
        elif family in ("sobol", "digital"):
            spec = digital or sobol_spec(d)
            if spec.d != d:
                raise ValueError("generating matrices do not match d")
            if kind == "linear_scramble":
                spec, self._state = linear_scramble(spec, seed)
            self.digital = spec
        elif family in ("halton", "hammersley"):
            base_dim = d if family == "halton" else d - 1
            spec = halton or HaltonSpec.first(base_dim)
            if spec.d != base_dim:
                raise ValueError("Halton bases do not match d")
            if kind == "halton_permute":
                spec = halton_permute(spec, seed)
            self.halton = spec

    @property
    def randomized(self) -> bool:
        return self.kind != "none" or self.family == "iid"

    def points(self, n: int, start: int = 0) -> PointSet:
        fam = self.family
        if fam == "lattice":
            x = lattice_points(self.lattice, n, start, self.order)
            return shift_mod1(x, self.seed) if self.kind == "shift_mod1" else x
        if fam in ("sobol", "digital"):
            x = digital_points(self.digital, n, start)
            if self.kind == "digital_shift":
                return digital_shift(x, self.seed, self.digital.M)
            if self.kind == "linear_scramble":
                return apply_shift_bits(x, self._state)
            return x
        if fam == "halton":
            return halton_points(self.halton, n, start)
        if fam == "hammersley":
            if start:
                raise ValueError("Hammersley node sets are not extensible")
            return hammersley_points(self.halton, n)
        if fam == "grid":
            if start:
                raise ValueError("grids are not extensible")
            m = round(n ** (1.0 / self.d))
            if m ** self.d != n:
                raise ValueError(f"grid sizes must be m^{self.d}")
            return grid_points(m, self.d)
        return self._iid(n, start)

    def _iid(self, n: int, start: int) -> PointSet:
        if n == 0:
            return _freeze(np.zeros((0, self.d)))
        first, last = start // _IID_BLOCK, (start + n - 1) // _IID_BLOCK
        blocks = [
            _rng.stream(self.seed, "iid", b).random((_IID_BLOCK, self.d)) for b in range(first, last + 1)
        ]
        allpts = np.concatenate(blocks)
        off = start - first * _IID_BLOCK
        return _freeze(allpts[off : off + n].copy())


def replication_samplers(family: str, d: int, randomize: str, seed: int, R: int, **kw) -> list[Sampler]:
    """``R`` independently randomized copies of one stream."""
    return [Sampler(family, d, randomize, _rng.child_seed(seed, "replication", r), **kw) for r in range(R)]
