"""Randomizations that keep low discrepancy.

All randomness is drawn from :func:`lowdisc._rng.stream`, keyed by the
user seed, a role tag and the dimension, so the output for a given
``(input, seed)`` pair is bit-identical across runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .seqgen import PRECISION, DigitalSpec, HaltonSpec, LatticeSpec, PointSet, _freeze

KINDS = ("none", "shift_mod1", "digital_shift", "linear_scramble", "halton_permute")

COMPATIBLE = {
    "none": {"lattice", "sobol", "digital", "halton", "hammersley", "grid", "iid"},
    "shift_mod1": {"lattice"},
    "digital_shift": {"sobol", "digital"},
    "linear_scramble": {"sobol", "digital"},
    "halton_permute": {"halton"},
}


@dataclass(frozen=True)
class RandomizeSpec:
    kind: str = "none"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown randomization {self.kind!r}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def check_family(self, family: str) -> None:
        if family not in COMPATIBLE[self.kind]:
            raise ValueError(f"randomization {self.kind!r} does not apply to {family!r} points")


def draw_shift(d: int, seed: int) -> np.ndarray:
    return np.array([_rng.stream(seed, "shift", j).random() for j in range(d)])


def draw_digital_shift(d: int, seed: int, M: int = PRECISION) -> np.ndarray:
    return np.array(
        [_rng.stream(seed, "digital_shift", j).integers(0, 1 << M, dtype=np.uint64) for j in range(d)],
        dtype=np.uint64,
    )


def shift_mod1(points: PointSet, seed: int, shift: np.ndarray | None = None) -> PointSet:
    """Add one uniform shift to every point, modulo 1."""
    x = np.asarray(points, dtype=np.float64)
    delta = draw_shift(x.shape[1], seed) if shift is None else np.asarray(shift, dtype=np.float64)
    out = np.mod(x + delta[None, :], 1.0)
    out[out >= 1.0] = 0.0
    return _freeze(out)


def _to_bits(points: np.ndarray, M: int) -> np.ndarray:
    scaled = np.asarray(points, dtype=np.float64) * float(1 << M)
    ints = scaled.astype(np.uint64)
    if not np.array_equal(ints.astype(np.float64), scaled):
        raise ValueError(f"coordinates need at most {M} binary digits")
    return ints


def digital_shift(points: PointSet, seed: int, M: int = PRECISION, shift: np.ndarray | None = None) -> PointSet:
    """Digitwise exclusive or of every point with one random ``M``-bit shift.

    ``shift`` may be given explicitly as unit-interval values (one per
    dimension) instead of being drawn from ``seed``.
    """
    ints = _to_bits(points, M)
    if shift is None:
        delta = draw_digital_shift(ints.shape[1], seed, M)
    else:
        delta = _to_bits(np.asarray(shift, dtype=np.float64)[None, :], M)[0]
    return _freeze((ints ^ delta[None, :]).astype(np.float64) * 2.0 ** -M)


@dataclass(frozen=True)
class ScrambleState:
    """Lower-triangular scrambling matrices and the accompanying digital shift.

    ``rows[j][l]`` packs row ``l`` (0-based) of ``L_j`` with the same bit
    layout as a :class:`DigitalSpec` column: bit ``M - 1 - k`` is column ``k``.
    """

    rows: tuple[tuple[int, ...], ...]
    shift: tuple[int, ...]
    M: int = PRECISION

    def matrix(self, j: int) -> np.ndarray:
        r = np.array(self.rows[j], dtype=np.uint64)
        shifts = np.arange(self.M - 1, -1, -1, dtype=np.uint64)
        return ((r[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def _random_lower(M: int, gen: np.random.Generator) -> tuple[int, ...]:
    rows = []
    for l in range(M):
        below = int(gen.integers(0, 1 << l)) if l else 0
        rows.append((below << (M - l)) | (1 << (M - 1 - l)))
    return tuple(rows)


def _mat_mul_columns(rows: np.ndarray, cols: np.ndarray, M: int) -> np.ndarray:
    # (L c)_l = parity(row_l & c)
    bits = np.bitwise_count(rows[:, None] & cols[None, :]) & np.uint8(1)
    weights = np.uint64(1) << np.arange(M - 1, -1, -1, dtype=np.uint64)
    return (bits.astype(np.uint64) * weights[:, None]).sum(axis=0, dtype=np.uint64)


def linear_scramble(spec: DigitalSpec, seed: int) -> tuple[DigitalSpec, ScrambleState]:
    """Left-multiply each generating matrix by a random unit lower-triangular matrix.

    Points of the returned spec, xored with ``state.shift``, are the
    linearly scrambled and digitally shifted sequence; the returned object stays
    extensible.
    """
    M = spec.M
    rows, cols = [], []
    for j, col in enumerate(spec.columns):
        L = _random_lower(M, _rng.stream(seed, "scramble", j))
        rows.append(L)
        new = _mat_mul_columns(np.array(L, dtype=np.uint64), np.array(col, dtype=np.uint64), M)
        cols.append(tuple(int(c) for c in new))
    shift = tuple(int(s) for s in draw_digital_shift(spec.d, seed, M))
    return DigitalSpec(tuple(cols), M), ScrambleState(tuple(rows), shift, M)


def apply_shift_bits(points: PointSet, state: ScrambleState) -> PointSet:
    ints = _to_bits(points, state.M)
    return _freeze((ints ^ np.array(state.shift, dtype=np.uint64)[None, :]).astype(np.float64) * 2.0 ** -state.M)


def halton_depth(b: int) -> int:
    return math.ceil(PRECISION / math.log2(b))


def halton_permute(spec: HaltonSpec, seed: int) -> HaltonSpec:
    """Independent uniform random digit permutations for every base and digit."""
    perms = []
    for j, b in enumerate(spec.bases):
        gen = _rng.stream(seed, "permute", j)
        perms.append(tuple(tuple(int(v) for v in gen.permutation(b)) for _ in range(halton_depth(b))))
    return HaltonSpec(spec.bases, tuple(perms))


def random_lattice_spec(d: int, n: int, seed: int, m_max: int = 32) -> LatticeSpec:
    """Random base-2 generating vector: ``h_1 = 1``, other components odd in ``[1, n)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    gen = _rng.stream(seed, "lattice_spec")
    odd = np.arange(1, n, 2)
    h = [1] + [int(v) for v in gen.choice(odd, size=d - 1)]
    return LatticeSpec(tuple(h), 2, m_max)


def random_digital_spec(d: int, M: int, N: int, seed: int) -> DigitalSpec:
    """Random upper-triangular generating matrices with unit diagonal."""
    if N > M:
        raise ValueError("need N <= M")
    cols = []
    for j in range(d):
        gen = _rng.stream(seed, "digital_spec", j)
        col = []
        for i in range(1, N + 1):
            above = int(gen.integers(0, 1 << (i - 1))) if i > 1 else 0
            col.append((above << (M - i + 1)) | (1 << (M - i)))
        cols.append(tuple(col))
    return DigitalSpec(tuple(cols), M)
