"""t-value certification of base-2 digital nets.

Two independent routes:

* rank: for every composition ``k`` of ``m - t`` into ``d`` parts, the first
  ``k_j`` rows of the first ``m`` columns of each ``C_j``, stacked, must be
  linearly independent over GF(2);
* counting: every elementary box with ``|k| = m - t`` holds exactly
  ``2**t`` of the ``2**m`` points.

Checking ``|k| = m - t`` suffices because every box with a smaller ``|k|``
is a disjoint union of such boxes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .seqgen import DigitalSpec, digital_points

MAX_COUNT_M = 20
MAX_COUNT_D = 6


@dataclass(frozen=True)
class TValueResult:
    t: int
    m: int
    d: int
    witness_k: tuple[int, ...] | None = None
    witness_a: tuple[int, ...] | None = None
    witness_count: int | None = None
    method: str = "rank"

    @property
    def fair_share(self) -> int | None:
        if self.witness_k is None:
            return None
        return 2 ** (self.m - sum(self.witness_k))


def compositions(total: int, d: int, cap: int | None = None) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer ``d``-tuples summing to ``total``, lexicographically descending."""
    cap = total if cap is None else cap
    if d == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap), -1, -1):
        for rest in compositions(total - first, d - 1, cap):
            yield (first,) + rest


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"number of points {n} is not a power of 2")
    return n.bit_length() - 1


def _rows(spec: DigitalSpec, m: int) -> list[list[int]]:
    """Row ``l`` of ``C_j`` restricted to the first ``m`` columns, as bit masks."""
    out = []
    for col in spec.columns:
        rows = []
        for l in range(min(m, spec.M)):
            shift = spec.M - 1 - l
            rows.append(sum(((col[c] >> shift) & 1) << c for c in range(m)))
        out.append(rows)
    return out


def _dependency(rows: list[int]) -> int | None:
    """Mask of rows summing to zero over GF(2), or None if independent."""
    basis: dict[int, tuple[int, int]] = {}
    for idx, r in enumerate(rows):
        combo = 1 << idx
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = (r, combo)
                break
            br, bc = basis[top]
            r ^= br
            combo ^= bc
        else:
            return combo
    return None


def gf2_rank(rows: list[int]) -> int:
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return len(basis)


def _stack(rows: list[list[int]], k: tuple[int, ...]) -> list[int]:
    return [r for rj, kj in zip(rows, k) for r in rj[:kj]]


def t_value_rank(spec: DigitalSpec, m: int) -> TValueResult:
    if m > spec.N:
        raise ValueError(f"spec has only {spec.N} columns")
    d = spec.d
    rows = _rows(spec, m)
    failing = None
    for t in range(m + 1):
        for k in compositions(m - t, d, cap=min(m, spec.M)):
            dep = _dependency(_stack(rows, k))
            if dep is not None:
                failing = (k, dep)
                break
        else:
            if t == 0:
                return TValueResult(0, m, d, method="rank")
            k, dep = failing
            # a digit target b with (dependency . b) = 1 is outside the image, so its box is empty
            p = (dep & -dep).bit_length() - 1
            target = [1 if i == p else 0 for i in range(sum(k))]
            a, pos = [], 0
            for kj in k:
                a.append(int("".join(map(str, target[pos : pos + kj])) or "0", 2))
                pos += kj
            return TValueResult(t, m, d, k, tuple(a), 0, "rank")
    raise AssertionError("unreachable: t = m always holds")


def _box_counts(ints: np.ndarray, m: int, k: tuple[int, ...]) -> np.ndarray:
    key = np.zeros(ints.shape[0], dtype=np.int64)
    for j, kj in enumerate(k):
        if kj:
            key = (key << kj) | (ints[:, j] >> (m - kj))
    return np.bincount(key, minlength=1 << sum(k))


def _decode(key: int, k: tuple[int, ...]) -> tuple[int, ...]:
    a = []
    for kj in reversed(k):
        a.append(key & ((1 << kj) - 1))
        key >>= kj
    return tuple(reversed(a))


def t_value_count(points: np.ndarray) -> TValueResult:
    """t-value of ``2**m`` points by exhaustive elementary-box counting."""
    x = np.asarray(points, dtype=np.float64)
    n, d = x.shape
    m = _log2_exact(n)
    if m > MAX_COUNT_M or d > MAX_COUNT_D:
        raise ValueError(f"box counting is limited to m <= {MAX_COUNT_M}, d <= {MAX_COUNT_D}")
    ints = np.floor(x * (1 << m)).astype(np.int64)
    failing = None
    for t in range(m + 1):
        share = 1 << t
        for k in compositions(m - t, d):
            counts = _box_counts(ints, m, k)
            bad = np.flatnonzero(counts != share)
            if bad.size:
                failing = (k, int(bad[0]), int(counts[bad[0]]))
                break
        else:
            if t == 0:
                return TValueResult(0, m, d, method="count")
            k, key, count = failing
            return TValueResult(t, m, d, k, _decode(key, k), count, "count")
    raise AssertionError("unreachable: t = m always holds")


def t_value(net: DigitalSpec | np.ndarray, m: int | None = None, method: str = "auto") -> TValueResult:
    """t-value of a digital net given as generating matrices or as ``2**m`` points.

    For a :class:`DigitalSpec` the rank route is always run; when ``m`` and
    ``d`` are small enough the counting route is run as well and the two
    must agree.  Point input (e.g. a randomized net) uses counting only.
    """
    if isinstance(net, DigitalSpec):
        if m is None:
            raise ValueError("m is required for generating-matrix input")
        rank = t_value_rank(net, m)
        if method == "rank" or (method == "auto" and (m > MAX_COUNT_M or net.d > MAX_COUNT_D)):
            return rank
        count = t_value_count(digital_points(net, 1 << m))
        if count.t != rank.t or count.witness_k != rank.witness_k:
            raise RuntimeError(f"rank route gives t={rank.t}, counting route t={count.t}")
        return count if method in ("auto", "count") else rank
    x = np.asarray(net, dtype=np.float64)
    if m is not None and x.shape[0] != 1 << m:
        raise ValueError(f"expected 2^{m} points, got {x.shape[0]}")
    if method == "rank":
        raise ValueError("the rank route needs generating matrices")
    return t_value_count(x)
