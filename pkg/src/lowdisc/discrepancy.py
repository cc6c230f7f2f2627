"""Kernel discrepancies of point sets.

Three kernel families are supported, all products over coordinates with
weights ``gamma``:

``centered``
    ``1 + (|t-1/2| + |x-1/2| - |t-x|) / 2`` per coordinate (all weights 1).
``weighted_centered``
    the same bracket scaled by ``gamma_l**2``.
``shift_invariant``
    the weighted centered kernel averaged over all shifts modulo 1,
    ``1 + gamma_l**2 * ((t-x mod 1) - 1/2)**2`` per coordinate.

The squared discrepancy is ``double integral - 2/n * sum of single
integrals + 1/n^2 * kernel sum``; the integrals are in closed form for all
three families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _rng

FAMILIES = ("centered", "weighted_centered", "shift_invariant")

_BLOCK = 256


class ClosureError(ValueError):
    """Point set is not closed under addition modulo 1."""


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus coordinate weights.

    ``weights=None`` means ``gamma_l = 1/l`` for the weighted families and
    all ones for ``centered``.
    """

    family: str = "centered"
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.weights is not None:
            w = tuple(float(g) for g in self.weights)
            object.__setattr__(self, "weights", w)
            if any(not g > 0 for g in w):
                raise ValueError("coordinate weights must be positive")
            if self.family == "centered" and any(g != 1.0 for g in w):
                raise ValueError("the centered kernel has unit weights; use weighted_centered")

    def gamma2(self, d: int) -> np.ndarray:
        """Squared weights for the first ``d`` coordinates."""
        if self.family == "centered":
            return np.ones(d)
        if self.weights is None:
            return 1.0 / np.arange(1, d + 1) ** 2
        if len(self.weights) < d:
            raise ValueError(f"{len(self.weights)} weights given for d={d}")
        return np.asarray(self.weights[:d]) ** 2

    def filtered(self, d: int) -> "KernelSpec":
        """Shift-averaged version of this kernel for ``d`` coordinates."""
        if self.family == "shift_invariant":
            return self
        return KernelSpec("shift_invariant", tuple(np.sqrt(self.gamma2(d))))


@dataclass(frozen=True)
class DiscrepancyResult:
    value: float
    scaled: float
    n: int
    d: int
    kernel: KernelSpec

    @property
    def squared(self) -> float:
        return self.value ** 2


def _factors(kernel: KernelSpec, t: np.ndarray, x: np.ndarray, g2: np.ndarray) -> np.ndarray:
    if kernel.family == "shift_invariant":
        u = np.mod(t - x, 1.0)
        return 1.0 + g2 * (u - 0.5) ** 2
    return 1.0 + 0.5 * g2 * (np.abs(t - 0.5) + np.abs(x - 0.5) - np.abs(t - x))


def kernel_eval(kernel: KernelSpec, t: Sequence[float], x: Sequence[float]) -> float:
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if t.shape != x.shape:
        raise ValueError(f"dimension mismatch: {t.shape} vs {x.shape}")
    return float(np.prod(_factors(kernel, t, x, kernel.gamma2(t.size))))


def gram_matrix(kernel: KernelSpec, points: np.ndarray) -> np.ndarray:
    x = np.asarray(points, dtype=np.float64)
    g2 = kernel.gamma2(x.shape[1])
    return np.prod(_factors(kernel, x[:, None, :], x[None, :, :], g2), axis=2)


def double_integral(kernel: KernelSpec, d: int) -> float:
    """Integral of the kernel over the unit cube squared."""
    return float(np.prod(1.0 + kernel.gamma2(d) / 12.0))


def diagonal_integral(kernel: KernelSpec, d: int) -> float:
    """Integral of ``K(x, x)`` over the unit cube."""
    return float(np.prod(1.0 + kernel.gamma2(d) / 4.0))


def single_integrals(kernel: KernelSpec, points: np.ndarray) -> np.ndarray:
    """``int K(t, x_i) dt`` for every point."""
    x = np.asarray(points, dtype=np.float64)
    g2 = kernel.gamma2(x.shape[1])
    if kernel.family == "shift_invariant":
        return np.full(x.shape[0], double_integral(kernel, x.shape[1]))
    c = np.abs(x - 0.5)
    return np.prod(1.0 + 0.5 * g2 * (c - c * c), axis=1)


def kernel_sum(kernel: KernelSpec, points: np.ndarray) -> float:
    """``sum_{i,j} K(x_i, x_j)`` with a fixed blocked summation order."""
    x = np.asarray(points, dtype=np.float64)
    n, d = x.shape
    g2 = kernel.gamma2(d)
    partial = []
    for lo in range(0, n, _BLOCK):
        blk = x[lo : lo + _BLOCK]
        prod = np.ones((blk.shape[0], n))
        for l in range(d):
            prod *= _factors(kernel, blk[:, l, None], x[None, :, l], g2[l])
        partial.append(prod.sum())
    return float(math.fsum(partial))


def empty_discrepancy(d: int, kernel: KernelSpec) -> float:
    return math.sqrt(double_integral(kernel, d))


def discrepancy_naive(points: np.ndarray, kernel: KernelSpec = KernelSpec()) -> DiscrepancyResult:
    """Kernel discrepancy by the direct O(d n^2) formula."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("points must be an (n, d) array")
    n, d = x.shape
    total = double_integral(kernel, d)
    if n:
        total -= 2.0 / n * math.fsum(single_integrals(kernel, x))
        total += kernel_sum(kernel, x) / n ** 2
    value = math.sqrt(max(total, 0.0))
    return DiscrepancyResult(value, value / empty_discrepancy(d, kernel), n, d, kernel)


def filtered_kernel(kernel: KernelSpec, points: np.ndarray) -> np.ndarray:
    """Shift-averaged kernel ``prod_l [1 + gamma_l^2 (1/4 - x_l (1 - x_l))]`` at each point."""
    x = np.asarray(points, dtype=np.float64)
    g2 = kernel.gamma2(x.shape[1])
    return np.prod(1.0 + g2 * (0.25 - x * (1.0 - x)), axis=1)


def check_closure(points: np.ndarray, pairs: int | None = 8, seed: int = 0) -> None:
    """Raise :class:`ClosureError` unless the set is a group under addition mod 1.

    ``pairs=None`` checks every pair; otherwise ``pairs`` random pairs are
    spot-checked.
    """
    x = np.asarray(points, dtype=np.float64)
    n = x.shape[0]
    scaled = x * n
    ints = np.rint(scaled).astype(np.int64)
    if not np.allclose(scaled, ints, atol=1e-9 * n):
        raise ClosureError("coordinates are not multiples of 1/n")
    members = {tuple(r) for r in ints % n}
    if len(members) != n:
        raise ClosureError("repeated points")
    if pairs is None:
        it = ((i, j) for i in range(n) for j in range(i, n))
    else:
        gen = _rng.stream(seed, "pilot", n)
        it = zip(gen.integers(0, n, pairs), gen.integers(0, n, pairs))
    for i, j in it:
        if tuple((ints[i] + ints[j]) % n) not in members:
            raise ClosureError(f"x_{i} + x_{j} mod 1 is not in the set")


def discrepancy_lattice_fast(
    points: np.ndarray, kernel: KernelSpec = KernelSpec("weighted_centered"), check: str = "spot"
) -> DiscrepancyResult:
    """Root mean squared discrepancy of a randomly shifted lattice, in O(d n).

    ``points`` must be an unshifted lattice (closed under addition mod 1).
    The value equals the discrepancy of the unshifted set under the
    shift-invariant kernel.  ``check`` is ``"spot"``, ``"full"`` or ``"none"``.
    """
    x = np.asarray(points, dtype=np.float64)
    n, d = x.shape
    if n == 0:
        raise ValueError("empty point set")
    if check != "none":
        check_closure(x, None if check == "full" else 8)
    si = kernel.filtered(d)
    sq = math.fsum(filtered_kernel(si, x)) / n - double_integral(si, d)
    value = math.sqrt(max(sq, 0.0))
    return DiscrepancyResult(value, value / empty_discrepancy(d, si), n, d, si)


def discrepancy_iid_rms(n: int, d: int, kernel: KernelSpec = KernelSpec()) -> float:
    """Root mean squared discrepancy of ``n`` IID uniform points."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt((diagonal_integral(kernel, d) - double_integral(kernel, d)) / n)
