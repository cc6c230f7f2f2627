"""Component-by-component construction of rank-1 lattice generating vectors.

The figure of merit is the shift-averaged (root mean squared) discrepancy of
the lattice, as computed by :func:`discrepancy.discrepancy_lattice_fast`.
Because that kernel is a product, the per-point product over the components
already fixed is kept, and each candidate for the next component costs O(n).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .discrepancy import KernelSpec, double_integral
from .randomize import random_lattice_spec, shift_mod1
from .seqgen import LatticeSpec, lattice_points

_CHUNK = 1 << 22  # candidate x point entries evaluated at once


@dataclass(frozen=True)
class CbcConfig:
    """Search setup.

    ``candidates=None`` means the odd integers in ``[1, n - 1]``.  With
    ``exclude_used`` a value already chosen for an earlier component is not
    offered again.
    """

    n: int
    d: int
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec("weighted_centered"))
    candidates: tuple[int, ...] | None = None
    exclude_used: bool = False

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError(f"n={self.n} is not a power of 2")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.candidates is not None:
            cand = tuple(sorted({int(c) for c in self.candidates}))
            if not cand:
                raise ValueError("empty candidate set")
            if cand[0] < 1 or cand[-1] >= self.n:
                raise ValueError("candidates must lie in [1, n - 1]")
            object.__setattr__(self, "candidates", cand)

    def candidate_array(self) -> np.ndarray:
        if self.candidates is None:
            return np.arange(1, self.n, 2, dtype=np.int64)
        return np.asarray(self.candidates, dtype=np.int64)


@dataclass(frozen=True)
class CbcResult:
    spec: LatticeSpec
    trace: tuple[float, ...]
    evaluations: int

    @property
    def h(self) -> tuple[int, ...]:
        return self.spec.h


def _foms(cands: np.ndarray, prod: np.ndarray, n: int, g2: float, base: float) -> np.ndarray:
    """Squared figure of merit for each candidate given the running product."""
    i = np.arange(n, dtype=np.int64)
    out = np.empty(cands.size)
    step = max(1, _CHUNK // n)
    for lo in range(0, cands.size, step):
        c = cands[lo : lo + step]
        x = ((c[:, None] * i[None, :]) % n) / n
        out[lo : lo + step] = ((1.0 + g2 * (x - 0.5) ** 2) * prod).sum(axis=1) / n - base
    return out


def cbc_search(config: CbcConfig, m_max: int = 32) -> CbcResult:
    """Greedy search; ties go to the smallest candidate.

    The returned trace holds the minimized discrepancy after each component.
    """
    n, d = config.n, config.d
    kern = config.kernel.filtered(d)
    g2 = kern.gamma2(d)
    if n > 2 ** m_max:
        m_max = n.bit_length() - 1
    i = np.arange(n, dtype=np.int64)
    prod = 1.0 + g2[0] * (i / n - 0.5) ** 2
    h = [1]
    trace = [math.sqrt(max(math.fsum(prod) / n - double_integral(kern, 1), 0.0))]
    all_cands = config.candidate_array()
    evaluations = 0
    for j in range(1, d):
        cands = all_cands
        if config.exclude_used:
            cands = cands[~np.isin(cands, h)]
            if cands.size == 0:
                raise ValueError(f"no unused candidate left for component {j + 1}")
        foms = _foms(cands, prod, n, g2[j], double_integral(kern, j + 1))
        evaluations += cands.size
        best = int(np.argmin(foms))  # first minimum, candidates ascending
        c = int(cands[best])
        h.append(c)
        prod = prod * (1.0 + g2[j] * (((c * i) % n) / n - 0.5) ** 2)
        trace.append(math.sqrt(max(math.fsum(prod) / n - double_integral(kern, j + 1), 0.0)))
    return CbcResult(LatticeSpec(tuple(h), 2, m_max), tuple(trace), evaluations)


def random_generator_estimates(d: int, n: int, r: int, integrand, seed: int = 0) -> np.ndarray:
    """Sample means from ``r`` random generating vectors, each with its own random shift."""
    out = np.empty(r)
    for k in range(r):
        s = _rng.child_seed(seed, "replication", k)
        spec = random_lattice_spec(d, n, s)
        x = shift_mod1(lattice_points(spec, n), s)
        y = np.asarray(integrand(x), dtype=np.float64)
        out[k] = math.fsum(y) / n
    return out


def median_of_random_generators(d: int, n: int, r: int, integrand, seed: int = 0) -> float:
    """Median of ``r`` (odd) randomized lattice estimates with random generators."""
    if r < 1 or r % 2 == 0:
        raise ValueError("r must be a positive odd number")
    return float(np.median(random_generator_estimates(d, n, r, integrand, seed)))
