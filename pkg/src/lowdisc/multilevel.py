"""Multilevel quasi-Monte Carlo: telescoping estimator, allocation and cost bounds.

Level ``l`` integrates the correction ``f_l(x) - f_{l-1}(x[:d_{l-1}])`` over
``[0, 1)^{d_l}`` with its own randomized point set, so consecutive levels are
coupled through the shared coordinate prefix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _rng
from .discrepancy import KernelSpec, discrepancy_naive
from .sampling import Sampler

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LevelStack:
    dims: tuple[int, ...]
    funcs: tuple[Func, ...]
    costs: tuple[float, ...]
    V: tuple[float, ...] | None = None
    label: str = ""
    seminorms: tuple[float, ...] | None = None

    def __post_init__(self):
        L = len(self.dims)
        if L == 0 or len(self.funcs) != L or len(self.costs) != L:
            raise ValueError("dims, funcs and costs must have the same nonzero length")
        if any(a >= b for a, b in zip(self.dims, self.dims[1:])) or self.dims[0] < 1:
            raise ValueError("level dimensions must be positive and strictly increasing")
        if any(not c > 0 for c in self.costs):
            raise ValueError("level costs must be positive")
        if self.V is not None and (len(self.V) != L or any(not v > 0 for v in self.V)):
            raise ValueError("need one positive V per level")
        if self.seminorms is not None and (len(self.seminorms) != L or any(v < 0 for v in self.seminorms)):
            raise ValueError("need one nonnegative semi-norm per level")

    @property
    def L(self) -> int:
        return len(self.dims)

    def correction(self, l: int, x: np.ndarray) -> np.ndarray:
        """``f_l(x) - f_{l-1}`` on the prefix, for 0-based level ``l``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dims[l]:
            raise ValueError(f"level {l + 1} needs (n, {self.dims[l]}) points, got {x.shape}")
        y = np.asarray(self.funcs[l](x), dtype=np.float64)
        if l:
            y = y - np.asarray(self.funcs[l - 1](x[:, : self.dims[l - 1]]), dtype=np.float64)
        return y


@dataclass(frozen=True)
class Allocation:
    n: tuple[int, ...]
    total_cost: float
    predicted_error: float
    continuous_cost: float


def optimal_allocation(V: Sequence[float], C: Sequence[float], eps: float) -> Allocation:
    """Sample counts minimizing cost subject to ``sum V_l / n_l <= eps``.

    ``n_l = ceil(sqrt(V_l / C_l) * sum_k sqrt(V_k C_k) / eps)``; the unrounded
    cost is ``(sum_k sqrt(V_k C_k))**2 / eps``.
    """
    V = [float(v) for v in V]
    C = [float(c) for c in C]
    if len(V) != len(C) or not V:
        raise ValueError("V and C must be nonempty and of equal length")
    if any(not v > 0 for v in V) or any(not c > 0 for c in C) or not eps > 0:
        raise ValueError("V, C and eps must be positive")
    s = math.fsum(math.sqrt(v * c) for v, c in zip(V, C))
    n = tuple(math.ceil(math.sqrt(v) * s / (eps * math.sqrt(c))) for v, c in zip(V, C))
    err = math.fsum(v / k for v, k in zip(V, n))
    if err > eps * (1 + 1e-12):
        raise ArithmeticError("rounded allocation violates the error target")
    return Allocation(n, math.fsum(k * c for k, c in zip(n, C)), err, s * s / eps)


def _level_sampler(stack: LevelStack, l: int, family: str, randomize: str, seed: int, **kw) -> Sampler:
    return Sampler(family, stack.dims[l], randomize, _rng.child_seed(seed, "level", l), **kw)


def ml_estimate(
    stack: LevelStack,
    allocation: Allocation | Sequence[int],
    family: str = "sobol",
    randomize: str = "digital-shift",
    seed: int = 0,
    **sampler_kw,
) -> float:
    """Telescoping sum of per-level sample means of the corrections."""
    n = allocation.n if isinstance(allocation, Allocation) else tuple(allocation)
    if len(n) != stack.L:
        raise ValueError("allocation length differs from the number of levels")
    means = []
    for l, nl in enumerate(n):
        x = _level_sampler(stack, l, family, randomize, seed, **sampler_kw).points(int(nl))
        y = stack.correction(l, x)
        if not np.all(np.isfinite(y)):
            raise ArithmeticError(f"non-finite correction on level {l + 1}")
        means.append(math.fsum(y) / nl)
    return math.fsum(means)


def estimate_level_variation(
    stack: LevelStack,
    family: str = "sobol",
    randomize: str = "digital-shift",
    seed: int = 0,
    n_pilot: int = 64,
    reps: int = 8,
) -> tuple[float, ...]:
    """Per-level constants ``V_l`` such that ``V_l / n`` bounds the level error at ``n`` points.

    Supplied ``stack.V`` is returned as is.  If the stack knows the
    centered-kernel semi-norms of its corrections, ``V_l`` is ``n_pilot``
    times the root mean square centered discrepancy of ``reps`` randomized
    pilot sets times that semi-norm (a discrepancy times variation bound).
    Otherwise a black-box heuristic is used: ``n_pilot`` times the half-range
    of ``reps`` randomized pilot correction means.  Pilot evaluations are not
    reused by :func:`ml_estimate`.
    """
    if stack.V is not None:
        return stack.V
    out = []
    for l in range(stack.L):
        pilots = [
            Sampler(family, stack.dims[l], randomize, _rng.child_seed(seed, "pilot", l, r)).points(n_pilot)
            for r in range(reps)
        ]
        if stack.seminorms is not None:
            disc = [discrepancy_naive(x, KernelSpec("centered")).value for x in pilots]
            v = n_pilot * math.sqrt(math.fsum(D * D for D in disc) / reps) * stack.seminorms[l]
        else:
            vals = [math.fsum(stack.correction(l, x)) / n_pilot for x in pilots]
            v = n_pilot * 0.5 * (max(vals) - min(vals))
        out.append(max(v, np.finfo(float).tiny))
    return tuple(out)


@dataclass(frozen=True)
class CostRegime:
    bound: float
    favorable: bool
    asymptotic_bound: float


def cost_regime_report(d1: float, r: float, alpha: float, beta: float, L: int, eps: float) -> CostRegime:
    """Cost bound when ``C_l <= alpha d1^l`` and ``V_l <= beta r^-l``.

    With ``q = d1 / r`` the bound is
    ``alpha beta (sqrt q - q^{(L+1)/2})^2 / (eps (1 - sqrt q)^2)``.  When
    ``r > d1`` it stays below ``alpha beta d1 / (r eps (1 - sqrt q)^2)`` for
    every ``L``; otherwise it grows like ``q^L`` and the asymptotic bound is
    infinite.
    """
    if min(d1, r, alpha, beta, eps) <= 0 or L < 1:
        raise ValueError("d1, r, alpha, beta, eps must be positive and L >= 1")
    if r == d1:
        raise ValueError("r == d1 makes the geometric sum degenerate")
    q = d1 / r
    sq = math.sqrt(q)
    bound = alpha * beta * (sq - q ** ((L + 1) / 2)) ** 2 / (eps * (1 - sq) ** 2)
    favorable = r > d1
    asym = alpha * beta * d1 / (r * eps * (1 - sq) ** 2) if favorable else math.inf
    return CostRegime(bound, favorable, asym)


def analytic_stack() -> LevelStack:
    """Two levels: ``f_1 = x_1`` on one coordinate, ``f_2 = x_1 + x_1 x_2``; mean 3/4."""
    return LevelStack(
        dims=(1, 2),
        funcs=(lambda x: x[:, 0], lambda x: x[:, 0] + x[:, 0] * x[:, 1]),
        costs=(1.0, 2.0),
        label="analytic",
        # centered-kernel semi-norms of x_1 and of x_1 x_2: sqrt(1) and sqrt(1/4 + 1/4 + 1)
        seminorms=(1.0, math.sqrt(1.5)),
    )


ANALYTIC_MEAN = 0.75
