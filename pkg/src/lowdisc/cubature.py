"""Sample means, variable transforms, the Keister test integrand and stopping rules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _rng
from .randomize import RandomizeSpec
from .sampling import RANDOMIZE_ALIASES, replication_samplers
from .stats import norm_ppf, student_t_ppf

KEISTER_D6 = -2.327303729298


class IntegrandError(ArithmeticError):
    """The integrand returned a non-finite value."""

    def __init__(self, index: int, value: float, label: str = ""):
        self.index, self.value = index, value
        name = f"integrand {label}" if label else "integrand"
        super().__init__(f"{name} returned {value} at point {index}")


@dataclass(frozen=True)
class Integrand:
    """A function on ``[0, 1)^d`` evaluated row-wise on ``(n, d)`` arrays."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    d: int
    label: str = ""

    def __call__(self, points: np.ndarray) -> np.ndarray:
        x = np.asarray(points, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ValueError(f"{self.label or 'integrand'} expects (n, {self.d}) points, got {x.shape}")
        y = np.asarray(self.evaluate(x), dtype=np.float64).reshape(x.shape[0])
        return y


def _checked(y: np.ndarray, label: str) -> np.ndarray:
    bad = ~np.isfinite(y)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise IntegrandError(i, float(y[i]), label)
    return y


def sample_mean(integrand: Integrand, points: np.ndarray) -> float:
    """Mean of the integrand over ``points``, summed exactly in index order."""
    y = _checked(integrand(points), integrand.label)
    if y.size == 0:
        raise ValueError("no points")
    return math.fsum(y) / y.size


def gaussian_inv_cdf(u):
    """Inverse of the standard normal CDF; 0 and 1 are rejected."""
    return norm_ppf(u)


@dataclass(frozen=True)
class TransformSpec:
    """Map from the unit cube onto the domain of a function ``g``.

    ``gaussian_inv_cdf`` sends ``x`` to ``scale * Phi^{-1}(x)``, i.e. onto
    ``N(0, scale^2 I)``; composing ``g`` with it gives an integrand whose
    mean over the unit cube is ``E[g(T)]`` for that Gaussian ``T``.
    """

    kind: str = "identity"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("identity", "gaussian_inv_cdf"):
            raise ValueError(f"unknown transform {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return np.asarray(x, dtype=np.float64)
        return self.scale * gaussian_inv_cdf(x)

    def compose(self, g: Callable[[np.ndarray], np.ndarray], d: int, label: str = "") -> Integrand:
        return Integrand(lambda x: g(self.apply(x)), d, label)


def keister_integrand(d: int) -> Integrand:
    """``pi^{d/2} cos(|Phi^{-1}(x)| / sqrt 2)``, whose mean is the Keister integral."""
    if d < 1:
        raise ValueError("d must be >= 1")
    c = math.pi ** (d / 2)
    to_gauss = TransformSpec("gaussian_inv_cdf", 1.0 / math.sqrt(2.0))

    def f(t):
        return c * np.cos(np.sqrt(np.sum(t * t, axis=1)))

    return to_gauss.compose(f, d, f"keister{d}")


_GL = {k: np.polynomial.legendre.leggauss(k) for k in (10, 20)}


def _gauss(f, a: float, b: float, k: int) -> float:
    nodes, weights = _GL[k]
    half = 0.5 * (b - a)
    return half * float(np.dot(weights, f(a + half * (nodes + 1.0))))


def adaptive_quad(f, a: float, b: float, tol: float = 1e-13, depth: int = 50) -> float:
    """Adaptive Gauss-Legendre quadrature by bisection (10- vs 20-point rules)."""
    stack = [(a, b, tol, 0)]
    total = []
    while stack:
        lo, hi, eps, lvl = stack.pop()
        fine = _gauss(f, lo, hi, 20)
        if abs(fine - _gauss(f, lo, hi, 10)) <= eps or lvl >= depth:
            total.append(fine)
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, eps / 2, lvl + 1))
            stack.append((lo, mid, eps / 2, lvl + 1))
    return math.fsum(total)


def keister_reference(d: int) -> float:
    """Keister integral in ``d`` dimensions from its radial form."""
    if not 1 <= d <= 12:
        raise ValueError("keister_reference supports 1 <= d <= 12")
    R = 1.0
    while math.exp(-R * R) * R ** (d - 1) >= 1e-16:
        R += 0.5
    radial = adaptive_quad(lambda r: np.cos(r) * np.exp(-r * r) * r ** (d - 1), 0.0, R)
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2) * radial


def estimate_with_control(f: Integrand, f_ctrl: Integrand, points: np.ndarray) -> float:
    """Sample mean of ``f - f_ctrl``; ``f_ctrl`` must integrate to zero."""
    if f.d != f_ctrl.d:
        raise ValueError("integrand and control variate differ in dimension")
    residual = Integrand(lambda x: f(x) - f_ctrl(x), f.d, f"{f.label}-ctrl")
    return sample_mean(residual, points)


# --------------------------------------------------------------------------
# stopping criteria

@dataclass(frozen=True)
class StopResult:
    estimate: float
    half_width: float
    n: int
    replications: int
    evaluations: int
    eps: float
    alpha: float
    guaranteed: bool = True
    n_pilot: int = 0
    history: tuple = field(default=(), repr=False)

    @property
    def interval(self) -> tuple[float, float]:
        return self.estimate - self.half_width, self.estimate + self.half_width


def clt_sample_size(std: float, eps: float, alpha: float, inflation: float = 1.0) -> int:
    """Smallest ``n`` with ``n >= (2 z_{1-alpha/2} * inflation * std / eps)^2``."""
    z = norm_ppf(1.0 - alpha / 2.0)
    return max(1, math.ceil((2.0 * z * inflation * std / eps) ** 2))


def stop_clt_iid(
    integrand: Integrand,
    eps: float,
    alpha: float = 0.05,
    n0: int = 1024,
    inflation: float = 1.2,
    seed: int = 0,
    n_max: int = 2 ** 30,
) -> StopResult:
    """Two-stage IID rule: a pilot sample sizes one fresh final sample."""
    if not eps > 0 or not 0 < alpha < 1 or n0 < 2:
        raise ValueError("need eps > 0, 0 < alpha < 1 and n0 >= 2")
    pilot = _rng.stream(seed, "pilot").random((n0, integrand.d))
    y = _checked(integrand(pilot), integrand.label)
    std = float(np.std(y, ddof=1))
    n = clt_sample_size(std, eps, alpha, inflation) if std > 0 else n0
    n = max(n, n0) if std > 0 else n0
    guaranteed = n <= n_max
    n = min(n, n_max)
    final = _rng.stream(seed, "iid").random((n, integrand.d))
    est = sample_mean(integrand, final)
    if std == 0.0:
        half = 0.0
    elif guaranteed:
        half = eps
    else:
        half = norm_ppf(1.0 - alpha / 2.0) * inflation * std / math.sqrt(n)
    return StopResult(est, half, n, 1, n, eps, alpha, guaranteed, n0)


def stop_qmc_clt(
    integrand: Integrand,
    eps: float,
    alpha: float = 0.05,
    R: int = 15,
    n_init: int = 2 ** 8,
    n_max: int = 2 ** 20,
    family: str = "sobol",
    randomize: str = "digital_shift",
    seed: int = 0,
    **sampler_kw,
) -> StopResult:
    """Replicated randomized-qMC rule with Student-t intervals and doubling.

    Each of the ``R`` randomized streams is extended from ``n`` to ``2n``
    points per stage; earlier evaluations are kept, so the integrand is
    called exactly ``n_final * R`` times.
    """
    if R < 2:
        raise ValueError("need at least two replications")
    if n_init < 1 or n_init & (n_init - 1):
        raise ValueError("n_init must be a power of 2")
    kind = RANDOMIZE_ALIASES.get(randomize, randomize)
    if kind == "none" and family != "iid":
        raise ValueError("replicated intervals need a randomized sequence")
    RandomizeSpec(kind).check_family(family)
    tq = student_t_ppf(1.0 - alpha / 2.0, R - 1)
    samplers = replication_samplers(family, integrand.d, kind, seed, R, **sampler_kw)
    sums = [[] for _ in range(R)]
    n_done, n = 0, n_init
    history = []
    while True:
        for r, smp in enumerate(samplers):
            y = _checked(integrand(smp.points(n - n_done, n_done)), integrand.label)
            sums[r].append(math.fsum(y))
        n_done = n
        means = np.array([math.fsum(s) / n for s in sums])
        est = math.fsum(means) / R
        std = float(np.std(means, ddof=1))
        half = tq * std / math.sqrt(R)
        history.append((n, est, half))
        if half <= eps:
            return StopResult(est, half, n, R, n * R, eps, alpha, True, 0, tuple(history))
        if 2 * n > n_max:
            return StopResult(est, half, n, R, n * R, eps, alpha, False, 0, tuple(history))
        n *= 2
