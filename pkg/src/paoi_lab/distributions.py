"""Service-time distribution catalog.

Every member exposes the handful of integral primitives the peak-age
formulas consume: the CDF/survival pair, the truncated first moment
``E[X 1{X <= theta}]``, the integrated CDF ``int_0^theta F``, the
conditional residual ``E[X - theta | X > theta]``, a generalized-inverse
quantile, and seeded sampling.

Conventions
-----------
* All Stieltjes integrals over ``[0, theta]`` are right-closed: an atom
  sitting exactly at ``theta`` contributes fully, matching the
  right-continuous CDF.
* An infinite mean is the float ``inf`` (IEEE infinity, not a sentinel);
  arithmetic on it stays total.
* ``sample`` uses the inverse-CDF transform wherever the catalog member
  has a usable inverse and standard transforms otherwise; a fixed seed
  reproduces the draw sequence bit for bit.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import gammainc, gammaincc, gammaincinv, ndtr, ndtri

from .errors import DegenerateCondition

__all__ = [
    "ServiceDistribution",
    "Exponential",
    "Erlang",
    "Pareto",
    "ShiftedExponential",
    "TwoPoint",
    "HyperExponential",
    "LogNormal",
    "Deterministic",
]

# Quadrature settings for the one catalog member without closed forms.
_QUAD_ABS_TOL = 1e-10
_QUAD_MAX_PANELS = 10_000


class ServiceDistribution(ABC):
    """A nonnegative service-time law with the primitives PAoI formulas need."""

    @abstractmethod
    def cdf(self, x: float) -> float:
        """P(X <= x), right-continuous."""

    @abstractmethod
    def sf(self, x: float) -> float:
        """P(X > x), computed directly for tail accuracy."""

    @abstractmethod
    def support_min(self) -> float:
        """Infimum of the support (smallest atom for discrete kinds)."""

    @abstractmethod
    def mean(self) -> float:
        """E[X]; ``inf`` when the integral diverges."""

    @abstractmethod
    def truncated_first_moment(self, theta: float) -> float:
        """E[X 1{X <= theta}]; atoms at or below ``theta`` count fully."""

    @abstractmethod
    def integrated_cdf(self, theta: float) -> float:
        """int_0^theta F(x) dx."""

    @abstractmethod
    def quantile(self, q: float) -> float:
        """Generalized inverse inf{x : F(x) >= q} for 0 < q < 1."""

    @abstractmethod
    def sample_batch(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. service times."""

    def conditional_residual(self, theta: float) -> float:
        """E[X - theta | X > theta].

        Returns ``inf`` when the mean diverges.  Raises
        :class:`DegenerateCondition` when P(X > theta) = 0.
        """
        tail = self.sf(theta)
        if tail <= 0.0:
            raise DegenerateCondition(
                f"P(X > {theta}) = 0; the residual conditioning event is null"
            )
        m = self.mean()
        if math.isinf(m):
            return math.inf
        return (m - self.truncated_first_moment(theta)) / tail - theta

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.sample_batch(rng, 1)[0])


@dataclass(frozen=True)
class Exponential(ServiceDistribution):
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", float(self.rate))
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def cdf(self, x):
        return -math.expm1(-self.rate * x) if x > 0 else 0.0

    def sf(self, x):
        return math.exp(-self.rate * x) if x > 0 else 1.0

    def support_min(self):
        return 0.0

    def mean(self):
        return 1.0 / self.rate

    def truncated_first_moment(self, theta):
        if theta <= 0:
            return 0.0
        u = self.rate * theta
        return (-math.expm1(-u) - u * math.exp(-u)) / self.rate

    def integrated_cdf(self, theta):
        if theta <= 0:
            return 0.0
        return theta + math.expm1(-self.rate * theta) / self.rate

    def conditional_residual(self, theta):
        # memoryless: the residual never depends on theta
        return 1.0 / self.rate

    def quantile(self, q):
        return -math.log1p(-q) / self.rate

    def sample_batch(self, rng, n):
        return -np.log1p(-rng.random(n)) / self.rate


@dataclass(frozen=True)
class Erlang(ServiceDistribution):
    shape: int
    rate: float

    def __post_init__(self):
        if self.shape < 1 or self.shape != int(self.shape):
            raise ValueError("shape must be a positive integer")
        object.__setattr__(self, "shape", int(self.shape))
        object.__setattr__(self, "rate", float(self.rate))
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def cdf(self, x):
        return float(gammainc(self.shape, self.rate * x)) if x > 0 else 0.0

    def sf(self, x):
        return float(gammaincc(self.shape, self.rate * x)) if x > 0 else 1.0

    def support_min(self):
        return 0.0

    def mean(self):
        return self.shape / self.rate

    def truncated_first_moment(self, theta):
        # x f_k(x) = (k/rate) f_{k+1}(x), so the truncated moment is a
        # higher-shape CDF evaluation.
        if theta <= 0:
            return 0.0
        return self.mean() * float(gammainc(self.shape + 1, self.rate * theta))

    def integrated_cdf(self, theta):
        # int_0^t Fbar = sum_{j=1}^{k} P(j, rate*t)/rate, hence
        # int_0^t F = t minus that sum.
        if theta <= 0:
            return 0.0
        u = self.rate * theta
        s = sum(float(gammainc(j, u)) for j in range(1, self.shape + 1))
        return theta - s / self.rate

    def quantile(self, q):
        return float(gammaincinv(self.shape, q)) / self.rate

    def sample_batch(self, rng, n):
        return rng.gamma(self.shape, 1.0 / self.rate, size=n)


@dataclass(frozen=True)
class Pareto(ServiceDistribution):
    """Pareto law on ``[xm, inf)`` with tail index ``alpha``.

    The mean is infinite for ``alpha <= 1``; every operation stays total
    in that regime.
    """

    xm: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "xm", float(self.xm))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.xm <= 0 or self.alpha <= 0:
            raise ValueError("xm and alpha must be positive")

    def cdf(self, x):
        if x < self.xm:
            return 0.0
        return -math.expm1(self.alpha * math.log(self.xm / x))

    def sf(self, x):
        if x < self.xm:
            return 1.0
        return (self.xm / x) ** self.alpha

    def support_min(self):
        return self.xm

    def mean(self):
        if self.alpha <= 1.0:
            return math.inf
        return self.alpha * self.xm / (self.alpha - 1.0)

    def truncated_first_moment(self, theta):
        if theta < self.xm:
            return 0.0
        a, xm = self.alpha, self.xm
        if a == 1.0:
            return xm * math.log(theta / xm)
        return (a / (a - 1.0)) * xm * (1.0 - (xm / theta) ** (a - 1.0))

    def integrated_cdf(self, theta):
        if theta <= self.xm:
            return 0.0
        a, xm = self.alpha, self.xm
        if a == 1.0:
            return (theta - xm) - xm * math.log(theta / xm)
        return (theta - xm) + (xm / (a - 1.0)) * ((xm / theta) ** (a - 1.0) - 1.0)

    def conditional_residual(self, theta):
        if self.alpha <= 1.0:
            return math.inf
        if theta < self.xm:
            return self.mean() - theta
        return theta / (self.alpha - 1.0)

    def quantile(self, q):
        return self.xm * math.exp(-math.log1p(-q) / self.alpha)

    def sample_batch(self, rng, n):
        return self.xm * np.exp(-np.log1p(-rng.random(n)) / self.alpha)


@dataclass(frozen=True)
class ShiftedExponential(ServiceDistribution):
    shift: float
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "shift", float(self.shift))
        object.__setattr__(self, "rate", float(self.rate))
        if self.shift < 0:
            raise ValueError("shift must be nonnegative")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def cdf(self, x):
        return -math.expm1(-self.rate * (x - self.shift)) if x > self.shift else 0.0

    def sf(self, x):
        return math.exp(-self.rate * (x - self.shift)) if x > self.shift else 1.0

    def support_min(self):
        return self.shift

    def mean(self):
        return self.shift + 1.0 / self.rate

    def truncated_first_moment(self, theta):
        if theta <= self.shift:
            return 0.0
        tau = theta - self.shift
        u = self.rate * tau
        base = (-math.expm1(-u) - u * math.exp(-u)) / self.rate
        return base + self.shift * (-math.expm1(-u))

    def integrated_cdf(self, theta):
        if theta <= self.shift:
            return 0.0
        tau = theta - self.shift
        return tau + math.expm1(-self.rate * tau) / self.rate

    def conditional_residual(self, theta):
        if theta < self.shift:
            return self.shift - theta + 1.0 / self.rate
        return 1.0 / self.rate

    def quantile(self, q):
        return self.shift - math.log1p(-q) / self.rate

    def sample_batch(self, rng, n):
        return self.shift - np.log1p(-rng.random(n)) / self.rate


@dataclass(frozen=True)
class TwoPoint(ServiceDistribution):
    """Atom at ``t1`` with probability ``p``, atom at ``t2`` otherwise."""

    t1: float
    t2: float
    p: float

    def __post_init__(self):
        for name in ("t1", "t2", "p"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0.0 < self.t1 < self.t2:
            raise ValueError("need 0 < t1 < t2")
        if not 0.0 < self.p < 1.0:
            raise ValueError("need 0 < p < 1")

    def cdf(self, x):
        if x < self.t1:
            return 0.0
        if x < self.t2:
            return self.p
        return 1.0

    def sf(self, x):
        if x < self.t1:
            return 1.0
        if x < self.t2:
            return 1.0 - self.p
        return 0.0

    def support_min(self):
        return self.t1

    def mean(self):
        return self.p * self.t1 + (1.0 - self.p) * self.t2

    def truncated_first_moment(self, theta):
        if theta < self.t1:
            return 0.0
        if theta < self.t2:
            return self.p * self.t1
        return self.mean()

    def integrated_cdf(self, theta):
        if theta <= self.t1:
            return 0.0
        if theta <= self.t2:
            return self.p * (theta - self.t1)
        return self.p * (self.t2 - self.t1) + (theta - self.t2)

    def quantile(self, q):
        return self.t1 if q <= self.p else self.t2

    def sample_batch(self, rng, n):
        return np.where(rng.random(n) <= self.p, self.t1, self.t2)


@dataclass(frozen=True)
class HyperExponential(ServiceDistribution):
    """Mixture of exponentials: phase ``i`` with weight ``w_i`` and rate ``l_i``."""

    rates: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.rates) != len(self.weights) or not self.rates:
            raise ValueError("rates and weights must be nonempty and equal length")
        if any(r <= 0 for r in self.rates) or any(w <= 0 for w in self.weights):
            raise ValueError("rates and weights must be positive")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def sf(self, x):
        if x <= 0:
            return 1.0
        return sum(w * math.exp(-r * x) for w, r in zip(self.weights, self.rates))

    def support_min(self):
        return 0.0

    def mean(self):
        return sum(w / r for w, r in zip(self.weights, self.rates))

    def truncated_first_moment(self, theta):
        if theta <= 0:
            return 0.0
        total = 0.0
        for w, r in zip(self.weights, self.rates):
            u = r * theta
            total += w * (-math.expm1(-u) - u * math.exp(-u)) / r
        return total

    def integrated_cdf(self, theta):
        if theta <= 0:
            return 0.0
        return theta + sum(
            w * math.expm1(-r * theta) / r for w, r in zip(self.weights, self.rates)
        )

    def conditional_residual(self, theta):
        if theta <= 0:
            return self.mean()
        # posterior phase weights given survival past theta
        tails = [w * math.exp(-r * theta) for w, r in zip(self.weights, self.rates)]
        z = sum(tails)
        if z <= 0.0:
            raise DegenerateCondition(f"P(X > {theta}) underflowed to 0")
        return sum(t / r for t, r in zip(tails, self.rates)) / z

    def quantile(self, q):
        hi = -math.log1p(-q) / min(self.rates)
        if hi == 0.0:
            return 0.0
        return float(brentq(lambda x: self.cdf(x) - q, 0.0, hi, xtol=1e-14, rtol=1e-14))

    def sample_batch(self, rng, n):
        cum = np.cumsum(self.weights)
        phase = np.searchsorted(cum, rng.random(n), side="left")
        phase = np.minimum(phase, len(self.rates) - 1)
        rates = np.asarray(self.rates)[phase]
        return -np.log1p(-rng.random(n)) / rates


@dataclass(frozen=True)
class LogNormal(ServiceDistribution):
    """log X ~ Normal(mu, sigma^2).

    No closed form is used for the truncated integrals; both go through
    adaptive Gauss-Kronrod quadrature at absolute tolerance 1e-10.
    """

    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def _z(self, x):
        return (math.log(x) - self.mu) / self.sigma

    def _pdf(self, x):
        if x <= 0:
            return 0.0
        z = self._z(x)
        return math.exp(-0.5 * z * z) / (x * self.sigma * math.sqrt(2.0 * math.pi))

    def cdf(self, x):
        return float(ndtr(self._z(x))) if x > 0 else 0.0

    def sf(self, x):
        return float(ndtr(-self._z(x))) if x > 0 else 1.0

    def support_min(self):
        return 0.0

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def _quad(self, fn, theta):
        scale = math.exp(self.mu)
        points = (scale,) if theta > scale else None
        value, _ = integrate.quad(
            fn, 0.0, theta, points=points, epsabs=_QUAD_ABS_TOL, epsrel=1e-12,
            limit=_QUAD_MAX_PANELS,
        )
        return value

    def truncated_first_moment(self, theta):
        if theta <= 0:
            return 0.0
        return self._quad(lambda x: x * self._pdf(x), theta)

    def integrated_cdf(self, theta):
        if theta <= 0:
            return 0.0
        return self._quad(self.cdf, theta)

    def quantile(self, q):
        return math.exp(self.mu + self.sigma * float(ndtri(q)))

    def sample_batch(self, rng, n):
        return np.exp(self.mu + self.sigma * ndtri(rng.random(n)))


@dataclass(frozen=True)
class Deterministic(ServiceDistribution):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if self.value <= 0:
            raise ValueError("value must be positive")

    def cdf(self, x):
        return 1.0 if x >= self.value else 0.0

    def sf(self, x):
        return 0.0 if x >= self.value else 1.0

    def support_min(self):
        return self.value

    def mean(self):
        return self.value

    def truncated_first_moment(self, theta):
        return self.value if theta >= self.value else 0.0

    def integrated_cdf(self, theta):
        return max(0.0, theta - self.value)

    def quantile(self, q):
        return self.value

    def sample_batch(self, rng, n):
        return np.full(n, self.value)
