"""Service and repair time distributions.

The closed set of laws used by the analytic formulas and the simulator:
exponential, Erlang, two-phase hyperexponential, and deterministic. Each
law provides exact raw moments (orders 1..3), its Laplace-Stieltjes
transform with analytic first and second derivatives, the CDF, and random
sampling from a numpy ``Generator``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np


class DistributionError(ValueError):
    """Invalid distribution parameters or an unsupported operation."""


_FACT = (1.0, 1.0, 2.0, 6.0)  # 0!..3!


def _check_order(i: int) -> None:
    if i not in (1, 2, 3):
        raise DistributionError(f"moment order must be 1, 2 or 3, got {i}")


def _check_deriv_order(order: int) -> None:
    if order not in (1, 2):
        raise DistributionError(f"LST derivative order must be 1 or 2, got {order}")


def _check_s(s: float) -> None:
    # Transform arguments are nonnegative reals everywhere in this package.
    if s < 0.0:
        raise DistributionError(f"LST argument must be >= 0, got {s}")


@dataclass(frozen=True)
class Exponential:
    """Exponential law with the given rate (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise DistributionError(f"exponential rate must be > 0, got {self.rate}")

    def moment(self, i: int) -> float:
        _check_order(i)
        return _FACT[i] / self.rate**i

    def lst(self, s: float) -> float:
        _check_s(s)
        return self.rate / (self.rate + s)

    def lst_deriv(self, s: float, order: int) -> float:
        _check_s(s)
        _check_deriv_order(order)
        if order == 1:
            return -self.rate / (self.rate + s) ** 2
        return 2.0 * self.rate / (self.rate + s) ** 3

    def cdf(self, t: float) -> float:
        return -math.expm1(-self.rate * t) if t > 0.0 else 0.0

    def sample(self, rng: np.random.Generator) -> float:
        return rng.exponential(1.0 / self.rate)

    def literal(self) -> str:
        return f"exp(rate={self.rate!r})"


@dataclass(frozen=True)
class Erlang:
    """Erlang law: sum of `shape` i.i.d. exponentials with the given rate."""

    shape: int
    rate: float

    def __post_init__(self):
        if not (isinstance(self.shape, (int, np.integer)) and self.shape >= 1):
            raise DistributionError(f"Erlang shape must be an integer >= 1, got {self.shape}")
        if not self.rate > 0.0:
            raise DistributionError(f"Erlang rate must be > 0, got {self.rate}")

    def moment(self, i: int) -> float:
        _check_order(i)
        # k(k+1)...(k+i-1) / rate^i
        num = 1.0
        for j in range(i):
            num *= self.shape + j
        return num / self.rate**i

    def lst(self, s: float) -> float:
        _check_s(s)
        return (self.rate / (self.rate + s)) ** self.shape

    def lst_deriv(self, s: float, order: int) -> float:
        _check_s(s)
        _check_deriv_order(order)
        k, r = self.shape, self.rate
        if order == 1:
            return -k * r**k / (r + s) ** (k + 1)
        return k * (k + 1) * r**k / (r + s) ** (k + 2)

    def cdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        # Regularized lower incomplete gamma with integer shape.
        x = self.rate * t
        tail = 0.0
        term = 1.0
        for n in range(self.shape):
            if n > 0:
                term *= x / n
            tail += term
        return 1.0 - math.exp(-x) * tail

    def sample(self, rng: np.random.Generator) -> float:
        # Sum of `shape` exponential draws.
        total = 0.0
        scale = 1.0 / self.rate
        for _ in range(self.shape):
            total += rng.exponential(scale)
        return total

    def literal(self) -> str:
        return f"erlang(k={self.shape},rate={self.rate!r})"


@dataclass(frozen=True)
class HyperExp2:
    """Two-point mixture of exponentials: rate1 w.p. p, rate2 w.p. 1-p."""

    p: float
    rate1: float
    rate2: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise DistributionError(f"mixture probability must be in (0, 1], got {self.p}")
        if not (self.rate1 > 0.0 and self.rate2 > 0.0):
            raise DistributionError(
                f"hyperexponential rates must be > 0, got {self.rate1}, {self.rate2}"
            )

    def moment(self, i: int) -> float:
        _check_order(i)
        return _FACT[i] * (self.p / self.rate1**i + (1.0 - self.p) / self.rate2**i)

    def lst(self, s: float) -> float:
        _check_s(s)
        return self.p * self.rate1 / (self.rate1 + s) + (1.0 - self.p) * self.rate2 / (
            self.rate2 + s
        )

    def lst_deriv(self, s: float, order: int) -> float:
        _check_s(s)
        _check_deriv_order(order)
        if order == 1:
            return -self.p * self.rate1 / (self.rate1 + s) ** 2 - (
                1.0 - self.p
            ) * self.rate2 / (self.rate2 + s) ** 2
        return 2.0 * self.p * self.rate1 / (self.rate1 + s) ** 3 + 2.0 * (
            1.0 - self.p
        ) * self.rate2 / (self.rate2 + s) ** 3

    def cdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        return -(
            self.p * math.expm1(-self.rate1 * t)
            + (1.0 - self.p) * math.expm1(-self.rate2 * t)
        )

    def sample(self, rng: np.random.Generator) -> float:
        if rng.random() < self.p:
            return rng.exponential(1.0 / self.rate1)
        return rng.exponential(1.0 / self.rate2)

    def literal(self) -> str:
        return f"h2(p={self.p!r},rate1={self.rate1!r},rate2={self.rate2!r})"


@dataclass(frozen=True)
class Deterministic:
    """Point mass at a positive value."""

    value: float

    def __post_init__(self):
        if not self.value > 0.0:
            raise DistributionError(f"deterministic value must be > 0, got {self.value}")

    def moment(self, i: int) -> float:
        _check_order(i)
        return self.value**i

    def lst(self, s: float) -> float:
        _check_s(s)
        return math.exp(-s * self.value)

    def lst_deriv(self, s: float, order: int) -> float:
        _check_s(s)
        _check_deriv_order(order)
        if order == 1:
            return -self.value * math.exp(-s * self.value)
        return self.value**2 * math.exp(-s * self.value)

    def cdf(self, t: float) -> float:
        return 1.0 if t >= self.value else 0.0

    def sample(self, rng: np.random.Generator) -> float:
        return self.value

    def literal(self) -> str:
        return f"det(value={self.value!r})"


DistributionSpec = Exponential | Erlang | HyperExp2 | Deterministic


def make_h2_balanced(m1: float, p: float) -> HyperExp2 | Exponential:
    """Balanced-means hyperexponential with mean m1 and mixing probability p.

    Branch rates are 2p/m1 and 2(1-p)/m1, so each branch carries half of the
    mean. p = 1 degenerates to a single branch and is returned as a plain
    ``Exponential(1/m1)``, which keeps the mean at m1.
    """
    if not m1 > 0.0:
        raise DistributionError(f"mean must be > 0, got {m1}")
    if not 0.0 < p <= 1.0:
        raise DistributionError(f"mixing probability must be in (0, 1], got {p}")
    if p == 1.0:
        return Exponential(rate=1.0 / m1)
    return HyperExp2(p=p, rate1=2.0 * p / m1, rate2=2.0 * (1.0 - p) / m1)


def scv(d: DistributionSpec) -> float:
    """Squared coefficient of variation, m2/m1^2 - 1."""
    m1 = d.moment(1)
    return d.moment(2) / (m1 * m1) - 1.0


def with_mean(d: DistributionSpec, m1: float) -> DistributionSpec:
    """Rescale a law to the target mean, preserving its family and shape."""
    if not m1 > 0.0:
        raise DistributionError(f"target mean must be > 0, got {m1}")
    if isinstance(d, Exponential):
        return Exponential(rate=1.0 / m1)
    if isinstance(d, Erlang):
        return Erlang(shape=d.shape, rate=d.shape / m1)
    if isinstance(d, Deterministic):
        return Deterministic(value=m1)
    # Hyperexponential: scale both branch rates by mean ratio.
    factor = d.moment(1) / m1
    return HyperExp2(p=d.p, rate1=d.rate1 * factor, rate2=d.rate2 * factor)


_LITERAL_RE = re.compile(r"^\s*([a-z0-9]+)\s*\(\s*(.*?)\s*\)\s*$")


def parse_distribution(text: str) -> DistributionSpec:
    """Parse a distribution literal.

    Accepted forms: ``exp(rate=...)``, ``erlang(k=...,rate=...)``,
    ``h2(m1=...,p=...)`` (balanced-means construction), ``det(value=...)``,
    and ``h2(p=...,rate1=...,rate2=...)`` for explicit branch rates.
    """
    m = _LITERAL_RE.match(text)
    if m is None:
        raise DistributionError(f"malformed distribution literal: {text!r}")
    name, body = m.group(1), m.group(2)
    kwargs: dict[str, float] = {}
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise DistributionError(f"malformed argument {part!r} in {text!r}")
            key, _, val = part.partition("=")
            try:
                kwargs[key.strip()] = float(val)
            except ValueError:
                raise DistributionError(f"non-numeric value {val!r} in {text!r}") from None

    def take(*names: str) -> list[float]:
        missing = [n for n in names if n not in kwargs]
        if missing:
            raise DistributionError(f"{text!r} is missing argument(s): {', '.join(missing)}")
        extra = set(kwargs) - set(names)
        if extra:
            raise DistributionError(f"{text!r} has unknown argument(s): {', '.join(sorted(extra))}")
        return [kwargs[n] for n in names]

    if name == "exp":
        (rate,) = take("rate")
        return Exponential(rate=rate)
    if name == "erlang":
        k, rate = take("k", "rate")
        if k != int(k):
            raise DistributionError(f"erlang k must be an integer, got {k}")
        return Erlang(shape=int(k), rate=rate)
    if name == "h2":
        if "m1" in kwargs:
            m1, p = take("m1", "p")
            return make_h2_balanced(m1, p)
        p, r1, r2 = take("p", "rate1", "rate2")
        return HyperExp2(p=p, rate1=r1, rate2=r2)
    if name == "det":
        (value,) = take("value")
        return Deterministic(value=value)
    raise DistributionError(f"unknown distribution family {name!r} in {text!r}")
