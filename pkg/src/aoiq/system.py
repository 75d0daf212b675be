"""System parameters for the multi-source unreliable M/G/1 queue."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .dists import DistributionSpec


class ParameterError(ValueError):
    """Invalid system parameters."""


class StabilityError(ValueError):
    """Steady-state quantity requested for an unstable parameter set."""

    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(f"system is unstable: offered load rho = {rho:.6g} >= 1")


@dataclass(frozen=True)
class SystemParams:
    """Arrival rates, service and repair laws, and the server failure rate.

    ``service`` and ``repair`` may be a single law, shared by all sources,
    or one law per source. The analytic operations require shared laws; the
    simulator accepts heterogeneous ones. ``alpha`` is the failure rate of
    the server while serving (mean lifetime 1/alpha); failures never occur
    while idle or under repair.
    """

    arrival_rates: tuple[float, ...]
    service: DistributionSpec | tuple[DistributionSpec, ...]
    repair: DistributionSpec | tuple[DistributionSpec, ...]
    alpha: float = 0.0

    def __post_init__(self):
        if isinstance(self.arrival_rates, Sequence) and not isinstance(
            self.arrival_rates, tuple
        ):
            object.__setattr__(self, "arrival_rates", tuple(self.arrival_rates))
        if len(self.arrival_rates) == 0:
            raise ParameterError("at least one source is required")
        for lam in self.arrival_rates:
            if not lam > 0.0:
                raise ParameterError(f"arrival rates must be > 0, got {lam}")
        if self.alpha < 0.0:
            raise ParameterError(f"failure rate must be >= 0, got {self.alpha}")
        for attr in ("service", "repair"):
            value = getattr(self, attr)
            if isinstance(value, tuple) and len(value) != self.n_sources:
                raise ParameterError(
                    f"{attr} has {len(value)} laws for {self.n_sources} sources"
                )

    @property
    def n_sources(self) -> int:
        return len(self.arrival_rates)

    @property
    def total_rate(self) -> float:
        return sum(self.arrival_rates)

    def rate_of(self, source: int) -> float:
        """Arrival rate of a 1-based source id."""
        if not 1 <= source <= self.n_sources:
            raise ParameterError(f"source id must be in 1..{self.n_sources}, got {source}")
        return self.arrival_rates[source - 1]

    def service_for(self, source: int) -> DistributionSpec:
        if isinstance(self.service, tuple):
            return self.service[source - 1]
        return self.service

    def repair_for(self, source: int) -> DistributionSpec:
        if isinstance(self.repair, tuple):
            return self.repair[source - 1]
        return self.repair

    @property
    def homogeneous(self) -> bool:
        svc = self.service if isinstance(self.service, tuple) else (self.service,)
        rep = self.repair if isinstance(self.repair, tuple) else (self.repair,)
        return len(set(svc)) == 1 and len(set(rep)) == 1

    def shared_laws(self) -> tuple[DistributionSpec, DistributionSpec]:
        """The common (service, repair) pair required by the analytic path."""
        if not self.homogeneous:
            raise ParameterError(
                "analytic operations require identical service laws and identical "
                "repair laws across sources; only the simulator accepts mixed laws"
            )
        return self.service_for(1), self.repair_for(1)

    def with_alpha(self, alpha: float) -> "SystemParams":
        return replace(self, alpha=alpha)

    def with_rate(self, source: int, rate: float) -> "SystemParams":
        rates = list(self.arrival_rates)
        rates[source - 1] = rate
        return replace(self, arrival_rates=tuple(rates))
