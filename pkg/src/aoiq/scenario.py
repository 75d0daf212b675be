"""Scenario configuration: parsing, preset expansion, point materialization.

A scenario is flat ``key = value`` text (``#`` comments allowed). A preset
fills defaults which any later key overrides. Materialization expands the
scenario into concrete parameter points: the cartesian product of the
sweep grid, the source-count list and the service families, each carrying
a ready :class:`~aoiq.system.SystemParams`.

Recognized keys::

    preset            fig3 | fig4 | fig5 | fig6a | fig6b
    sources           comma list of arrival rates (first entry is source 1)
    lambda1           arrival rate of source 1
    lambda_other      shared rate of every other source
    n_sources         number of sources (with lambda1/lambda_other)
    n_sources_list    comma list of source counts
    service           explicit distribution literal (fixes the law)
    service_families  comma list of erlang2 | h2 | exp
    service_mean      target completion-time mean (default 0.5)
    raw_service_mean  true: service_mean is the raw service mean
    h2_p              mixing probability of the h2 family (default 0.7)
    repair            distribution literal (default exp(rate=1/0.3))
    alpha             server failure rate (default 0.1)
    sweep_var         lambda1 | rho1 | alpha | repair_mean | availability
    sweep_grid        comma list, strictly increasing
    replications      simulation replications
    horizon           tagged-source deliveries per replication
    horizon_time      simulated-time horizon (alternative to horizon)
    warmup            warmup fraction in [0, 1)
    seed              master seed
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import presets as presets_mod
from . import transforms
from .dists import (
    DistributionError,
    DistributionSpec,
    Exponential,
    parse_distribution,
    with_mean,
)
from .system import StabilityError, SystemParams


class ScenarioError(ValueError):
    """Configuration rejected; carries the offending key and line."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = ""
        if key is not None:
            where = f" (key {key!r}" + (f", line {line}" if line is not None else "") + ")"
        super().__init__(message + where)


_KEYS = {
    "preset",
    "sources",
    "lambda1",
    "lambda_other",
    "n_sources",
    "n_sources_list",
    "service",
    "service_families",
    "service_mean",
    "raw_service_mean",
    "h2_p",
    "repair",
    "alpha",
    "sweep_var",
    "sweep_grid",
    "replications",
    "horizon",
    "horizon_time",
    "warmup",
    "seed",
}


@dataclass(frozen=True)
class SweepPoint:
    """One concrete parameter point of a materialized scenario."""

    figure: str
    dist_label: str
    n_sources: int
    sweep_var: str | None
    grid_value: float | None
    x_value: float | None
    params: SystemParams

    @property
    def stable(self) -> bool:
        return transforms.completion_moments(self.params).rho < 1.0 - transforms.STABILITY_MARGIN


@dataclass(frozen=True)
class Scenario:
    """Resolved scenario; see module docstring for the file format."""

    preset: str | None = None
    sources: tuple[float, ...] | None = None
    lambda1: float | None = None
    lambda_other: float = 0.12
    n_sources_list: tuple[int, ...] | None = None
    service: DistributionSpec | None = None
    service_families: tuple[str, ...] = ("erlang2",)
    service_mean: float = 0.5
    raw_service_mean: bool = False
    h2_p: float = 0.7
    repair: DistributionSpec = field(default_factory=lambda: Exponential(rate=1.0 / 0.3))
    alpha: float = 0.1
    sweep_var: str | None = None
    sweep_grid: tuple[float, ...] | None = None
    replications: int = 10
    horizon_deliveries: int | None = 10_000
    horizon_time: float | None = None
    warmup: float = 0.1
    seed: int = 1

    @property
    def figure(self) -> str:
        return self.preset or "custom"

    def _base_service_mean(self) -> float:
        """Raw service mean solving the completion-mean target."""
        if self.raw_service_mean:
            return self.service_mean
        return self.service_mean / (1.0 + self.alpha * self.repair.moment(1))

    def _family_laws(self) -> list[tuple[str, DistributionSpec]]:
        if self.service is not None:
            return [(_law_label(self.service), self.service)]
        b1 = self._base_service_mean()
        return [
            (name, presets_mod.build_family(name, b1, self.h2_p))
            for name in self.service_families
        ]

    def _n_values(self) -> tuple[int, ...]:
        if self.sources is not None:
            return (len(self.sources),)
        if self.n_sources_list is not None:
            return self.n_sources_list
        return (2,)

    def _rates_for(self, n: int) -> tuple[float, ...]:
        if self.sources is not None:
            return self.sources
        if self.lambda1 is None:
            raise ScenarioError("lambda1 (or sources) is required", key="lambda1")
        return (self.lambda1,) + (self.lambda_other,) * (n - 1)

    def points(self) -> list[SweepPoint]:
        """Expand into the grid x source-count x family product."""
        out = []
        grid: tuple[float | None, ...] = self.sweep_grid if self.sweep_var else (None,)
        for label, law in self._family_laws():
            for n in self._n_values():
                base = SystemParams(
                    arrival_rates=self._rates_for(n),
                    service=law,
                    repair=self.repair,
                    alpha=self.alpha,
                )
                for v in grid:
                    params = base if v is None else self._apply_sweep(base, v)
                    x = self._x_value(params, v)
                    out.append(
                        SweepPoint(
                            figure=self.figure,
                            dist_label=label,
                            n_sources=n,
                            sweep_var=self.sweep_var,
                            grid_value=v,
                            x_value=x,
                            params=params,
                        )
                    )
        return out

    def _apply_sweep(self, base: SystemParams, v: float) -> SystemParams:
        var = self.sweep_var
        if var == "lambda1":
            return base.with_rate(1, v)
        if var == "rho1":
            eh = transforms.completion_moments(base).eH
            return base.with_rate(1, v / eh)
        if var == "alpha":
            return base.with_alpha(v)
        if var == "repair_mean":
            return replace(base, repair=with_mean(self.repair, v))
        if var == "availability":
            # Grid entries are tagged-source rates; the availability is the
            # reported x-coordinate, computed in _x_value.
            return base.with_rate(1, v)
        raise ScenarioError(f"unknown sweep variable {var!r}", key="sweep_var")

    def _x_value(self, params: SystemParams, v: float | None) -> float | None:
        if v is None:
            return None
        if self.sweep_var == "availability":
            try:
                return transforms.availability(params)
            except StabilityError:
                return None
        return v

    def single_point(self) -> SweepPoint:
        pts = self.points()
        if len(pts) != 1:
            raise ScenarioError(
                f"scenario expands to {len(pts)} points; narrow it to one "
                "(set lambda1, n_sources and a single service family, and drop the sweep)"
            )
        return pts[0]


def _law_label(law: DistributionSpec) -> str:
    name = type(law).__name__
    if name == "Exponential":
        return "exp"
    if name == "Erlang":
        return f"erlang{law.shape}"
    if name == "HyperExp2":
        return "h2"
    return "det"


def _parse_bool(raw: str, key: str, line: int | None) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ScenarioError(f"expected a boolean, got {raw!r}", key=key, line=line)


def _parse_float(raw: str, key: str, line: int | None) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"expected a number, got {raw!r}", key=key, line=line) from None


def _parse_int(raw: str, key: str, line: int | None) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {raw!r}", key=key, line=line) from None


def _parse_float_list(raw: str, key: str, line: int | None) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ScenarioError("expected a non-empty comma list", key=key, line=line)
    return tuple(_parse_float(p, key, line) for p in parts)


def parse_scenario(text: str, overrides: dict[str, str] | None = None) -> Scenario:
    """Parse scenario text, then apply override pairs (highest precedence)."""
    entries: list[tuple[str, str, int | None]] = []
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        stripped = rawline.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ScenarioError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, _, value = stripped.partition("=")
        entries.append((key.strip(), value.strip(), lineno))
    for key, value in (overrides or {}).items():
        entries.append((key.strip(), str(value).strip(), None))
    return _build(entries)


def _build(entries: list[tuple[str, str, int | None]]) -> Scenario:
    for key, _, line in entries:
        if key not in _KEYS:
            raise ScenarioError(f"unknown key {key!r}", key=key, line=line)

    values: dict[str, object] = {}
    preset_name = None
    for key, raw, line in entries:
        if key != "preset":
            continue
        preset_name = raw
        if preset_name not in presets_mod.PRESETS:
            raise ScenarioError(
                f"unknown preset {preset_name!r}; valid: {', '.join(sorted(presets_mod.PRESETS))}",
                key="preset",
                line=line,
            )
    if preset_name is not None:
        values.update(presets_mod.PRESETS[preset_name])
        values["preset"] = preset_name

    n_sources_single: int | None = None
    for key, raw, line in entries:
        if key == "preset":
            continue
        elif key == "sources":
            values["sources"] = _parse_float_list(raw, key, line)
        elif key == "lambda1":
            values["lambda1"] = _parse_float(raw, key, line)
        elif key == "lambda_other":
            values["lambda_other"] = _parse_float(raw, key, line)
        elif key == "n_sources":
            n_sources_single = _parse_int(raw, key, line)
            if n_sources_single < 1:
                raise ScenarioError("n_sources must be >= 1", key=key, line=line)
            values["n_sources_list"] = (n_sources_single,)
        elif key == "n_sources_list":
            ns = tuple(_parse_int(p.strip(), key, line) for p in raw.split(",") if p.strip())
            if not ns or any(n < 1 for n in ns):
                raise ScenarioError("n_sources_list entries must be >= 1", key=key, line=line)
            values["n_sources_list"] = ns
        elif key in ("service", "repair"):
            try:
                values[key] = parse_distribution(raw)
            except DistributionError as exc:
                raise ScenarioError(str(exc), key=key, line=line) from None
        elif key == "service_families":
            fams = tuple(p.strip() for p in raw.split(",") if p.strip())
            bad = [f for f in fams if f not in presets_mod.FAMILY_NAMES]
            if bad or not fams:
                raise ScenarioError(
                    f"service families must be among {presets_mod.FAMILY_NAMES}, got {raw!r}",
                    key=key,
                    line=line,
                )
            values["service_families"] = fams
        elif key == "service_mean":
            v = _parse_float(raw, key, line)
            if v <= 0:
                raise ScenarioError("service_mean must be > 0", key=key, line=line)
            values["service_mean"] = v
        elif key == "raw_service_mean":
            values["raw_service_mean"] = _parse_bool(raw, key, line)
        elif key == "h2_p":
            v = _parse_float(raw, key, line)
            if not 0 < v <= 1:
                raise ScenarioError("h2_p must be in (0, 1]", key=key, line=line)
            values["h2_p"] = v
        elif key == "alpha":
            v = _parse_float(raw, key, line)
            if v < 0:
                raise ScenarioError("alpha must be >= 0", key=key, line=line)
            values["alpha"] = v
        elif key == "sweep_var":
            if raw == "none":
                # Drops a preset's sweep so the scenario narrows to a point.
                values["sweep_var"] = None
                values["sweep_grid"] = None
            elif raw not in presets_mod.SWEEP_VARS:
                raise ScenarioError(
                    f"sweep variable must be one of {presets_mod.SWEEP_VARS} or none, got {raw!r}",
                    key=key,
                    line=line,
                )
            else:
                values["sweep_var"] = raw
        elif key == "sweep_grid":
            grid = _parse_float_list(raw, key, line)
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ScenarioError("sweep grid must be strictly increasing", key=key, line=line)
            values["sweep_grid"] = grid
        elif key == "replications":
            v = _parse_int(raw, key, line)
            if v < 1:
                raise ScenarioError("replications must be >= 1", key=key, line=line)
            values["replications"] = v
        elif key == "horizon":
            v = _parse_int(raw, key, line)
            if v < 1:
                raise ScenarioError("horizon must be >= 1", key=key, line=line)
            values["horizon_deliveries"] = v
            values["horizon_time"] = None
        elif key == "horizon_time":
            v = _parse_float(raw, key, line)
            if v <= 0:
                raise ScenarioError("horizon_time must be > 0", key=key, line=line)
            values["horizon_time"] = v
            values["horizon_deliveries"] = None
        elif key == "warmup":
            v = _parse_float(raw, key, line)
            if not 0 <= v < 1:
                raise ScenarioError("warmup must be in [0, 1)", key=key, line=line)
            values["warmup"] = v
        elif key == "seed":
            values["seed"] = _parse_int(raw, key, line)

    _validate(values)
    return Scenario(**values)


def _validate(values: dict[str, object]) -> None:
    sources = values.get("sources")
    if sources is not None:
        if any(r <= 0 for r in sources):
            raise ScenarioError("arrival rates must be > 0", key="sources")
        if values.get("n_sources_list") is not None:
            raise ScenarioError(
                "'sources' fixes the source count; drop n_sources/n_sources_list",
                key="sources",
            )
    lam1 = values.get("lambda1")
    if lam1 is not None and lam1 <= 0:
        raise ScenarioError("lambda1 must be > 0", key="lambda1")
    lam_o = values.get("lambda_other")
    if lam_o is not None and lam_o <= 0:
        raise ScenarioError("lambda_other must be > 0", key="lambda_other")
    if values.get("sweep_var") is not None and values.get("sweep_grid") is None:
        raise ScenarioError("sweep_var needs a sweep_grid", key="sweep_grid")
    if values.get("sweep_grid") is not None and values.get("sweep_var") is None:
        raise ScenarioError("sweep_grid needs a sweep_var", key="sweep_var")
    if sources is None and lam1 is None:
        sweep = values.get("sweep_var")
        # A lambda1/rho1/availability sweep supplies the tagged rate itself.
        if sweep not in ("lambda1", "rho1", "availability"):
            raise ScenarioError("either sources or lambda1 is required", key="lambda1")
        values["lambda1"] = 1.0  # placeholder; every grid point overwrites it
