"""Request/response models of the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..compare import CompareReport
from ..des import SimulationReport, TraceRecord
from ..report import AnalyticReport
from ..selfcheck import CheckResult
from ..sweeps import SweepFile


class ScenarioRequest(BaseModel):
    """Scenario text plus override pairs applied on top of it."""

    config: str = ""
    overrides: dict[str, str] = Field(default_factory=dict)


class SimulateRequest(ScenarioRequest):
    trace: bool = False
    trace_limit: int = 200_000


class SweepRequest(ScenarioRequest):
    include_simulation: bool = True


class ErrorDetail(BaseModel):
    message: str
    key: str | None = None
    line: int | None = None
    rho: float | None = None


class SourceAnalyticsModel(BaseModel):
    source: int
    lam: float
    rho_k: float
    p_b: float
    p_l: float
    w_star: float
    w_star_d1: float
    w_star_d2: float
    residual_term: float
    other_work_term: float
    departed_term: float
    prev_sojourn_term: float
    gap_square_term: float
    e_xw: float
    delta_pooled: float
    delta_per_source: float


class AnalyticReportModel(BaseModel):
    n_sources: int
    total_rate: float
    alpha: float
    service: str
    repair: str
    rho: float
    p0: float
    availability: float
    completion_mean: float
    completion_m2: float
    mean_waiting: float
    mean_sojourn: float
    mean_system_size: float
    per_source: list[SourceAnalyticsModel]

    @classmethod
    def from_core(cls, rep: AnalyticReport) -> "AnalyticReportModel":
        return cls(
            n_sources=rep.n_sources,
            total_rate=rep.total_rate,
            alpha=rep.alpha,
            service=rep.service_literal,
            repair=rep.repair_literal,
            rho=rep.rho,
            p0=rep.p0,
            availability=rep.availability,
            completion_mean=rep.completion_mean,
            completion_m2=rep.completion_m2,
            mean_waiting=rep.mean_waiting,
            mean_sojourn=rep.mean_sojourn,
            mean_system_size=rep.mean_system_size,
            per_source=[SourceAnalyticsModel(**vars(s)) for s in rep.per_source],
        )


class EstimateModel(BaseModel):
    """Replication mean with uncertainty; everything null when no data."""

    mean: float | None
    se: float | None = None
    ci95: float | None = None
    n: int = 1

    @classmethod
    def from_core(cls, est) -> "EstimateModel":
        # NaN (zero usable replications) is not valid JSON; send null.
        mean = est.mean if est.mean == est.mean else None
        return cls(mean=mean, se=est.se, ci95=est.ci95, n=est.n)


class SourceSimModel(BaseModel):
    source: int
    aaoi: EstimateModel
    aaoi_cycle: EstimateModel
    mean_sojourn: EstimateModel
    mean_waiting: EstimateModel
    p_l: EstimateModel
    e_xw: EstimateModel
    deliveries: int
    arrivals: int


class PgfSampleModel(BaseModel):
    z: float
    value: EstimateModel


class TraceRowModel(BaseModel):
    time: float
    event_type: str
    source: int
    queue_len: int
    server_mode: str


class SimulationReportModel(BaseModel):
    per_source: list[SourceSimModel]
    idle_fraction: EstimateModel
    availability_fraction: EstimateModel
    mean_system_size: EstimateModel
    pgf: list[PgfSampleModel]
    total_deliveries: int
    identity_error_max: float
    replications: int
    master_seed: int
    stat_time_mean: float
    max_queue_len: int
    stable: bool
    trace: list[TraceRowModel] | None = None
    trace_truncated: bool | None = None

    @classmethod
    def from_core(
        cls,
        rep: SimulationReport,
        stable: bool,
        trace: TraceRecord | None = None,
    ) -> "SimulationReportModel":
        trace_rows = None
        truncated = None
        if trace is not None:
            trace_rows = [
                TraceRowModel(
                    time=t, event_type=ev, source=src, queue_len=q, server_mode=mode
                )
                for t, ev, src, q, mode in trace.rows()
            ]
            truncated = trace.truncated
        return cls(
            per_source=[
                SourceSimModel(
                    source=s.source,
                    aaoi=EstimateModel.from_core(s.aaoi),
                    aaoi_cycle=EstimateModel.from_core(s.aaoi_cycle),
                    mean_sojourn=EstimateModel.from_core(s.mean_sojourn),
                    mean_waiting=EstimateModel.from_core(s.mean_waiting),
                    p_l=EstimateModel.from_core(s.p_l),
                    e_xw=EstimateModel.from_core(s.e_xw),
                    deliveries=s.deliveries,
                    arrivals=s.arrivals,
                )
                for s in rep.per_source
            ],
            idle_fraction=EstimateModel.from_core(rep.idle_fraction),
            availability_fraction=EstimateModel.from_core(rep.availability_fraction),
            mean_system_size=EstimateModel.from_core(rep.mean_system_size),
            pgf=[PgfSampleModel(z=z, value=EstimateModel.from_core(e)) for z, e in rep.pgf],
            total_deliveries=rep.total_deliveries,
            identity_error_max=rep.identity_error_max,
            replications=rep.replications,
            master_seed=rep.master_seed,
            stat_time_mean=rep.stat_time_mean,
            max_queue_len=rep.max_queue_len,
            stable=stable,
            trace=trace_rows,
            trace_truncated=truncated,
        )


class ComparePointModel(BaseModel):
    figure: str
    service_dist: str
    n_sources: int
    sweep_var: str
    sweep_value: float | None
    delta_pooled: float | None
    delta_per_source: float | None
    delta_baseline: float | None
    sim_mean: float
    sim_ci95: float | None
    z_pooled: float | None
    z_per_source: float | None
    covered_pooled: bool | None
    covered_per_source: bool | None
    stable: bool


class CompareReportModel(BaseModel):
    points: list[ComparePointModel]
    aggregate_abs_z_pooled: float | None
    aggregate_abs_z_per_source: float | None
    coverage_pooled: float | None
    coverage_per_source: float | None
    verdict: str
    verdict_line: str

    @classmethod
    def from_core(cls, rep: CompareReport) -> "CompareReportModel":
        return cls(
            points=[ComparePointModel(**vars(p)) for p in rep.points],
            aggregate_abs_z_pooled=_opt(rep.aggregate_abs_z_pooled),
            aggregate_abs_z_per_source=_opt(rep.aggregate_abs_z_per_source),
            coverage_pooled=_opt(rep.coverage_pooled),
            coverage_per_source=_opt(rep.coverage_per_source),
            verdict=rep.verdict,
            verdict_line=rep.verdict_line,
        )


def _opt(x: float) -> float | None:
    return None if x != x else x


class SweepFileModel(BaseModel):
    figure: str
    distribution: str
    filename: str
    csv_text: str

    @classmethod
    def from_core(cls, f: SweepFile) -> "SweepFileModel":
        return cls(
            figure=f.figure,
            distribution=f.distribution,
            filename=f.filename,
            csv_text=f.csv_text,
        )


class SweepReportModel(BaseModel):
    files: list[SweepFileModel]


class CheckResultModel(BaseModel):
    name: str
    passed: bool
    detail: str

    @classmethod
    def from_core(cls, r: CheckResult) -> "CheckResultModel":
        # numpy comparison results are np.bool_, which pydantic warns about
        return cls(name=r.name, passed=bool(r.passed), detail=r.detail)


class SelfcheckReportModel(BaseModel):
    results: list[CheckResultModel]
    all_passed: bool


class HealthModel(BaseModel):
    status: str
    version: str
