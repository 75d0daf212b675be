"""HTTP service exposing the analytic and simulation machinery.

Endpoints take scenario text (the same format the CLI reads from a config
file) plus key overrides, so a thin client never re-implements parsing or
defaults. Parse and validation problems map to 422 with the offending key
and line; instability of a steady-state request maps to 409 with the
offered load.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..compare import run_compare
from ..des import ConfigError, SimConfig, run_experiment, run_replication
from ..dists import DistributionError
from ..report import analytic_report
from ..scenario import Scenario, ScenarioError, parse_scenario
from ..selfcheck import run_selfcheck
from ..sweeps import run_sweep
from ..system import ParameterError, StabilityError
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="aoiq",
        version=__version__,
        description=(
            "Average age-of-information analysis for multi-source M/G/1 "
            "status-update queues with server breakdowns, plus the "
            "validating discrete-event simulator."
        ),
    )

    @app.exception_handler(ScenarioError)
    async def _scenario_error(_: Request, exc: ScenarioError):
        detail = schemas.ErrorDetail(message=str(exc), key=exc.key, line=exc.line)
        return JSONResponse(status_code=422, content={"detail": detail.model_dump()})

    @app.exception_handler(DistributionError)
    @app.exception_handler(ParameterError)
    @app.exception_handler(ConfigError)
    async def _validation_error(_: Request, exc: Exception):
        detail = schemas.ErrorDetail(message=str(exc))
        return JSONResponse(status_code=422, content={"detail": detail.model_dump()})

    @app.exception_handler(StabilityError)
    async def _stability_error(_: Request, exc: StabilityError):
        detail = schemas.ErrorDetail(message=str(exc), rho=exc.rho)
        return JSONResponse(status_code=409, content={"detail": detail.model_dump()})

    @app.get("/health", response_model=schemas.HealthModel)
    def health():
        return schemas.HealthModel(status="ok", version=__version__)

    @app.post("/analyze", response_model=schemas.AnalyticReportModel)
    def analyze(req: schemas.ScenarioRequest):
        scenario = parse_scenario(req.config, req.overrides)
        point = scenario.single_point()
        return schemas.AnalyticReportModel.from_core(analytic_report(point.params))

    @app.post("/simulate", response_model=schemas.SimulationReportModel)
    def simulate(req: schemas.SimulateRequest):
        scenario = parse_scenario(req.config, req.overrides)
        point = scenario.single_point()
        cfg = _sim_config(scenario, point.params)
        report = run_experiment(cfg, keep_replications=False)
        trace = None
        if req.trace:
            _, trace = run_replication(cfg, 0, trace=True, trace_limit=req.trace_limit)
        return schemas.SimulationReportModel.from_core(report, point.stable, trace)

    @app.post("/compare", response_model=schemas.CompareReportModel)
    def compare(req: schemas.ScenarioRequest):
        scenario = parse_scenario(req.config, req.overrides)
        return schemas.CompareReportModel.from_core(run_compare(scenario))

    @app.post("/sweep", response_model=schemas.SweepReportModel)
    def sweep(req: schemas.SweepRequest):
        scenario = parse_scenario(req.config, req.overrides)
        files = run_sweep(scenario, include_simulation=req.include_simulation)
        return schemas.SweepReportModel(
            files=[schemas.SweepFileModel.from_core(f) for f in files]
        )

    @app.post("/selfcheck", response_model=schemas.SelfcheckReportModel)
    def selfcheck():
        results = run_selfcheck()
        return schemas.SelfcheckReportModel(
            results=[schemas.CheckResultModel.from_core(r) for r in results],
            all_passed=all(r.passed for r in results),
        )

    return app


def _sim_config(scenario: Scenario, params) -> SimConfig:
    return SimConfig(
        params=params,
        horizon_deliveries=scenario.horizon_deliveries,
        horizon_time=scenario.horizon_time,
        warmup_fraction=scenario.warmup,
        replications=scenario.replications,
        master_seed=scenario.seed,
    )


app = create_app()
