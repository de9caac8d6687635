"""HTTP service exposing the toolkit.

Every endpoint is a stateless wrapper over the core package: requests
carry full inputs (configs or world payloads) and responses carry the
complete result, so any client sees the same deterministic outputs the
library produces.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..metrics import TimeWindow, compute_idi
from ..pipeline import build_scaling_report, run_pipeline, validate_scaling, validation_artifacts
from ..policy import apply_policy, compare_policies
from ..scaling import map_to_real
from ..seir import simulate_agents
from ..world import discretize, generate_synthetic_world, sample_small_world, WorldModel
from ..io import render_per_cell_csv
from .schemas import (
    ArtifactModel,
    DiscretizeRequest,
    GenerateRequest,
    IdiRequest,
    IdiResponse,
    MapToRealRequest,
    PipelineRequest,
    PipelineResponse,
    PolicyApplyRequest,
    PolicyCompareRequest,
    PolicyCompareResponse,
    SampleRequest,
    ScalingReportRequest,
    SeriesModel,
    SimulateRequest,
    SimulateResponse,
    ValidateRequest,
    ValidateResponse,
    WorldPayload,
)

__all__ = ["create_app", "app"]


def create_app() -> FastAPI:
    app = FastAPI(title="smallworld", version=__version__)

    @app.exception_handler(ValueError)
    async def _invalid_input(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=400, content={"error": {"type": "invalid_input", "message": str(exc)}}
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/world/generate", response_model=WorldPayload)
    def world_generate(req: GenerateRequest) -> WorldPayload:
        world = generate_synthetic_world(
            req.population, req.grid.build(), req.frames.build(), req.mobility.build(), req.seed
        )
        return WorldPayload.from_core(world)

    @app.post("/world/discretize", response_model=WorldPayload)
    def world_discretize(req: DiscretizeRequest) -> WorldPayload:
        grid, frames = req.grid.build(), req.frames.build()
        trajectories = discretize(req.points, grid, frames)
        return WorldPayload.from_core(WorldModel.from_trajectories(grid, frames, trajectories))

    @app.post("/world/sample", response_model=WorldPayload)
    def world_sample(req: SampleRequest) -> WorldPayload:
        return WorldPayload.from_core(
            sample_small_world(req.world.to_core(), req.fraction, req.seed)
        )

    @app.post("/metrics/idi", response_model=IdiResponse)
    def metrics_idi(req: IdiRequest) -> IdiResponse:
        window = None
        if req.window is not None:
            window = TimeWindow(req.window.start_frame, req.window.end_frame)
        report = compute_idi(req.world.to_core(), window)
        return IdiResponse(**report.to_dict())

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        world = req.world.to_core()
        series = simulate_agents(
            world,
            req.seir.build(),
            req.contact.build(),
            req.initial_infected,
            req.seed,
            frame_dt=world.frames.frame_duration / req.seir.time_unit_s,
            track_cells=req.track_cells,
        )
        per_cell_csv = None if series.per_cell is None else render_per_cell_csv(series.per_cell)
        return SimulateResponse(series=SeriesModel.from_core(series), per_cell_csv=per_cell_csv)

    @app.post("/scaling/report")
    def scaling_report(req: ScalingReportRequest) -> dict:
        series = None if req.series_small is None else req.series_small.to_core()
        return build_scaling_report(
            req.idi_small, req.idi_real, req.k_r, req.n, req.exponent, series,
            req.threshold_fraction,
        )

    @app.post("/scaling/map-to-real", response_model=SeriesModel)
    def scaling_map(req: MapToRealRequest) -> SeriesModel:
        return SeriesModel.from_core(map_to_real(req.series.to_core(), req.f))

    @app.post("/policy/apply", response_model=WorldPayload)
    def policy_apply(req: PolicyApplyRequest) -> WorldPayload:
        return WorldPayload.from_core(apply_policy(req.world.to_core(), req.policy))

    @app.post("/policy/compare", response_model=PolicyCompareResponse)
    def policy_compare(req: PolicyCompareRequest) -> PolicyCompareResponse:
        world = req.world.to_core()
        comparison = compare_policies(
            world,
            req.policy_a,
            req.policy_b,
            req.seir.build(),
            req.contact.build(),
            req.k,
            req.seeds,
            seed=req.seed,
            initial_infected=req.initial_infected,
            frame_dt=world.frames.frame_duration / req.seir.time_unit_s,
        )
        return PolicyCompareResponse(
            idi_a=comparison.idi_a,
            idi_b=comparison.idi_b,
            time_ratio=comparison.time_ratio,
            factor_ratio=comparison.factor_ratio,
            attack_rate_a=comparison.attack_rate_a,
            attack_rate_b=comparison.attack_rate_b,
            attack_rate_difference=comparison.attack_rate_difference,
            seeds=comparison.seeds,
            series_a=SeriesModel.from_core(comparison.series_a),
            series_b=SeriesModel.from_core(comparison.series_b),
        )

    @app.post("/pipeline/run", response_model=PipelineResponse)
    def pipeline_run(req: PipelineRequest) -> PipelineResponse:
        artifacts = run_pipeline(req.config, req.stages)
        return PipelineResponse(artifacts=[ArtifactModel.from_core(a) for a in artifacts])

    @app.post("/pipeline/validate", response_model=ValidateResponse)
    def pipeline_validate(req: ValidateRequest) -> ValidateResponse:
        report = validate_scaling(req.config)
        return ValidateResponse(
            report=report,
            artifacts=[ArtifactModel.from_core(a) for a in validation_artifacts(report)],
        )

    return app


app = create_app()
