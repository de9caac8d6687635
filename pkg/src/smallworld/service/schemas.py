"""Request/response models for the HTTP service.

Worlds and epidemic series cross the wire as explicit JSON payloads; the
converters below map them to and from the core numpy-backed types.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field

from ..config import (
    ContactConfig,
    ExperimentConfig,
    FrameConfig,
    GridConfig,
    MobilityConfig,
    SeirConfig,
)
from ..pipeline import Artifact
from ..policy import PolicySpec
from ..seir import EpidemicSeries
from ..world import Trajectory, WorldModel

__all__ = [
    "TrajectoryModel",
    "WorldPayload",
    "SeriesModel",
    "WindowModel",
    "GenerateRequest",
    "DiscretizeRequest",
    "SampleRequest",
    "IdiRequest",
    "IdiResponse",
    "SimulateRequest",
    "SimulateResponse",
    "ScalingReportRequest",
    "MapToRealRequest",
    "PolicyApplyRequest",
    "PolicyCompareRequest",
    "PolicyCompareResponse",
    "PipelineRequest",
    "ArtifactModel",
    "PipelineResponse",
    "ValidateRequest",
    "ValidateResponse",
]


class TrajectoryModel(BaseModel):
    user_id: str
    visits: list[tuple[int, int]]

    @classmethod
    def from_core(cls, traj: Trajectory) -> "TrajectoryModel":
        return cls(user_id=traj.user_id, visits=[(int(f), int(c)) for f, c in traj.visits])

    def to_core(self) -> Trajectory:
        return Trajectory(self.user_id, np.array(self.visits, dtype=np.int64).reshape(-1, 2))


class WorldPayload(BaseModel):
    grid: GridConfig
    frames: FrameConfig
    trajectories: list[TrajectoryModel]

    @classmethod
    def from_core(cls, world: WorldModel) -> "WorldPayload":
        return cls(
            grid=GridConfig(
                rows=world.grid.rows,
                cols=world.grid.cols,
                cell_size=world.grid.cell_size,
                origin=world.grid.origin,
            ),
            frames=FrameConfig(
                frame_duration=world.frames.frame_duration, horizon=world.frames.horizon
            ),
            trajectories=[TrajectoryModel.from_core(t) for t in world],
        )

    def to_core(self) -> WorldModel:
        return WorldModel.from_trajectories(
            self.grid.build(), self.frames.build(), (t.to_core() for t in self.trajectories)
        )


class SeriesModel(BaseModel):
    s: list[float]
    e: list[float]
    i: list[float]
    r: list[float]
    dt: float = 1.0
    info: dict | None = None

    @classmethod
    def from_core(cls, series: EpidemicSeries) -> "SeriesModel":
        return cls(
            s=series.s.tolist(),
            e=series.e.tolist(),
            i=series.i.tolist(),
            r=series.r.tolist(),
            dt=series.dt,
            info=series.info,
        )

    def to_core(self) -> EpidemicSeries:
        return EpidemicSeries(
            s=np.asarray(self.s, dtype=np.float64),
            e=np.asarray(self.e, dtype=np.float64),
            i=np.asarray(self.i, dtype=np.float64),
            r=np.asarray(self.r, dtype=np.float64),
            dt=self.dt,
            info=self.info,
        )


class WindowModel(BaseModel):
    start_frame: int = Field(ge=0)
    end_frame: int = Field(ge=1)


class GenerateRequest(BaseModel):
    population: int = Field(ge=1)
    grid: GridConfig
    frames: FrameConfig
    mobility: MobilityConfig = MobilityConfig()
    seed: int = 0


class DiscretizeRequest(BaseModel):
    points: list[tuple[str, float, float, float]]
    grid: GridConfig
    frames: FrameConfig


class SampleRequest(BaseModel):
    world: WorldPayload
    fraction: float = Field(gt=0, le=1)
    seed: int = 0


class IdiRequest(BaseModel):
    world: WorldPayload
    window: WindowModel | None = None


class IdiResponse(BaseModel):
    idi: float
    avg_c: float
    sum_c: int
    m: int
    n_cell: int
    rho1: float
    rho2: float
    conn: float
    conn_exact: float


class SimulateRequest(BaseModel):
    world: WorldPayload
    seir: SeirConfig
    contact: ContactConfig
    initial_infected: int | list[str] = 1
    seed: int = 0
    track_cells: bool = False


class SimulateResponse(BaseModel):
    series: SeriesModel
    per_cell_csv: str | None = None


class ScalingReportRequest(BaseModel):
    idi_small: float
    idi_real: float
    k_r: float = 1.0
    n: int = Field(default=1440, ge=1)
    exponent: int = 1
    series_small: SeriesModel | None = None
    threshold_fraction: float = Field(default=0.1, gt=0, le=1)


class MapToRealRequest(BaseModel):
    series: SeriesModel
    f: float = Field(gt=0)


class PolicyApplyRequest(BaseModel):
    world: WorldPayload
    policy: PolicySpec


class PolicyCompareRequest(BaseModel):
    world: WorldPayload
    policy_a: PolicySpec | None = None
    policy_b: PolicySpec | None = None
    seir: SeirConfig
    contact: ContactConfig
    k: float = 1.0
    seeds: int = Field(default=1, ge=1)
    seed: int = 0
    initial_infected: int = 1


class PolicyCompareResponse(BaseModel):
    idi_a: float
    idi_b: float
    time_ratio: float
    factor_ratio: float
    attack_rate_a: float
    attack_rate_b: float
    attack_rate_difference: float
    seeds: int
    series_a: SeriesModel
    series_b: SeriesModel


class PipelineRequest(BaseModel):
    config: ExperimentConfig
    stages: list[str] | None = None


class ArtifactModel(BaseModel):
    path: str
    kind: str
    text: str

    @classmethod
    def from_core(cls, artifact: Artifact) -> "ArtifactModel":
        return cls(path=artifact.path, kind=artifact.kind, text=artifact.text)


class PipelineResponse(BaseModel):
    artifacts: list[ArtifactModel]


class ValidateRequest(BaseModel):
    config: ExperimentConfig


class ValidateResponse(BaseModel):
    report: dict
    artifacts: list[ArtifactModel]
