"""Experiment configuration.

One JSON document drives every pipeline stage. All randomness derives from
the single root ``seed`` via (seed, stage-name, index) substreams, so a
config is a complete, reproducible description of an experiment.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, field_validator

from .policy import PolicySpec
from .seir import ContactModel, SeirParams
from .world import GridSpec, MobilityParams, TimeFrameSpec

__all__ = [
    "GridConfig",
    "FrameConfig",
    "MobilityConfig",
    "WorldConfig",
    "SeirConfig",
    "ContactConfig",
    "EpidemicConfig",
    "ScalingConfig",
    "ExperimentConfig",
]


class GridConfig(BaseModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    cell_size: float = Field(default=500.0, gt=0)
    origin: tuple[float, float] = (0.0, 0.0)

    def build(self) -> GridSpec:
        return GridSpec(self.rows, self.cols, self.cell_size, tuple(self.origin))


class FrameConfig(BaseModel):
    frame_duration: float = Field(default=60.0, gt=0)
    horizon: int = Field(ge=1)

    def build(self) -> TimeFrameSpec:
        return TimeFrameSpec(self.frame_duration, self.horizon)


class MobilityConfig(BaseModel):
    home_anchors: int = Field(default=40, ge=1)
    work_anchors: int = Field(default=12, ge=1)
    excursion_rate: float = Field(default=1.0, ge=0)
    mean_trip_length: float = Field(default=3.0, gt=0)

    def build(self) -> MobilityParams:
        return MobilityParams(
            home_anchors=self.home_anchors,
            work_anchors=self.work_anchors,
            excursion_rate=self.excursion_rate,
            mean_trip_length=self.mean_trip_length,
        )


class WorldConfig(BaseModel):
    population: int = Field(ge=1)
    grid: GridConfig
    frames: FrameConfig
    mobility: MobilityConfig = MobilityConfig()


class SeirConfig(BaseModel):
    """Rate constants, expressed per ``time_unit_s`` seconds (default: daily)."""

    beta: float = Field(default=0.0, ge=0)
    t_e: float = Field(gt=0)
    t_r: float = Field(gt=0)
    time_unit_s: float = Field(default=86400.0, gt=0)

    def build(self) -> SeirParams:
        return SeirParams(beta=self.beta, t_e=self.t_e, t_r=self.t_r)


class ContactConfig(BaseModel):
    contact_coeff: float = Field(ge=0)
    transmission_prob: float = Field(ge=0, le=1)

    def build(self) -> ContactModel:
        return ContactModel(
            contact_coeff=self.contact_coeff, transmission_prob=self.transmission_prob
        )


class EpidemicConfig(BaseModel):
    seir: SeirConfig
    contact: ContactConfig
    initial_infected: int = Field(default=1, ge=0)
    track_cells: bool = False


class ScalingConfig(BaseModel):
    """Scale-up options.

    ``exponent`` selects the linear (1) or cubic (3) timescale reading;
    ``n`` is the frame multiplier between the simulation frame and the
    real-world reporting interval and defaults to
    reporting_interval_s / frame_duration. ``k_r`` scales the contact
    ratio, ``k`` the policy factor comparison, and ``threshold_fraction``
    defines time-to-threshold measurements.
    """

    exponent: Literal[1, 3] = 1
    n: int | None = Field(default=None, ge=1)
    k_r: float = Field(default=1.0, ge=0)
    k: float = 1.0
    threshold_fraction: float = Field(default=0.1, gt=0, le=1)


class ExperimentConfig(BaseModel):
    seed: int = 0
    world: WorldConfig
    epidemic: EpidemicConfig
    fractions: list[float] = []
    policies: list[PolicySpec] = []
    scaling: ScalingConfig = ScalingConfig()
    seeds: int = Field(default=1, ge=1)
    reporting_interval_s: float = Field(default=86400.0, gt=0)
    emit_trajectories: bool = False

    @field_validator("fractions")
    @classmethod
    def _fractions_in_range(cls, fractions: list[float]) -> list[float]:
        for f in fractions:
            if not (0 < f <= 1):
                raise ValueError(f"sampling fraction {f} must lie in (0, 1]")
        return fractions

    @property
    def frame_dt(self) -> float:
        """Frame length in the SEIR time unit (for per-frame probabilities)."""
        return self.world.frames.frame_duration / self.epidemic.seir.time_unit_s

    @property
    def reporting_frames(self) -> int:
        """Simulation frames per real-world reporting interval."""
        per = self.reporting_interval_s / self.world.frames.frame_duration
        if abs(per - round(per)) > 1e-9 or round(per) < 1:
            raise ValueError(
                f"reporting_interval_s {self.reporting_interval_s} is not a whole "
                f"number of {self.world.frames.frame_duration}s frames"
            )
        return round(per)

    @property
    def frame_multiplier(self) -> int:
        """The n used in compound number scaling (explicit or derived)."""
        return self.scaling.n if self.scaling.n is not None else self.reporting_frames
