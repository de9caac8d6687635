"""Mobility statistics driving the scale-up factors.

The central quantity is IDI, the average crowd flow per grid cell over a
time window: the sum over agents of the number of distinct cells each one
visits in the window, divided by the number of cells. From it follow the
per-person cell-visit probability rho1, the pair probability rho2 = rho1^2,
and the expected co-located pair count conn = IDI^2.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .world import ABSENT, Trajectory, WorldModel

__all__ = ["TimeWindow", "IdiReport", "visited_cells_count", "compute_idi"]


@dataclass(frozen=True)
class TimeWindow:
    """Half-open frame range [start_frame, end_frame)."""

    start_frame: int
    end_frame: int

    def __post_init__(self) -> None:
        if not (0 <= self.start_frame < self.end_frame):
            raise ValueError(
                f"window [{self.start_frame}, {self.end_frame}) must satisfy 0 <= start < end"
            )

    @classmethod
    def full(cls, world: WorldModel) -> "TimeWindow":
        return cls(0, world.frames.horizon)

    def clipped_to(self, horizon: int) -> "TimeWindow":
        if self.end_frame > horizon:
            raise ValueError(f"window end {self.end_frame} exceeds horizon {horizon}")
        return self


@dataclass(frozen=True)
class IdiReport:
    """Crowd-flow metrics for one world and window.

    ``conn`` uses the large-population approximation of the pair count
    (M^2 pairs); ``conn_exact`` keeps the exact M(M-1) factor.
    """

    idi: float
    avg_c: float
    sum_c: int
    m: int
    n_cell: int
    rho1: float
    rho2: float
    conn: float
    conn_exact: float

    def to_dict(self) -> dict:
        return asdict(self)


def visited_cells_count(trajectory: Trajectory, window: TimeWindow) -> int:
    """Number of distinct cells the agent visits within the window."""
    if len(trajectory.visits) == 0:
        return 0
    frames = trajectory.visits[:, 0]
    mask = (frames >= window.start_frame) & (frames < window.end_frame)
    return int(np.unique(trajectory.visits[mask, 1]).size)


def distinct_cells_per_agent(world: WorldModel, window: TimeWindow) -> np.ndarray:
    """Distinct-cell count c_i for every agent, vectorized over the window."""
    window.clipped_to(world.frames.horizon)
    seg = np.sort(world.cells[:, window.start_frame : window.end_frame], axis=1)
    distinct = (seg[:, 1:] != seg[:, :-1]).sum(axis=1) + 1
    # ABSENT sorts first; drop it from the count where it occurs.
    return np.asarray(distinct - (seg[:, 0] == ABSENT), dtype=np.int64)


def compute_idi(world: WorldModel, window: TimeWindow | None = None) -> IdiReport:
    """Crowd-flow report over a window (defaults to the whole horizon)."""
    if world.population < 1:
        raise ValueError("cannot compute IDI of an empty population")
    if window is None:
        window = TimeWindow.full(world)
    c = distinct_cells_per_agent(world, window)
    m = world.population
    n_cell = world.grid.n_cell
    sum_c = int(c.sum())
    idi = sum_c / n_cell
    avg_c = sum_c / m
    rho1 = avg_c / n_cell
    return IdiReport(
        idi=idi,
        avg_c=avg_c,
        sum_c=sum_c,
        m=m,
        n_cell=n_cell,
        rho1=rho1,
        rho2=rho1 * rho1,
        conn=idi * idi,
        conn_exact=idi * idi * (m - 1) / m,
    )
