"""Grids, time frames, trajectories, and world models.

A world is a population of agents whose movement has been discretized onto
a uniform cell grid and a fixed frame clock. Worlds either come from raw
point data (``discretize``) or from the built-in synthetic commuting
generator, and can be uniformly subsampled into smaller worlds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import substream

__all__ = [
    "GridSpec",
    "TimeFrameSpec",
    "Trajectory",
    "WorldModel",
    "MobilityParams",
    "discretize",
    "generate_synthetic_world",
    "sample_small_world",
]

ABSENT = -1  # cell value for frames where an agent has no known location


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid of square cells covering the study area.

    Cell ids are row-major: ``cell_id = row * cols + col``.
    """

    rows: int
    cols: int
    cell_size: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must have at least one row and column, got {self.rows}x{self.cols}")
        if self.cell_size <= 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")

    @property
    def n_cell(self) -> int:
        return self.rows * self.cols

    def cell_index(self, row: int, col: int) -> int:
        return row * self.cols + col

    def cell_rowcol(self, cell_id: int) -> tuple[int, int]:
        return divmod(cell_id, self.cols)

    def cell_of_point(self, x: float, y: float) -> int:
        """Cell containing point (x, y) in meters; raises if out of bounds."""
        col = math.floor((x - self.origin[0]) / self.cell_size)
        row = math.floor((y - self.origin[1]) / self.cell_size)
        if not (0 <= col < self.cols and 0 <= row < self.rows):
            raise ValueError(f"point ({x}, {y}) lies outside the grid bounds")
        return self.cell_index(row, col)


@dataclass(frozen=True)
class TimeFrameSpec:
    """Frame clock: ``horizon`` frames of ``frame_duration`` seconds each.

    ``frame_duration`` must divide a day so frames-of-day are well defined.
    """

    frame_duration: float
    horizon: int

    def __post_init__(self) -> None:
        if self.frame_duration <= 0:
            raise ValueError(f"frame_duration must be positive, got {self.frame_duration}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1 frame, got {self.horizon}")
        per_day = 86400.0 / self.frame_duration
        if abs(per_day - round(per_day)) > 1e-9 or round(per_day) < 1:
            raise ValueError(f"frame_duration {self.frame_duration}s does not divide a day evenly")

    @property
    def frames_per_day(self) -> int:
        return round(86400.0 / self.frame_duration)

    @property
    def total_seconds(self) -> float:
        return self.horizon * self.frame_duration

    def frame_of(self, timestamp_s: float) -> int:
        """Frame index containing a timestamp in [0, total_seconds)."""
        if not (0 <= timestamp_s < self.total_seconds):
            raise ValueError(f"timestamp {timestamp_s}s outside [0, {self.total_seconds})")
        return min(int(timestamp_s / self.frame_duration), self.horizon - 1)


@dataclass(frozen=True)
class Trajectory:
    """One agent's per-frame cell occupancy.

    ``visits`` is an (n, 2) int array of (frame, cell_id) rows with strictly
    increasing frames; frames without a row mean the agent's location is
    unknown and it does not take part in any cell that frame.
    """

    user_id: str
    visits: np.ndarray

    def __post_init__(self) -> None:
        visits = np.asarray(self.visits, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "visits", visits)
        if len(visits) > 0:
            frames = visits[:, 0]
            if (np.diff(frames) <= 0).any():
                raise ValueError(f"trajectory {self.user_id!r}: frame indices must strictly increase")
            if frames[0] < 0:
                raise ValueError(f"trajectory {self.user_id!r}: negative frame index")
            if (visits[:, 1] < 0).any():
                raise ValueError(f"trajectory {self.user_id!r}: negative cell id")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.user_id == other.user_id and np.array_equal(self.visits, other.visits)


class WorldModel:
    """A population of trajectories over a shared grid and frame clock.

    Internally the population is a dense (M, horizon) cell matrix with
    ``ABSENT`` marking frames without a visit; that is what the simulator
    and the mobility metrics operate on. ``trajectories`` materializes the
    per-agent visit view on demand.
    """

    def __init__(
        self,
        grid: GridSpec,
        frames: TimeFrameSpec,
        user_ids: Sequence[str],
        cells: np.ndarray,
    ) -> None:
        cells = np.asarray(cells)
        if cells.ndim != 2 or cells.shape != (len(user_ids), frames.horizon):
            raise ValueError(
                f"cell matrix shape {cells.shape} does not match "
                f"{len(user_ids)} agents x {frames.horizon} frames"
            )
        if len(user_ids) < 1:
            raise ValueError("a world needs at least one agent")
        if len(set(user_ids)) != len(user_ids):
            raise ValueError("user ids must be unique")
        if cells.size and (cells.min() < ABSENT or cells.max() >= grid.n_cell):
            raise ValueError(f"cell ids must lie in [0, {grid.n_cell}) or be {ABSENT}")
        self.grid = grid
        self.frames = frames
        self.user_ids = tuple(user_ids)
        self.cells = cells

    @property
    def population(self) -> int:
        return len(self.user_ids)

    @classmethod
    def from_trajectories(
        cls, grid: GridSpec, frames: TimeFrameSpec, trajectories: Iterable[Trajectory]
    ) -> "WorldModel":
        trajectories = list(trajectories)
        cells = np.full((len(trajectories), frames.horizon), ABSENT, dtype=cell_dtype(grid.n_cell))
        for i, traj in enumerate(trajectories):
            if len(traj.visits) > 0:
                frames_idx = traj.visits[:, 0]
                if frames_idx[-1] >= frames.horizon:
                    raise ValueError(f"trajectory {traj.user_id!r}: frame beyond horizon {frames.horizon}")
                cells[i, frames_idx] = traj.visits[:, 1]
        return cls(grid, frames, [t.user_id for t in trajectories], cells)

    def trajectory(self, index: int) -> Trajectory:
        row = self.cells[index]
        present = np.flatnonzero(row != ABSENT)
        visits = np.column_stack([present, row[present]]).astype(np.int64)
        return Trajectory(self.user_ids[index], visits)

    @property
    def trajectories(self) -> list[Trajectory]:
        return [self.trajectory(i) for i in range(self.population)]

    def __iter__(self) -> Iterator[Trajectory]:
        return (self.trajectory(i) for i in range(self.population))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorldModel):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.frames == other.frames
            and self.user_ids == other.user_ids
            and np.array_equal(self.cells, other.cells)
        )

    def __repr__(self) -> str:
        return (
            f"WorldModel(M={self.population}, grid={self.grid.rows}x{self.grid.cols}, "
            f"horizon={self.frames.horizon})"
        )


def cell_dtype(n_cell: int) -> np.dtype:
    """Smallest signed integer dtype that can hold cell ids plus ABSENT."""
    return np.dtype(np.int16) if n_cell <= np.iinfo(np.int16).max else np.dtype(np.int32)


def discretize(
    points: Iterable[tuple[str, float, float, float]],
    grid: GridSpec,
    frames: TimeFrameSpec,
) -> list[Trajectory]:
    """Assign each (user, frame) with data to the longest-dwell cell.

    ``points`` are (user_id, timestamp_s, x_m, y_m) records; per user the
    timestamps must strictly increase. A point pins the user's cell from its
    timestamp until the next point (the last point holds until the end of
    its frame). Every frame containing at least one point gets one visit:
    the cell with the longest total dwell inside that frame, ties going to
    the lowest cell id. Frames without points get no visit.
    """
    per_user: dict[str, list[tuple[float, int]]] = {}
    order: list[str] = []
    for rec_no, (user_id, timestamp, x, y) in enumerate(points):
        if not (0 <= timestamp < frames.total_seconds):
            raise ValueError(
                f"record {rec_no} (user {user_id!r}): timestamp {timestamp}s "
                f"outside [0, {frames.total_seconds})"
            )
        try:
            cell = grid.cell_of_point(x, y)
        except ValueError as exc:
            raise ValueError(f"record {rec_no} (user {user_id!r}): {exc}") from None
        if user_id not in per_user:
            per_user[user_id] = []
            order.append(user_id)
        track = per_user[user_id]
        if track and timestamp <= track[-1][0]:
            raise ValueError(
                f"record {rec_no} (user {user_id!r}): timestamp {timestamp}s "
                f"does not increase past {track[-1][0]}s"
            )
        track.append((timestamp, cell))

    out = []
    for user_id in order:
        track = per_user[user_id]
        # Each point holds its cell until the next point; the final point
        # holds until the end of the frame it falls in.
        last_t, last_cell = track[-1]
        end_of_last = (frames.frame_of(last_t) + 1) * frames.frame_duration
        spans = [
            (track[k][0], track[k + 1][0], track[k][1]) for k in range(len(track) - 1)
        ] + [(last_t, end_of_last, last_cell)]
        visits = []
        for f in sorted({frames.frame_of(t) for t, _ in track}):
            fs = f * frames.frame_duration
            fe = fs + frames.frame_duration
            dwell: dict[int, float] = {}
            for a, b, cell in spans:
                overlap = min(b, fe) - max(a, fs)
                if overlap > 0:
                    dwell[cell] = dwell.get(cell, 0.0) + overlap
            best = max(dwell.items(), key=lambda item: (item[1], -item[0]))[0]
            visits.append((f, best))
        out.append(Trajectory(user_id, np.array(visits, dtype=np.int64)))
    return out


@dataclass(frozen=True)
class MobilityParams:
    """Knobs for the synthetic commuting population.

    Agents pick a home among ``home_anchors`` cells and a workplace among
    ``work_anchors`` cells, commute there daily, and take ``excursion_rate``
    random side trips per day whose displacement from home averages
    ``mean_trip_length`` cells.
    """

    home_anchors: int = 40
    work_anchors: int = 12
    excursion_rate: float = 1.0
    mean_trip_length: float = 3.0

    def __post_init__(self) -> None:
        if self.home_anchors < 1 or self.work_anchors < 1:
            raise ValueError("anchor counts must be at least 1")
        if self.excursion_rate < 0:
            raise ValueError("excursion_rate must be non-negative")
        if self.mean_trip_length <= 0:
            raise ValueError("mean_trip_length must be positive")


# Commute timing, as fractions of a day (roughly 08:00 and 18:00 with
# agent-to-agent jitter).
_LEAVE_MEAN, _LEAVE_SD, _LEAVE_LO, _LEAVE_HI = 1 / 3, 0.04, 0.10, 0.45
_RETURN_MEAN, _RETURN_SD, _RETURN_LO, _RETURN_HI = 0.75, 0.05, 0.55, 0.95
_EXCURSION_DUR_LO, _EXCURSION_DUR_HI = 0.02, 0.08  # fraction of a day


def generate_synthetic_world(
    population: int,
    grid: GridSpec,
    frames: TimeFrameSpec,
    mobility: MobilityParams,
    seed: int,
) -> WorldModel:
    """Deterministic two-anchor commuting population with random excursions.

    Every agent's stream is derived from (seed, agent index), so the output
    is identical run-to-run and agents could be generated in parallel.
    """
    if population < 1:
        raise ValueError(f"population must be at least 1, got {population}")
    n_cell = grid.n_cell
    if mobility.home_anchors > n_cell or mobility.work_anchors > n_cell:
        raise ValueError(
            f"grid with {n_cell} cells is too small for "
            f"{mobility.home_anchors} home / {mobility.work_anchors} work anchors"
        )

    anchor_rng = substream(seed, "anchors")
    home_anchor_cells = anchor_rng.choice(n_cell, size=mobility.home_anchors, replace=False)
    work_anchor_cells = anchor_rng.choice(n_cell, size=mobility.work_anchors, replace=False)

    fpd = frames.frames_per_day
    horizon = frames.horizon
    n_days = math.ceil(horizon / fpd)
    cells = np.empty((population, horizon), dtype=cell_dtype(n_cell))

    for idx in range(population):
        rng = substream(seed, "agent", idx)
        home = int(home_anchor_cells[rng.integers(mobility.home_anchors)])
        work = int(work_anchor_cells[rng.integers(mobility.work_anchors)])
        leave = round(fpd * float(np.clip(rng.normal(_LEAVE_MEAN, _LEAVE_SD), _LEAVE_LO, _LEAVE_HI)))
        back = round(fpd * float(np.clip(rng.normal(_RETURN_MEAN, _RETURN_SD), _RETURN_LO, _RETURN_HI)))
        leave = max(0, min(leave, fpd))
        back = max(leave, min(back, fpd))
        day = np.full(fpd, home, dtype=cells.dtype)
        day[leave:back] = work
        row = np.tile(day, n_days)[:horizon]

        if mobility.excursion_rate > 0:
            home_row, home_col = grid.cell_rowcol(home)
            for d in range(n_days):
                for _ in range(rng.poisson(mobility.excursion_rate)):
                    start = d * fpd + int(rng.integers(fpd))
                    if start >= horizon:
                        continue
                    dur = max(1, round(fpd * rng.uniform(_EXCURSION_DUR_LO, _EXCURSION_DUR_HI)))
                    dist = max(1.0, rng.exponential(mobility.mean_trip_length))
                    angle = rng.uniform(0.0, 2.0 * math.pi)
                    dest_row = int(np.clip(home_row + round(dist * math.sin(angle)), 0, grid.rows - 1))
                    dest_col = int(np.clip(home_col + round(dist * math.cos(angle)), 0, grid.cols - 1))
                    row[start : min(start + dur, horizon)] = grid.cell_index(dest_row, dest_col)
        cells[idx] = row

    user_ids = tuple(f"u{idx:06d}" for idx in range(population))
    return WorldModel(grid, frames, user_ids, cells)


def sample_small_world(world: WorldModel, fraction: float, seed: int) -> WorldModel:
    """Uniform subsample of floor(fraction * M) agents, without replacement.

    Selected trajectories are preserved bit-exactly, in world order; grid
    and frame clock are unchanged.
    """
    if not (0 < fraction <= 1):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    m = math.floor(fraction * world.population)
    if m < 1:
        raise ValueError(
            f"fraction {fraction} of population {world.population} leaves no agents"
        )
    picked = substream(seed, "sample").choice(world.population, size=m, replace=False)
    picked.sort()
    return WorldModel(
        world.grid,
        world.frames,
        [world.user_ids[i] for i in picked],
        world.cells[picked].copy(),
    )
