"""Flat-file codecs for every artifact the toolkit emits.

All writers produce deterministic text (sorted JSON keys, shortest float
repr, LF endings) so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .seir import EpidemicSeries
from .world import GridSpec, TimeFrameSpec, Trajectory, WorldModel

POINTS_HEADER = ["user_id", "timestamp_s", "x_m", "y_m"]
TRAJECTORY_HEADER = ["user_id", "frame", "cell_id"]
SERIES_HEADER = ["frame", "s", "e", "i", "r"]
PER_CELL_HEADER = ["frame", "cell_id", "infected"]


def json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _num(value: float) -> str:
    """Shortest decimal form; integral floats render without the trailing .0."""
    f = float(value)
    return repr(int(f)) if f.is_integer() else repr(f)


# -- raw points ---------------------------------------------------------------

def read_points_csv(path: str | Path) -> list[tuple[str, float, float, float]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return parse_points_csv(handle.read())


def parse_points_csv(text: str) -> list[tuple[str, float, float, float]]:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header != POINTS_HEADER:
        raise ValueError(f"expected points header {POINTS_HEADER}, got {header}")
    return [(row[0], float(row[1]), float(row[2]), float(row[3])) for row in reader if row]


def render_points_csv(points: Iterable[tuple[str, float, float, float]]) -> str:
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(POINTS_HEADER)
    for user_id, t, x, y in points:
        writer.writerow([user_id, _num(t), _num(x), _num(y)])
    return out.getvalue()


# -- discretized trajectories -------------------------------------------------

def render_trajectories_csv(trajectories: Iterable[Trajectory]) -> str:
    out = _io.StringIO()
    out.write(",".join(TRAJECTORY_HEADER) + "\n")
    for traj in trajectories:
        for frame, cell in traj.visits:
            out.write(f"{traj.user_id},{frame},{cell}\n")
    return out.getvalue()


def parse_trajectories_csv(text: str) -> list[Trajectory]:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header != TRAJECTORY_HEADER:
        raise ValueError(f"expected trajectory header {TRAJECTORY_HEADER}, got {header}")
    visits: dict[str, list[tuple[int, int]]] = {}
    order: list[str] = []
    for row in reader:
        if not row:
            continue
        user_id, frame, cell = row[0], int(row[1]), int(row[2])
        if user_id not in visits:
            visits[user_id] = []
            order.append(user_id)
        visits[user_id].append((frame, cell))
    return [
        Trajectory(user_id, np.array(visits[user_id], dtype=np.int64)) for user_id in order
    ]


# -- world metadata -----------------------------------------------------------

def render_world_meta(world: WorldModel) -> str:
    return json_dumps(
        {
            "grid": {
                "rows": world.grid.rows,
                "cols": world.grid.cols,
                "cell_size": world.grid.cell_size,
                "origin": list(world.grid.origin),
            },
            "frame_duration": world.frames.frame_duration,
            "horizon": world.frames.horizon,
            "population": world.population,
        }
    )


def parse_world_meta(text: str) -> tuple[GridSpec, TimeFrameSpec, int]:
    meta = json.loads(text)
    grid = GridSpec(
        rows=meta["grid"]["rows"],
        cols=meta["grid"]["cols"],
        cell_size=meta["grid"]["cell_size"],
        origin=tuple(meta["grid"]["origin"]),
    )
    frames = TimeFrameSpec(meta["frame_duration"], meta["horizon"])
    return grid, frames, int(meta["population"])


def save_world(world: WorldModel, directory: str | Path, stem: str = "world") -> dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta_path = directory / f"{stem}_meta.json"
    traj_path = directory / f"{stem}_trajectories.csv"
    meta_path.write_text(render_world_meta(world), encoding="utf-8")
    traj_path.write_text(render_trajectories_csv(world), encoding="utf-8")
    return {"meta": meta_path, "trajectories": traj_path}


def load_world(meta_path: str | Path, trajectories_path: str | Path) -> WorldModel:
    grid, frames, population = parse_world_meta(Path(meta_path).read_text(encoding="utf-8"))
    trajectories = parse_trajectories_csv(Path(trajectories_path).read_text(encoding="utf-8"))
    world = WorldModel.from_trajectories(grid, frames, trajectories)
    if world.population != population:
        raise ValueError(
            f"metadata says population {population} but trajectory file has {world.population}"
        )
    return world


# -- epidemic series ----------------------------------------------------------

def render_series_csv(series: EpidemicSeries) -> str:
    out = _io.StringIO()
    out.write(",".join(SERIES_HEADER) + "\n")
    for t in range(len(series)):
        out.write(
            f"{t},{_num(series.s[t])},{_num(series.e[t])},{_num(series.i[t])},{_num(series.r[t])}\n"
        )
    return out.getvalue()


def parse_series_csv(text: str) -> EpidemicSeries:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header != SERIES_HEADER:
        raise ValueError(f"expected series header {SERIES_HEADER}, got {header}")
    rows = [[float(v) for v in row[1:]] for row in reader if row]
    data = np.array(rows, dtype=np.float64).reshape(-1, 4)
    return EpidemicSeries(s=data[:, 0], e=data[:, 1], i=data[:, 2], r=data[:, 3])


def render_per_cell_csv(per_cell: np.ndarray) -> str:
    """Sparse per-cell infected counts; zero rows are omitted."""
    out = _io.StringIO()
    out.write(",".join(PER_CELL_HEADER) + "\n")
    frames, cells = np.nonzero(per_cell)
    for t, c in zip(frames, cells):
        out.write(f"{t},{c},{_num(per_cell[t, c])}\n")
    return out.getvalue()


def parse_per_cell_csv(text: str, horizon: int, n_cell: int) -> np.ndarray:
    reader = csv.reader(_io.StringIO(text))
    header = next(reader, None)
    if header != PER_CELL_HEADER:
        raise ValueError(f"expected per-cell header {PER_CELL_HEADER}, got {header}")
    out = np.zeros((horizon, n_cell), dtype=np.float64)
    for row in reader:
        if row:
            out[int(row[0]), int(row[1])] = float(row[2])
    return out
