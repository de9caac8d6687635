"""Mobility-restriction policies as pure trajectory transformations.

A policy rewrites visits (never deletes them): restricted visits are
redirected to the agent's home cell, so confined agents still contribute to
cell density at home. The home cell is the agent's most frequent cell over
the whole horizon, ties to the lowest cell id; agents with no visits at all
are left untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, Field

from . import scaling
from .metrics import TimeWindow, compute_idi
from .rng import derive_seed, substream
from .seir import ContactModel, EpidemicSeries, SeirParams, simulate_agents
from .world import ABSENT, WorldModel

__all__ = [
    "Curfew",
    "Lockdown",
    "StayHome",
    "MobilityCap",
    "PolicySpec",
    "PolicyComparison",
    "home_cells",
    "apply_policy",
    "compare_policies",
]


class Curfew(BaseModel):
    """Confine everyone to home during the given frames of the day."""

    type: Literal["curfew"] = "curfew"
    restricted_frames: list[int]

    model_config = {"frozen": True}


class Lockdown(BaseModel):
    """Close specific cells; visits there are redirected home."""

    type: Literal["lockdown"] = "lockdown"
    closed_cells: list[int]

    model_config = {"frozen": True}


class StayHome(BaseModel):
    """Pin a seeded uniform fraction of agents to their home cell."""

    type: Literal["stay_home"] = "stay_home"
    fraction: float = Field(ge=0.0, le=1.0)
    seed: int = 0

    model_config = {"frozen": True}


class MobilityCap(BaseModel):
    """Cap the distinct cells an agent may visit per day (first-visited kept)."""

    type: Literal["mobility_cap"] = "mobility_cap"
    max_distinct_cells_per_day: int = Field(ge=1)

    model_config = {"frozen": True}


AnyPolicy = Curfew | Lockdown | StayHome | MobilityCap
PolicySpec = Annotated[
    Union[Curfew, Lockdown, StayHome, MobilityCap], Field(discriminator="type")
]


@dataclass(frozen=True)
class PolicyComparison:
    """Side-by-side impact of two policies on one world.

    ``time_ratio`` compares predicted spread timescales via the IDI ratio;
    ``factor_ratio`` compares number scaling factors via exp(k * (IDI_a -
    IDI_b)). Mean curves and attack rates come from seeded simulations that
    share per-replicate seeds across the two policies.
    """

    idi_a: float
    idi_b: float
    time_ratio: float
    factor_ratio: float
    series_a: EpidemicSeries
    series_b: EpidemicSeries
    attack_rate_a: float
    attack_rate_b: float
    attack_rate_difference: float
    seeds: int


def home_cells(world: WorldModel) -> np.ndarray:
    """Most-frequent cell per agent over the full horizon (ties: lowest id).

    Agents with no visits get ABSENT.
    """
    homes = np.full(world.population, ABSENT, dtype=np.int64)
    for idx in range(world.population):
        row = world.cells[idx]
        visited = row[row != ABSENT]
        if visited.size:
            homes[idx] = np.bincount(visited).argmax()
    return homes


def _validate(world: WorldModel, policy: AnyPolicy) -> None:
    if isinstance(policy, Curfew):
        fpd = world.frames.frames_per_day
        bad = [f for f in policy.restricted_frames if not (0 <= f < fpd)]
        if bad:
            raise ValueError(f"curfew frames {bad} outside the day (frames_per_day={fpd})")
    elif isinstance(policy, Lockdown):
        bad = [c for c in policy.closed_cells if not (0 <= c < world.grid.n_cell)]
        if bad:
            raise ValueError(f"lockdown cells {bad} outside the grid ({world.grid.n_cell} cells)")


def apply_policy(world: WorldModel, policy: AnyPolicy) -> WorldModel:
    """Transformed copy of the world; population and frames are unchanged."""
    _validate(world, policy)
    homes = home_cells(world)
    cells = world.cells.copy()
    has_home = homes != ABSENT

    if isinstance(policy, Curfew):
        frame_of_day = np.arange(world.frames.horizon) % world.frames.frames_per_day
        cols = np.isin(frame_of_day, list(policy.restricted_frames))
        seg = cells[:, cols]
        redirect = (seg != ABSENT) & has_home[:, None]
        seg[redirect] = np.broadcast_to(homes[:, None], seg.shape)[redirect]
        cells[:, cols] = seg
    elif isinstance(policy, Lockdown):
        closed = np.isin(cells, list(policy.closed_cells)) & (cells != ABSENT)
        closed &= has_home[:, None]
        cells[closed] = np.broadcast_to(homes[:, None], cells.shape)[closed]
    elif isinstance(policy, StayHome):
        count = int(policy.fraction * world.population)
        if count > 0:
            picked = substream(policy.seed, "stay_home").choice(
                world.population, size=count, replace=False
            )
            for idx in picked:
                if has_home[idx]:
                    row = cells[idx]
                    row[row != ABSENT] = homes[idx]
    elif isinstance(policy, MobilityCap):
        cap = policy.max_distinct_cells_per_day
        fpd = world.frames.frames_per_day
        for idx in range(world.population):
            if not has_home[idx]:
                continue
            row = cells[idx]
            for start in range(0, world.frames.horizon, fpd):
                day = row[start : start + fpd]
                visited = day != ABSENT
                if not visited.any():
                    continue
                uniq, first_pos = np.unique(day[visited], return_index=True)
                kept = uniq[np.argsort(first_pos)][:cap]
                over = visited & ~np.isin(day, kept)
                day[over] = homes[idx]
    else:
        raise ValueError(f"unknown policy {policy!r}")

    return WorldModel(world.grid, world.frames, world.user_ids, cells)


def compare_policies(
    world: WorldModel,
    a: AnyPolicy | None,
    b: AnyPolicy | None,
    params: SeirParams,
    contact: ContactModel,
    k: float,
    seeds: int,
    seed: int = 0,
    initial_infected: int = 1,
    frame_dt: float | None = None,
) -> PolicyComparison:
    """Apply two policies (None = unrestricted) and compare their outcomes.

    Simulation replicate j uses the same derived seed under both policies,
    so comparing a policy with itself reproduces identical curves.
    """
    if seeds < 1:
        raise ValueError(f"seeds must be at least 1, got {seeds}")
    world_a = apply_policy(world, a) if a is not None else world
    world_b = apply_policy(world, b) if b is not None else world
    window = TimeWindow.full(world)
    idi_a = compute_idi(world_a, window).idi
    idi_b = compute_idi(world_b, window).idi
    time_ratio = scaling.time_scaling_ratio(idi_a, idi_b).ratio
    factor_ratio = scaling.policy_factor_ratio(idi_a, idi_b, k)

    series_a = _mean_series(world_a, params, contact, initial_infected, seed, seeds, frame_dt)
    series_b = _mean_series(world_b, params, contact, initial_infected, seed, seeds, frame_dt)
    attack_a = _attack_rate(series_a)
    attack_b = _attack_rate(series_b)
    return PolicyComparison(
        idi_a=idi_a,
        idi_b=idi_b,
        time_ratio=time_ratio,
        factor_ratio=factor_ratio,
        series_a=series_a,
        series_b=series_b,
        attack_rate_a=attack_a,
        attack_rate_b=attack_b,
        attack_rate_difference=attack_a - attack_b,
        seeds=seeds,
    )


def _mean_series(
    world: WorldModel,
    params: SeirParams,
    contact: ContactModel,
    initial_infected: int,
    seed: int,
    seeds: int,
    frame_dt: float | None,
) -> EpidemicSeries:
    acc = None
    for j in range(seeds):
        run = simulate_agents(
            world, params, contact, initial_infected, derive_seed(seed, "replicate", j),
            frame_dt=frame_dt,
        )
        cur = np.stack([run.s, run.e, run.i, run.r]).astype(np.float64)
        acc = cur if acc is None else acc + cur
    acc /= seeds
    return EpidemicSeries(s=acc[0], e=acc[1], i=acc[2], r=acc[3], dt=1.0)


def _attack_rate(series: EpidemicSeries) -> float:
    return float(series.cumulative_infected()[-1] / series.population)
