"""Three consistent SEIR engines.

* ``integrate_seir``: fixed-step RK4 on the continuous compartment system
  dS/dt = -beta*S*I, dE/dt = beta*S*I - omega*E, dI/dt = omega*E - gamma*I,
  dR/dt = gamma*I.
* ``build_markov`` / ``step_markov``: the per-step transition-matrix
  discretization of the same system (equivalent to explicit Euler).
* ``simulate_agents``: a stochastic spatial simulator on a world's grid,
  where co-located susceptible/infectious pairs make close contacts with
  probability proportional to cell density.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import substream
from .world import WorldModel

__all__ = [
    "SeirParams",
    "CompartmentState",
    "MarkovTransition",
    "ContactModel",
    "EpidemicSeries",
    "integrate_seir",
    "build_markov",
    "step_markov",
    "simulate_agents",
]

# Agent health states.
SUS, EXP, INF, REC = 0, 1, 2, 3

_NEGATIVE_TOL = 1e-9
CLAMP_WARN_RATIO = 0.01


@dataclass(frozen=True)
class SeirParams:
    """Epidemic rate constants.

    ``beta`` is the bilinear infection coefficient (its normalization must
    match whatever S and I are measured in); ``t_e`` and ``t_r`` are the
    mean latency and recovery times, so ``omega = 1/t_e`` and
    ``gamma = 1/t_r``. Time units are the caller's choice but must be used
    consistently for beta, t_e, t_r, and any step size.
    """

    beta: float
    t_e: float
    t_r: float

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if self.t_e <= 0 or self.t_r <= 0:
            raise ValueError(f"t_e and t_r must be positive, got {self.t_e}, {self.t_r}")

    @property
    def omega(self) -> float:
        return 1.0 / self.t_e

    @property
    def gamma(self) -> float:
        return 1.0 / self.t_r


@dataclass(frozen=True)
class CompartmentState:
    """S/E/I/R occupancy; conserved total across any of the engines."""

    s: float
    e: float
    i: float
    r: float

    @property
    def total(self) -> float:
        return self.s + self.e + self.i + self.r

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.e, self.i, self.r], dtype=np.float64)


@dataclass(frozen=True)
class ContactModel:
    """Density-proportional close-contact model.

    A co-located (S, I) pair makes a close contact in a frame with
    probability ``contact_coeff * n_present_in_cell`` (clamped to 1), and a
    close contact infects with ``transmission_prob``.
    """

    contact_coeff: float
    transmission_prob: float

    def __post_init__(self) -> None:
        if self.contact_coeff < 0:
            raise ValueError(f"contact_coeff must be non-negative, got {self.contact_coeff}")
        if not (0 <= self.transmission_prob <= 1):
            raise ValueError(f"transmission_prob must lie in [0, 1], got {self.transmission_prob}")


@dataclass(frozen=True)
class MarkovTransition:
    """Row-stochastic 4x4 transition matrix over (S, E, I, R) for one step."""

    matrix: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.float64)
        object.__setattr__(self, "matrix", matrix)
        if matrix.shape != (4, 4):
            raise ValueError(f"transition matrix must be 4x4, got {matrix.shape}")
        if ((matrix < 0) | (matrix > 1)).any():
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.abs(matrix.sum(axis=1) - 1.0).max() > 1e-12:
            raise ValueError("transition matrix rows must sum to 1")
        if matrix[REC, REC] != 1.0:
            raise ValueError("recovered must be absorbing")


@dataclass
class EpidemicSeries:
    """Per-step compartment counts, plus optional per-cell infected counts.

    ``dt`` is the time covered by one index step (1.0 means frame-indexed).
    ``per_cell[t, c]`` counts infectious agents present in cell c at frame t.
    ``info`` carries run metadata such as the seed and clamp diagnostics.
    """

    s: np.ndarray
    e: np.ndarray
    i: np.ndarray
    r: np.ndarray
    dt: float = 1.0
    per_cell: np.ndarray | None = None
    info: dict | None = None

    def __len__(self) -> int:
        return len(self.s)

    @property
    def population(self) -> float:
        return float(self.s[0] + self.e[0] + self.i[0] + self.r[0])

    def cumulative_infected(self) -> np.ndarray:
        """Ever-infected count per step (everyone who has left S)."""
        return self.e + self.i + self.r

    def state_at(self, index: int) -> CompartmentState:
        return CompartmentState(
            float(self.s[index]), float(self.e[index]), float(self.i[index]), float(self.r[index])
        )

    def scaled(self, factor: float) -> "EpidemicSeries":
        """All channels multiplied by ``factor`` (population rescales with them)."""
        return EpidemicSeries(
            s=self.s * factor,
            e=self.e * factor,
            i=self.i * factor,
            r=self.r * factor,
            dt=self.dt,
            per_cell=None if self.per_cell is None else self.per_cell * factor,
            info=self.info,
        )


def integrate_seir(
    params: SeirParams, init: CompartmentState, dt: float, steps: int
) -> EpidemicSeries:
    """Fixed-step RK4 integration; returns ``steps + 1`` states including t=0.

    Raises if any compartment dips below -1e-9 of the population, which
    signals that ``dt`` is too large for the given rates.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if steps < 1:
        raise ValueError(f"steps must be at least 1, got {steps}")
    beta, omega, gamma = params.beta, params.omega, params.gamma
    total = init.total
    floor = -_NEGATIVE_TOL * total

    out = np.empty((steps + 1, 4), dtype=np.float64)
    s, e, i, r = init.s, init.e, init.i, init.r
    out[0] = (s, e, i, r)
    half = dt / 2.0
    sixth = dt / 6.0
    for k in range(1, steps + 1):
        # classic RK4 on (s, e, i, r), kept as plain floats for speed
        ds1 = -beta * s * i
        de1 = beta * s * i - omega * e
        di1 = omega * e - gamma * i
        dr1 = gamma * i

        s2, e2, i2 = s + half * ds1, e + half * de1, i + half * di1
        ds2 = -beta * s2 * i2
        de2 = beta * s2 * i2 - omega * e2
        di2 = omega * e2 - gamma * i2
        dr2 = gamma * i2

        s3, e3, i3 = s + half * ds2, e + half * de2, i + half * di2
        ds3 = -beta * s3 * i3
        de3 = beta * s3 * i3 - omega * e3
        di3 = omega * e3 - gamma * i3
        dr3 = gamma * i3

        s4, e4, i4 = s + dt * ds3, e + dt * de3, i + dt * di3
        ds4 = -beta * s4 * i4
        de4 = beta * s4 * i4 - omega * e4
        di4 = omega * e4 - gamma * i4
        dr4 = gamma * i4

        s += sixth * (ds1 + 2 * ds2 + 2 * ds3 + ds4)
        e += sixth * (de1 + 2 * de2 + 2 * de3 + de4)
        i += sixth * (di1 + 2 * di2 + 2 * di3 + di4)
        r += sixth * (dr1 + 2 * dr2 + 2 * dr3 + dr4)
        if s < floor or e < floor or i < floor or r < floor:
            raise ValueError(
                f"compartment went negative at step {k} (dt={dt} too large for these rates)"
            )
        out[k] = (s, e, i, r)
    return EpidemicSeries(s=out[:, 0], e=out[:, 1], i=out[:, 2], r=out[:, 3], dt=dt)


def build_markov(params: SeirParams, current_i: float, dt: float) -> MarkovTransition:
    """One-step transition matrix at the current infectious level.

    ``current_i`` must be in the same normalization beta expects (count or
    fraction). Per-step probabilities are beta*I*dt, omega*dt, gamma*dt;
    each must land in [0, 1].
    """
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    p_se = params.beta * current_i * dt
    p_ei = params.omega * dt
    p_ir = params.gamma * dt
    for name, p in (("S->E", p_se), ("E->I", p_ei), ("I->R", p_ir)):
        if not (0 <= p <= 1):
            raise ValueError(f"per-step probability {name} = {p} outside [0, 1]; shrink dt")
    matrix = np.array(
        [
            [1.0 - p_se, p_se, 0.0, 0.0],
            [0.0, 1.0 - p_ei, p_ei, 0.0],
            [0.0, 0.0, 1.0 - p_ir, p_ir],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return MarkovTransition(matrix=matrix, dt=dt)


def step_markov(state: CompartmentState, mk: MarkovTransition) -> CompartmentState:
    """Advance one step: row vector times transition matrix."""
    nxt = state.as_array() @ mk.matrix
    return CompartmentState(float(nxt[0]), float(nxt[1]), float(nxt[2]), float(nxt[3]))


def run_markov(
    params: SeirParams, init: CompartmentState, dt: float, steps: int
) -> EpidemicSeries:
    """Repeated Markov stepping with the matrix rebuilt at the current I."""
    out = np.empty((steps + 1, 4), dtype=np.float64)
    state = init
    out[0] = state.as_array()
    for k in range(1, steps + 1):
        state = step_markov(state, build_markov(params, state.i, dt))
        out[k] = state.as_array()
    return EpidemicSeries(s=out[:, 0], e=out[:, 1], i=out[:, 2], r=out[:, 3], dt=dt)


def simulate_agents(
    world: WorldModel,
    params: SeirParams,
    contact: ContactModel,
    initial_infected: int | Sequence[str],
    seed: int,
    frame_dt: float | None = None,
    track_cells: bool = False,
) -> EpidemicSeries:
    """Stochastic spatial SEIR over the world's cells, one frame at a time.

    Each frame, agents present in a cell are counted; every unordered (S, I)
    pair there makes a close contact with probability
    ``min(1, contact_coeff * n_present)``, each contact infecting with
    ``transmission_prob``. Exposed agents turn infectious with probability
    ``omega * frame_dt`` per frame and infectious ones recover with
    ``gamma * frame_dt`` (geometric waits matching the continuous rates).
    ``frame_dt`` is the frame length in the time unit of ``params`` and
    defaults to the world's frame duration in seconds. ``initial_infected``
    is either a count (agents drawn uniformly) or explicit user ids; they
    start infectious.

    The recorded state at frame t is the state at the start of that frame,
    so frame 0 is the seeded state. Replay is bit-identical for a fixed
    (world, params, contact, seed).
    """
    m = world.population
    horizon = world.frames.horizon
    n_cell = world.grid.n_cell
    if frame_dt is None:
        frame_dt = world.frames.frame_duration
    p_ei = params.omega * frame_dt
    p_ir = params.gamma * frame_dt
    if not (0 <= p_ei <= 1 and 0 <= p_ir <= 1):
        raise ValueError(
            f"per-frame probabilities omega*dt={p_ei}, gamma*dt={p_ir} must lie in [0, 1]"
        )

    rng = substream(seed, "sim")
    state = np.full(m, SUS, dtype=np.int8)
    if isinstance(initial_infected, (int, np.integer)):
        if initial_infected > m:
            raise ValueError(f"initial_infected {initial_infected} exceeds population {m}")
        if initial_infected > 0:
            state[rng.choice(m, size=int(initial_infected), replace=False)] = INF
    else:
        index_of = {uid: k for k, uid in enumerate(world.user_ids)}
        for uid in initial_infected:
            if uid not in index_of:
                raise ValueError(f"unknown user id {uid!r} in initial_infected")
            state[index_of[uid]] = INF

    counts = np.zeros((horizon, 4), dtype=np.int64)
    per_cell = np.zeros((horizon, n_cell), dtype=np.int32) if track_cells else None
    clamped_cell_frames = 0
    occupied_cell_frames = 0

    for t in range(horizon):
        counts[t] = np.bincount(state, minlength=4)
        cells_t = world.cells[:, t]
        present = cells_t >= 0
        inf_present = (state == INF) & present
        if track_cells and inf_present.any():
            per_cell[t] = np.bincount(cells_t[inf_present], minlength=n_cell)

        n_present = np.bincount(cells_t[present], minlength=n_cell)
        occupied = n_present > 0
        occupied_cell_frames += int(occupied.sum())
        raw = contact.contact_coeff * n_present
        clamped_cell_frames += int((occupied & (raw > 1.0)).sum())

        n_inf = np.bincount(cells_t[inf_present], minlength=n_cell)
        if n_inf.any():
            pair_prob = np.minimum(raw, 1.0) * contact.transmission_prob
            p_infect_cell = 1.0 - (1.0 - pair_prob) ** n_inf
            sus_idx = np.flatnonzero((state == SUS) & present)
            p = p_infect_cell[cells_t[sus_idx]]
            at_risk = p > 0
            sus_idx = sus_idx[at_risk]
            new_e = sus_idx[rng.random(sus_idx.size) < p[at_risk]]
        else:
            new_e = np.empty(0, dtype=np.int64)

        exp_idx = np.flatnonzero(state == EXP)
        new_i = exp_idx[rng.random(exp_idx.size) < p_ei]
        inf_idx = np.flatnonzero(state == INF)
        new_r = inf_idx[rng.random(inf_idx.size) < p_ir]

        state[new_e] = EXP
        state[new_i] = INF
        state[new_r] = REC

    clamp_ratio = clamped_cell_frames / occupied_cell_frames if occupied_cell_frames else 0.0
    if clamp_ratio > CLAMP_WARN_RATIO:
        warnings.warn(
            f"contact probability clamped on {clamp_ratio:.1%} of occupied cell-frames; "
            "contact_coeff looks miscalibrated for these densities",
            RuntimeWarning,
            stacklevel=2,
        )
    info = {
        "seed": int(seed),
        "params": {"beta": params.beta, "t_e": params.t_e, "t_r": params.t_r},
        "contact": {
            "contact_coeff": contact.contact_coeff,
            "transmission_prob": contact.transmission_prob,
        },
        "frame_dt": frame_dt,
        "clamp_ratio": clamp_ratio,
        "clamp_warning": clamp_ratio > CLAMP_WARN_RATIO,
    }
    return EpidemicSeries(
        s=counts[:, SUS],
        e=counts[:, EXP],
        i=counts[:, INF],
        r=counts[:, REC],
        dt=1.0,
        per_cell=per_cell,
        info=info,
    )
