"""Experiment orchestration: generate, sample, simulate, scale, compare.

``run_pipeline`` executes the configured stages and returns the artifacts
as named text blobs. Nothing touches the filesystem here, so a failed run
leaves no partial outputs; callers persist artifacts once the whole run
has succeeded. ``validate_scaling`` runs the full-population oracle
experiment that puts the scale-up laws themselves under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import io, scaling
from .config import ExperimentConfig
from .metrics import TimeWindow, compute_idi
from .policy import compare_policies
from .rng import derive_seed
from .seir import ContactModel, EpidemicSeries, SeirParams, simulate_agents
from .world import WorldModel, generate_synthetic_world, sample_small_world

__all__ = ["Artifact", "run_pipeline", "validate_scaling", "STAGES"]

STAGES = ("world", "idi", "simulate", "sample", "scaling", "policies")

# Stage prerequisites; requesting a stage pulls in what it needs.
_REQUIRES = {
    "world": (),
    "idi": ("world",),
    "simulate": ("world",),
    "sample": ("world",),
    "scaling": ("world", "idi", "simulate", "sample"),
    "policies": ("world",),
}


@dataclass(frozen=True)
class Artifact:
    """One output file: a relative path and its full text content."""

    path: str
    kind: str  # "json" | "csv"
    text: str


def _close(requested: list[str] | tuple[str, ...]) -> list[str]:
    needed: set[str] = set()

    def add(stage: str) -> None:
        if stage not in _REQUIRES:
            raise ValueError(f"unknown stage {stage!r}; valid stages: {list(STAGES)}")
        if stage not in needed:
            needed.add(stage)
            for dep in _REQUIRES[stage]:
                add(dep)

    for stage in requested:
        add(stage)
    return [s for s in STAGES if s in needed]


def _mean_curves(
    world: WorldModel,
    params: SeirParams,
    contact: ContactModel,
    initial_infected: int,
    frame_dt: float,
    seeds: list[int],
    track_cells: bool = False,
) -> tuple[EpidemicSeries, dict]:
    """Mean compartment curves over seeded replicates, plus run metadata."""
    acc = None
    cells_acc = None
    clamp_ratios = []
    for s in seeds:
        run = simulate_agents(
            world, params, contact, initial_infected, s, frame_dt=frame_dt, track_cells=track_cells
        )
        cur = np.stack([run.s, run.e, run.i, run.r]).astype(np.float64)
        acc = cur if acc is None else acc + cur
        if track_cells:
            cells_acc = run.per_cell.astype(np.float64) if cells_acc is None else cells_acc + run.per_cell
        clamp_ratios.append(run.info["clamp_ratio"])
    acc /= len(seeds)
    per_cell = None if cells_acc is None else cells_acc / len(seeds)
    mean_clamp = float(np.mean(clamp_ratios))
    info = {
        "replicates": len(seeds),
        "seeds": [int(s) for s in seeds],
        "params": {"beta": params.beta, "t_e": params.t_e, "t_r": params.t_r},
        "contact": {
            "contact_coeff": contact.contact_coeff,
            "transmission_prob": contact.transmission_prob,
        },
        "frame_dt": frame_dt,
        "initial_infected": initial_infected,
        "clamp_ratio_mean": mean_clamp,
        "clamp_warning": mean_clamp > 0.01,
    }
    series = EpidemicSeries(s=acc[0], e=acc[1], i=acc[2], r=acc[3], dt=1.0, per_cell=per_cell)
    return series, info


def _fraction_tag(fraction: float) -> str:
    return f"{fraction:g}"


def build_scaling_report(
    idi_small: float,
    idi_real: float,
    k_r: float,
    n: int,
    exponent: int,
    series_small: EpidemicSeries | None,
    threshold_fraction: float,
) -> dict:
    """Scale-up summary for one subsampled world against the full one.

    ``time_ratio`` is the predicted slowdown of the small world (its
    timescale over the real world's), so the predicted real-world
    time-to-threshold is the small world's divided by it. Without a series
    the time-to-threshold fields stay null.
    """
    r = scaling.contact_ratio(idi_small, idi_real, k_r)
    number = scaling.NumberScaling(r=r, n=n, f=scaling.number_scaling_factor(r), k=k_r)
    time_ratio = scaling.time_scaling_ratio(idi_real, idi_small, exponent).ratio
    t_small = None
    if series_small is not None:
        t_small = scaling.measure_time_to_threshold(series_small, threshold_fraction)
    predicted_time_real = None if t_small is None else t_small / time_ratio
    return {
        "idi_small": idi_small,
        "idi_real": idi_real,
        "r": number.r,
        "n": number.n,
        "f": number.f,
        "k": number.k,
        "exponent": exponent,
        "time_ratio": time_ratio,
        "time_to_threshold_small": t_small,
        "predicted_time_real": predicted_time_real,
    }


def run_pipeline(config: ExperimentConfig, stages: list[str] | None = None) -> list[Artifact]:
    """Run the requested stages (default: all) and return their artifacts.

    Deterministic: every random stream derives from ``config.seed``.
    """
    active = _close(stages if stages is not None else list(STAGES))
    grid = config.world.grid.build()
    frames = config.world.frames.build()
    params = config.epidemic.seir.build()
    contact = config.epidemic.contact.build()
    frame_dt = config.frame_dt
    window = TimeWindow(0, frames.horizon)
    artifacts: list[Artifact] = []

    world = generate_synthetic_world(
        config.world.population, grid, frames, config.world.mobility.build(),
        derive_seed(config.seed, "world"),
    )
    if "world" in active:
        artifacts.append(Artifact("world_meta.json", "json", io.render_world_meta(world)))
        if config.emit_trajectories:
            artifacts.append(
                Artifact("world_trajectories.csv", "csv", io.render_trajectories_csv(world))
            )

    idi_real = None
    if "idi" in active:
        report = compute_idi(world, window)
        idi_real = report.idi
        artifacts.append(Artifact("idi_full.json", "json", io.json_dumps(report.to_dict())))

    series_full = None
    if "simulate" in active:
        seeds = [derive_seed(config.seed, "sim-full", j) for j in range(config.seeds)]
        series_full, run_info = _mean_curves(
            world, params, contact, config.epidemic.initial_infected, frame_dt, seeds,
            track_cells=config.epidemic.track_cells,
        )
        artifacts.append(Artifact("series_full.csv", "csv", io.render_series_csv(series_full)))
        if series_full.per_cell is not None:
            artifacts.append(
                Artifact("per_cell_full.csv", "csv", io.render_per_cell_csv(series_full.per_cell))
            )
        artifacts.append(Artifact("run_full.json", "json", io.json_dumps(run_info)))

    samples: list[tuple[float, WorldModel, float]] = []
    if "sample" in active:
        for fraction in config.fractions:
            tag = _fraction_tag(fraction)
            small = sample_small_world(world, fraction, derive_seed(config.seed, "sample", tag))
            idi_report = compute_idi(small, window)
            samples.append((fraction, small, idi_report.idi))
            artifacts.append(
                Artifact(f"sample_{tag}_meta.json", "json", io.render_world_meta(small))
            )
            artifacts.append(
                Artifact(f"idi_sample_{tag}.json", "json", io.json_dumps(idi_report.to_dict()))
            )

    if "scaling" in active:
        for fraction, small, idi_small in samples:
            tag = _fraction_tag(fraction)
            seeds = [derive_seed(config.seed, "sim-sample", tag, j) for j in range(config.seeds)]
            series_small, _ = _mean_curves(
                small, params, contact, config.epidemic.initial_infected, frame_dt, seeds
            )
            artifacts.append(
                Artifact(f"series_sample_{tag}.csv", "csv", io.render_series_csv(series_small))
            )
            report = build_scaling_report(
                idi_small,
                idi_real,
                config.scaling.k_r,
                config.frame_multiplier,
                config.scaling.exponent,
                series_small,
                config.scaling.threshold_fraction,
            )
            artifacts.append(
                Artifact(f"scaling_{tag}.json", "json", io.json_dumps(report))
            )

    if "policies" in active:
        for idx, policy in enumerate(config.policies):
            comparison = compare_policies(
                world,
                policy,
                None,
                params,
                contact,
                config.scaling.k,
                config.seeds,
                seed=derive_seed(config.seed, "policy", idx),
                initial_infected=config.epidemic.initial_infected,
                frame_dt=frame_dt,
            )
            tag = f"{idx}_{policy.type}"
            artifacts.append(
                Artifact(
                    f"policy_{tag}.json",
                    "json",
                    io.json_dumps(
                        {
                            "policy": policy.model_dump(),
                            "baseline": None,
                            "idi_a": comparison.idi_a,
                            "idi_b": comparison.idi_b,
                            "time_ratio": comparison.time_ratio,
                            "factor_ratio": comparison.factor_ratio,
                            "attack_rate_a": comparison.attack_rate_a,
                            "attack_rate_b": comparison.attack_rate_b,
                            "attack_rate_difference": comparison.attack_rate_difference,
                            "seeds": comparison.seeds,
                        }
                    ),
                )
            )
            artifacts.append(
                Artifact(
                    f"policy_{tag}_series.csv", "csv", io.render_series_csv(comparison.series_a)
                )
            )
            artifacts.append(
                Artifact(
                    f"policy_{tag}_baseline_series.csv",
                    "csv",
                    io.render_series_csv(comparison.series_b),
                )
            )

    return artifacts


VALIDATION_CSV_HEADER = (
    "fraction,idi_small,idi_real,f_empirical_mean,f_predicted,k_fit,"
    "time_ratio_empirical,time_ratio_eq6,time_ratio_eq5,residual"
)


def validate_scaling(config: ExperimentConfig) -> dict:
    """Oracle experiment: full-population simulation versus its subsamples.

    Simulates the full world and every configured fraction with matched
    epidemic parameters, then reports per fraction the empirical number
    factor (full over small cumulative infections at each reporting
    interval), a log-linear fit of that factor against IDI, and whether the
    empirically observed slowdown sits closer to the linear or the cubic
    crowd-flow prediction. The full-world oracle is computed independently
    of every subsample.
    """
    if len(config.fractions) < 2:
        raise ValueError("validation needs at least 2 sampling fractions")
    if config.seeds < 1:
        raise ValueError("validation needs at least 1 seed")

    grid = config.world.grid.build()
    frames = config.world.frames.build()
    params = config.epidemic.seir.build()
    contact = config.epidemic.contact.build()
    frame_dt = config.frame_dt
    threshold = config.scaling.threshold_fraction
    n_report = config.reporting_frames
    window = TimeWindow(0, frames.horizon)

    world = generate_synthetic_world(
        config.world.population, grid, frames, config.world.mobility.build(),
        derive_seed(config.seed, "world"),
    )
    idi_real = compute_idi(world, window).idi

    full_seeds = [derive_seed(config.seed, "validate-full", j) for j in range(config.seeds)]
    try:
        series_full, _ = _mean_curves(
            world, params, contact, config.epidemic.initial_infected, frame_dt, full_seeds
        )
    except ValueError as exc:
        raise RuntimeError(f"full-world oracle simulation failed: {exc}") from exc
    cum_full = series_full.cumulative_infected()
    t_real = scaling.measure_time_to_threshold(series_full, threshold)

    # Reporting instants: the last frame of each reporting interval.
    report_frames = list(range(n_report - 1, frames.horizon, n_report))

    rows = []
    for fraction in sorted(config.fractions):
        tag = _fraction_tag(fraction)
        idi_values = []
        acc = None
        for j in range(config.seeds):
            try:
                small = sample_small_world(
                    world, fraction, derive_seed(config.seed, "validate-sample", tag, j)
                )
                idi_values.append(compute_idi(small, window).idi)
                run = simulate_agents(
                    small, params, contact, config.epidemic.initial_infected,
                    derive_seed(config.seed, "validate-sim", tag, j), frame_dt=frame_dt,
                )
            except ValueError as exc:
                raise RuntimeError(
                    f"simulation failed for fraction {fraction}, replicate {j}: {exc}"
                ) from exc
            cur = np.stack([run.s, run.e, run.i, run.r]).astype(np.float64)
            acc = cur if acc is None else acc + cur
        acc /= config.seeds
        series_small = EpidemicSeries(s=acc[0], e=acc[1], i=acc[2], r=acc[3], dt=1.0)
        cum_small = series_small.cumulative_infected()
        t_small = scaling.measure_time_to_threshold(series_small, threshold)

        f_series = []
        defined = []
        for rf in report_frames:
            if cum_small[rf] > 0:
                value = float(cum_full[rf] / cum_small[rf])
                f_series.append({"frame": rf, "f": value})
                defined.append(value)
            else:
                f_series.append({"frame": rf, "f": None})
        f_mean = float(np.mean(defined)) if defined else None

        time_ratio_linear = (idi_real / float(np.mean(idi_values))) ** 1
        time_ratio_cubic = (idi_real / float(np.mean(idi_values))) ** 3
        empirical_ratio = None
        if t_small is not None and t_real is not None and t_real > 0:
            empirical_ratio = t_small / t_real
        rows.append(
            {
                "fraction": fraction,
                "idi_small": float(np.mean(idi_values)),
                "idi_real": idi_real,
                "f_empirical_series": f_series,
                "f_empirical_mean": f_mean,
                "time_to_threshold_small": t_small,
                "time_to_threshold_real": t_real,
                "time_ratio_empirical": empirical_ratio,
                "time_ratio_linear": time_ratio_linear,
                "time_ratio_cubic": time_ratio_cubic,
            }
        )

    fit_points = [
        (row["idi_small"], row["f_empirical_mean"]) for row in rows
        if row["f_empirical_mean"] is not None and row["f_empirical_mean"] > 0
    ]
    k_fit = b_fit = residual = None
    if len({p[0] for p in fit_points}) >= 2:
        fit = scaling.calibrate_k(fit_points)
        k_fit, b_fit, residual = fit.k, fit.b, fit.residual

    for row in rows:
        row["k_fit"] = k_fit
        row["residual"] = residual
        row["f_predicted"] = (
            math.exp(k_fit * row["idi_small"] + b_fit) if k_fit is not None else None
        )
        row["closer_prediction"] = _closer_prediction(row)

    preferences = [row["closer_prediction"] for row in rows if row["closer_prediction"]]
    overall = None
    if preferences:
        overall = "cubic" if preferences.count("cubic") > preferences.count("linear") else "linear"

    return {
        "seeds": config.seeds,
        "threshold_fraction": threshold,
        "reporting_frames": n_report,
        "idi_real": idi_real,
        "k_fit": k_fit,
        "residual": residual,
        "exponent_preference": overall,
        "rows": rows,
    }


def _closer_prediction(row: dict) -> str | None:
    """Which slowdown prediction the measured time ratio sits closer to."""
    emp = row["time_ratio_empirical"]
    if emp is None or emp <= 0:
        return None
    d_linear = abs(math.log(emp) - math.log(row["time_ratio_linear"]))
    d_cubic = abs(math.log(emp) - math.log(row["time_ratio_cubic"]))
    return "linear" if d_linear <= d_cubic else "cubic"


def render_validation_csv(report: dict) -> str:
    def cell(value) -> str:
        if value is None:
            return ""
        return repr(int(value)) if float(value).is_integer() else repr(float(value))

    lines = [VALIDATION_CSV_HEADER]
    for row in report["rows"]:
        lines.append(
            ",".join(
                [
                    cell(row["fraction"]),
                    cell(row["idi_small"]),
                    cell(row["idi_real"]),
                    cell(row["f_empirical_mean"]),
                    cell(row["f_predicted"]),
                    cell(row["k_fit"]),
                    cell(row["time_ratio_empirical"]),
                    cell(row["time_ratio_linear"]),
                    cell(row["time_ratio_cubic"]),
                    cell(row["residual"]),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def validation_artifacts(report: dict) -> list[Artifact]:
    return [
        Artifact("validation_report.json", "json", io.json_dumps(report)),
        Artifact("validation_report.csv", "csv", render_validation_csv(report)),
    ]
