"""Scale-up factors mapping subsampled simulations to the full population.

Two factors link a subsampled ("small") world to the full one: a time
scaling driven by the ratio of crowd-flow indices, and a number scaling
F = e^r where r is the contact ratio between the worlds. F arises as the
continuous-compounding limit of per-interval growth (1 + r/n)^n across the
n simulation frames inside one real-world reporting interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seir import EpidemicSeries

__all__ = [
    "TimeScaling",
    "NumberScaling",
    "CalibrationFit",
    "time_scaling_ratio",
    "contact_ratio",
    "compound_limit",
    "number_scaling_factor",
    "map_to_real",
    "policy_factor_ratio",
    "calibrate_k",
    "measure_time_to_threshold",
]


@dataclass(frozen=True)
class TimeScaling:
    """Spread-timescale ratio between two worlds, (idi_a / idi_b)^exponent."""

    ratio: float
    exponent: int
    idi_a: float
    idi_b: float


@dataclass(frozen=True)
class NumberScaling:
    """Infected-count multiplier between worlds.

    ``r`` is the contact ratio, ``n`` the frame multiplier between the two
    worlds' update intervals, ``f`` the resulting factor, and ``k`` the
    proportionality constant used to obtain r.
    """

    r: float
    n: int
    f: float
    k: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"frame multiplier n must be at least 1, got {self.n}")
        if self.f <= 0:
            raise ValueError(f"scaling factor must be positive, got {self.f}")


@dataclass(frozen=True)
class CalibrationFit:
    """Log-space least-squares fit ln f = k * idi + b."""

    k: float
    b: float
    residual: float
    points: tuple[tuple[float, float], ...]


def time_scaling_ratio(idi_a: float, idi_b: float, exponent: int = 1) -> TimeScaling:
    """Timescale ratio (idi_a / idi_b)^exponent between two worlds.

    ``exponent`` 1 is the direct comparison of crowd flows; 3 additionally
    folds in the density-proportional close-contact rate.
    """
    if idi_a <= 0 or idi_b <= 0:
        raise ValueError(f"IDI values must be positive, got {idi_a}, {idi_b}")
    if exponent not in (1, 3):
        raise ValueError(f"exponent must be 1 or 3, got {exponent}")
    return TimeScaling(
        ratio=(idi_a / idi_b) ** exponent, exponent=exponent, idi_a=idi_a, idi_b=idi_b
    )


def contact_ratio(idi_small: float, idi_real: float, k_r: float) -> float:
    """Contact ratio r = k_r * idi_small / idi_real between the two worlds."""
    if idi_real <= 0:
        raise ValueError(f"idi_real must be positive, got {idi_real}")
    if k_r < 0:
        raise ValueError(f"k_r must be non-negative, got {k_r}")
    return k_r * idi_small / idi_real


def compound_limit(r: float, n: int) -> float:
    """Per-interval growth compounded over n sub-steps, (1 + r/n)^n.

    Approaches e^r as n grows; n = 1 recovers the single-period form 1 + r.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    base = 1.0 + r / n
    if base <= 0:
        raise ValueError(f"1 + r/n = {base} must be positive")
    return base**n


def number_scaling_factor(r: float) -> float:
    """Continuous-compounding number scaling factor f = e^r."""
    return math.exp(r)


def map_to_real(series: EpidemicSeries, f: float) -> EpidemicSeries:
    """Scale every compartment channel by f.

    The susceptible channel is rescaled along with the rest, so conservation
    holds against the scaled total population f * N.
    """
    if f <= 0:
        raise ValueError(f"scaling factor must be positive, got {f}")
    return series.scaled(f)


def policy_factor_ratio(idi_a: float, idi_b: float, k: float) -> float:
    """Number-factor ratio between two policies, exp(k * (idi_a - idi_b))."""
    return math.exp(k * (idi_a - idi_b))


def calibrate_k(points: list[tuple[float, float]] | tuple[tuple[float, float], ...]) -> CalibrationFit:
    """Fit ln f = k * idi + b by least squares over (idi, f_observed) pairs."""
    pts = tuple((float(idi), float(f)) for idi, f in points)
    if len(pts) < 2:
        raise ValueError("calibration needs at least 2 points")
    idi = np.array([p[0] for p in pts])
    f_obs = np.array([p[1] for p in pts])
    if (f_obs <= 0).any():
        raise ValueError("all observed factors must be positive")
    if np.unique(idi).size < 2:
        raise ValueError("calibration needs at least 2 distinct IDI values")
    design = np.column_stack([idi, np.ones_like(idi)])
    target = np.log(f_obs)
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    k, b = float(coeffs[0]), float(coeffs[1])
    residual = float(np.sqrt(np.mean((design @ coeffs - target) ** 2)))
    return CalibrationFit(k=k, b=b, residual=residual, points=pts)


def measure_time_to_threshold(series: EpidemicSeries, threshold_fraction: float) -> int | None:
    """First frame where the ever-infected count reaches the given fraction.

    Returns None when the threshold is never reached within the series.
    The comparison carries a 1e-9 * N slack so exact-count thresholds are
    not missed to floating-point rounding.
    """
    if not (0 < threshold_fraction <= 1):
        raise ValueError(f"threshold_fraction must lie in (0, 1], got {threshold_fraction}")
    population = series.population
    threshold = threshold_fraction * population - 1e-9 * population
    crossed = np.flatnonzero(series.cumulative_infected() >= threshold)
    return int(crossed[0]) if crossed.size else None
