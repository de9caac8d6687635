import numpy as np
import pytest

from smallworld import (
    ContactModel,
    GridSpec,
    MobilityParams,
    SeirParams,
    TimeFrameSpec,
    WorldModel,
    generate_synthetic_world,
)

# Acceptance criteria register one line each here; printed at the end of the
# run so they are visible without -s.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def world_from_matrix(cells, rows=4, cols=5, frame_duration=3600.0):
    """World with an explicit (M, horizon) cell matrix; -1 marks absence."""
    cells = np.asarray(cells, dtype=np.int16)
    grid = GridSpec(rows, cols, 100.0)
    frames = TimeFrameSpec(frame_duration, cells.shape[1])
    ids = [f"u{i:03d}" for i in range(cells.shape[0])]
    return WorldModel(grid, frames, ids, cells)


@pytest.fixture
def small_world():
    """Deterministic 60-agent commuting world, hourly frames, 2 days."""
    grid = GridSpec(5, 5, 200.0)
    frames = TimeFrameSpec(3600.0, 48)
    mobility = MobilityParams(home_anchors=8, work_anchors=3, excursion_rate=0.8, mean_trip_length=2.0)
    return generate_synthetic_world(60, grid, frames, mobility, seed=101)


@pytest.fixture
def single_cell_world():
    """Everyone co-located in the one cell, every frame."""
    m, horizon = 120, 400
    cells = np.zeros((m, horizon), dtype=np.int16)
    grid = GridSpec(1, 1, 100.0)
    frames = TimeFrameSpec(60.0, horizon)
    return WorldModel(grid, frames, [f"u{i:03d}" for i in range(m)], cells)


@pytest.fixture
def seir_params():
    return SeirParams(beta=3e-4, t_e=5.0, t_r=10.0)


@pytest.fixture
def mild_contact():
    return ContactModel(contact_coeff=1e-3, transmission_prob=0.05)
