import numpy as np
import pytest

from smallworld import EpidemicSeries, discretize
from smallworld.io import (
    load_world,
    parse_per_cell_csv,
    parse_points_csv,
    parse_series_csv,
    parse_trajectories_csv,
    parse_world_meta,
    render_per_cell_csv,
    render_points_csv,
    render_series_csv,
    render_trajectories_csv,
    render_world_meta,
    save_world,
)


class TestPointsCsv:
    def test_round_trip(self):
        points = [("a", 0.0, 12.5, 3.0), ("b", 61.0, 7.0, 8.25)]
        assert parse_points_csv(render_points_csv(points)) == points

    def test_header_enforced(self):
        with pytest.raises(ValueError, match="header"):
            parse_points_csv("who,when,where\n")


class TestTrajectoriesCsv:
    def test_round_trip(self, small_world):
        text = render_trajectories_csv(small_world)
        parsed = parse_trajectories_csv(text)
        assert parsed == small_world.trajectories

    def test_header(self):
        text = render_trajectories_csv([])
        assert text == "user_id,frame,cell_id\n"
        with pytest.raises(ValueError, match="header"):
            parse_trajectories_csv("nope\n1,2,3\n")


class TestWorldMeta:
    def test_round_trip(self, small_world):
        grid, frames, population = parse_world_meta(render_world_meta(small_world))
        assert grid == small_world.grid
        assert frames == small_world.frames
        assert population == small_world.population


class TestSaveLoadWorld:
    def test_full_round_trip(self, small_world, tmp_path):
        paths = save_world(small_world, tmp_path)
        loaded = load_world(paths["meta"], paths["trajectories"])
        assert loaded == small_world

    def test_population_mismatch_detected(self, small_world, tmp_path):
        paths = save_world(small_world, tmp_path)
        meta = paths["meta"].read_text().replace(
            f'"population": {small_world.population}', '"population": 3'
        )
        paths["meta"].write_text(meta)
        with pytest.raises(ValueError, match="population"):
            load_world(paths["meta"], paths["trajectories"])


class TestSeriesCsv:
    def test_round_trip(self):
        series = EpidemicSeries(
            s=np.array([99.0, 98.5]),
            e=np.array([1.0, 1.25]),
            i=np.array([0.0, 0.25]),
            r=np.array([0.0, 0.0]),
        )
        parsed = parse_series_csv(render_series_csv(series))
        for channel in "seir":
            assert np.array_equal(getattr(parsed, channel), getattr(series, channel))

    def test_integral_floats_render_plainly(self):
        series = EpidemicSeries(
            s=np.array([100.0]), e=np.array([0.0]), i=np.array([0.0]), r=np.array([0.0])
        )
        assert render_series_csv(series).splitlines()[1] == "0,100,0,0,0"


class TestPerCellCsv:
    def test_round_trip_is_sparse(self):
        per_cell = np.zeros((4, 3))
        per_cell[1, 2] = 5
        per_cell[3, 0] = 2.5
        text = render_per_cell_csv(per_cell)
        assert text.splitlines() == ["frame,cell_id,infected", "1,2,5", "3,0,2.5"]
        assert np.array_equal(parse_per_cell_csv(text, 4, 3), per_cell)


class TestDiscretizeRoundTrip:
    def test_points_to_world_files_and_back(self, tmp_path):
        from smallworld import GridSpec, TimeFrameSpec, WorldModel

        grid = GridSpec(1, 8, 10.0)
        frames = TimeFrameSpec(60.0, 4)
        points = [("u1", 0.0, 35.0, 5.0), ("u1", 40.0, 75.0, 5.0), ("u2", 10.0, 5.0, 5.0)]
        text = render_points_csv(points)
        world = WorldModel.from_trajectories(
            grid, frames, discretize(parse_points_csv(text), grid, frames)
        )
        paths = save_world(world, tmp_path)
        assert load_world(paths["meta"], paths["trajectories"]) == world
