import json
import subprocess
import sys

import pytest

from smallworld.cli import main

CONFIG = {
    "seed": 21,
    "world": {
        "population": 30,
        "grid": {"rows": 4, "cols": 4, "cell_size": 100.0},
        "frames": {"frame_duration": 3600.0, "horizon": 48},
        "mobility": {
            "home_anchors": 5,
            "work_anchors": 2,
            "excursion_rate": 0.5,
            "mean_trip_length": 1.5,
        },
    },
    "epidemic": {
        "seir": {"t_e": 1.0, "t_r": 2.0, "time_unit_s": 86400.0},
        "contact": {"contact_coeff": 0.02, "transmission_prob": 0.3},
        "initial_infected": 2,
    },
    "fractions": [0.5],
    "policies": [{"type": "curfew", "restricted_frames": [0, 1, 2, 3, 4, 5]}],
    "scaling": {"threshold_fraction": 0.3},
    "seeds": 2,
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(CONFIG))
    return path


class TestSubcommands:
    def test_generate_writes_world_meta(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["generate", "--config", str(config_path), "--out", str(out)]) == 0
        assert (out / "world_meta.json").exists()
        meta = json.loads((out / "world_meta.json").read_text())
        assert meta["population"] == 30

    def test_sample_writes_sampled_meta(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert main(["sample", "--config", str(config_path), "--out", str(out)]) == 0
        assert (out / "sample_0.5_meta.json").exists()

    def test_idi_prints_csv_row(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["idi", "--config", str(config_path), "--out", str(out)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        row = next(line for line in lines if line.startswith("idi_full,"))
        fields = row.split(",")
        assert len(fields) == 11  # tag, window bounds, then 8 report numbers
        assert fields[1:3] == ["0", "48"]

    def test_simulate_writes_series(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config_path), "--out", str(out)]) == 0
        series = (out / "series_full.csv").read_text().splitlines()
        assert series[0] == "frame,s,e,i,r"
        assert len(series) == 49

    def test_scale_writes_report(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert main(["scale", "--config", str(config_path), "--out", str(out)]) == 0
        report = json.loads((out / "scaling_0.5.json").read_text())
        assert report["n"] == 24

    def test_compare_writes_policy_artifacts(self, config_path, tmp_path):
        out = tmp_path / "out"
        assert main(["compare", "--config", str(config_path), "--out", str(out)]) == 0
        assert (out / "policy_0_curfew.json").exists()
        assert (out / "policy_0_curfew_series.csv").exists()

    def test_validate_needs_two_fractions(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["validate", "--config", str(config_path), "--out", str(out)])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert "fractions" in err["error"]["message"]

    def test_seed_override_changes_outputs(self, config_path, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["generate", "--config", str(config_path), "--out", str(out_a), "--seed", "1"])
        main(["generate", "--config", str(config_path), "--out", str(out_b), "--seed", "1"])
        assert (out_a / "world_meta.json").read_text() == (out_b / "world_meta.json").read_text()

    def test_discretize(self, config_path, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text(
            "user_id,timestamp_s,x_m,y_m\nu,0,35,5\nu,40,75,5\n"
        )
        config = dict(CONFIG)
        config["world"] = dict(
            CONFIG["world"],
            grid={"rows": 1, "cols": 8, "cell_size": 10.0},
            frames={"frame_duration": 60.0, "horizon": 4},
        )
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        out = tmp_path / "out"
        assert main(["discretize", "--config", str(cfg_path), "--points", str(points),
                     "--out", str(out)]) == 0
        csv_lines = (out / "world_trajectories.csv").read_text().splitlines()
        assert csv_lines == ["user_id,frame,cell_id", "u,0,3"]


class TestErrorReporting:
    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["generate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "invalid_config"

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code = main(["generate", "--config", str(path), "--out", str(tmp_path / "out")])
        assert code == 2
        assert "JSON" in json.loads(capsys.readouterr().err)["error"]["message"]

    def test_invalid_config_field(self, tmp_path, capsys):
        config = dict(CONFIG, fractions=[5.0])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config))
        code = main(["generate", "--config", str(path), "--out", str(tmp_path / "out")])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["type"] == "invalid_config"

    def test_no_partial_outputs_on_failure(self, tmp_path):
        config = dict(CONFIG, fractions=[5.0])
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config))
        out = tmp_path / "out"
        assert main(["scale", "--config", str(path), "--out", str(out)]) != 0
        assert not out.exists()


class TestConsoleEntryPoint:
    def test_module_invocation(self, config_path, tmp_path):
        out = tmp_path / "out"
        result = subprocess.run(
            [sys.executable, "-m", "smallworld", "generate", "--config", str(config_path),
             "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        assert (out / "world_meta.json").exists()
