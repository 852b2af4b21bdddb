import json

import pytest

from bbmpaths.cli import config_digest, main


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_paths_outputs_and_determinism(tmp_path):
    cfg = write(tmp_path, "p.toml", "p = 1.0\nm_beta = 1.0\nz_expected = [0.25, -0.25]\n"
                                    "z_almost_sure = [0.25]\nn = 50\nprofile_points = 11\n")
    assert main(["paths", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["paths", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert "h_p1_mb1_z0.25.csv" in manifest["outputs"]
    assert "g_p1_mb1_z0.25.json" in manifest["outputs"]
    for name in manifest["outputs"]:
        if name.endswith(".csv"):
            a = (tmp_path / "a" / name).read_text()
            assert a == (tmp_path / "b" / name).read_text()
            assert a.startswith(f"# digest={manifest['digest']}")
    side = json.loads((tmp_path / "a" / "h_p1_mb1_z0.25.json").read_text())
    assert side["manifest"]["digest"] == manifest["digest"]


def test_paths_solver_failure_names_z(tmp_path, capsys):
    cfg = write(tmp_path, "p.toml", "p = 1.0\nz_almost_sure = [0.7]\nn = 20\n")
    assert main(["paths", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3
    assert "z=0.7" in capsys.readouterr().err


@pytest.mark.parametrize("text", ["p = 1.0\nbogus = 2\n", "p = 1.0\n[table]\nx = 1\n", "p = [\n"])
def test_config_errors(tmp_path, text):
    cfg = write(tmp_path, "bad.toml", text)
    assert main(["paths", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_simulate(tmp_path):
    cfg = write(tmp_path, "s.toml", "p = 0.0\nbeta = 1.0\nT = 0.5\ndt = 0.01\nreplicates = 5\n"
                                    "record_times = [0.25, 0.5]\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert main(["simulate", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path / "o")]) == 0
    out = json.loads((tmp_path / "o" / "outcome.json").read_text())
    assert out["reference"]["mean_population_exact"][1] == pytest.approx(2.718281828 ** 0.5)
    assert out["manifest"]["seed"] == 9 and not out["truncated"]


def test_simulate_truncation(tmp_path):
    cfg = write(tmp_path, "s.toml", "p = 0.0\nbeta = 3.0\nT = 3.0\ndt = 0.01\nreplicates = 2\n"
                                    "seed = 1\nmax_particles = 20\nrecord_times = [1.0, 2.0, 3.0]\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["truncated"]


def test_simulate_tube_config(tmp_path):
    cfg = write(tmp_path, "s.toml", "p = 1.0\nT = 1.0\ndt = 0.01\nreplicates = 3\nseed = 2\n"
                                    "tube_path = 'linear'\ntube_slope = 0.2\ntube_epsilon = 0.3\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    stats = json.loads((tmp_path / "o" / "outcome.json").read_text())["statistics"]
    assert "tube_count" in stats
    bad = write(tmp_path, "b.toml", "p = 1.0\nT = 1.0\nseed = 2\ntube_path = 'zigzag'\ntube_epsilon = 0.3\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_figure_and_verify_usage(tmp_path):
    assert main(["figure", "--out", str(tmp_path / "f")]) == 0
    assert (tmp_path / "f" / "profile_expected_p1_mb1.csv").exists()
    with pytest.raises(SystemExit) as info:
        main(["verify", "--level", "nope"])
    assert info.value.code == 2


def test_digest_depends_on_config_and_seed():
    a = config_digest("simulate", {"T": 1.0}, 1)
    assert a == config_digest("simulate", {"T": 1.0}, 1)
    assert a != config_digest("simulate", {"T": 1.0}, 2)
    assert a != config_digest("simulate", {"T": 2.0}, 1)
