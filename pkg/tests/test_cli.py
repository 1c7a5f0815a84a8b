import csv
import io

import pytest

from ftmrs import cli

SMALL = ["--set", "node_count=30", "--set", "cluster_count=4", "--set", "radio_range=90",
         "--set", "area_width=150", "--set", "area_height=150"]


run = cli.main


def rows_of(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


@pytest.mark.parametrize("text, want", [("3", [3]), ("1,4,9", [1, 4, 9]), ("1-5", [1, 2, 3, 4, 5]),
                                        (" 2 - 3 ,7", [2, 3, 7])])
def test_parse_seeds(text, want):
    assert cli.parse_seeds(text) == want


@pytest.mark.parametrize("text", ["5-1", "a", "", "1,,2x"])
def test_parse_seeds_rejects(text):
    with pytest.raises(cli.UsageError):
        cli.parse_seeds(text)


def test_parse_grid():
    grid = cli.parse_grid(["node_count=10,20", "faults.fault_mix=battery_ok:1;receiver_ok:1"])
    assert grid == [("node_count", ["10", "20"]), ("faults.fault_mix", ["battery_ok:1", "receiver_ok:1"])]
    with pytest.raises(cli.UsageError):
        cli.parse_grid(["node_count=1", "node_count=2"])
    with pytest.raises(cli.UsageError):
        cli.parse_grid(["bogus=1"])


def test_unknown_preset(tmp_path, capsys):
    assert run(["run", "--preset", "nope", "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "unknown preset 'nope'" in err and "table3-desk" in err
    assert not (tmp_path / "o").exists()


def test_malformed_config_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("node_count = 20\nradio_range = far\n")
    assert run(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "line 2: radio_range" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_bad_grid_value_fails_before_running(tmp_path, capsys):
    argv = ["sweep", "--out", str(tmp_path), *SMALL, "--grid", "node_count=20,-1"]
    assert run(argv) == 2
    assert "node_count" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_run_config_outputs(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("node_count = 25\nradio_range = 90\ncluster_count = 3\narea_width = 150\n"
                   "area_height = 150\nrounds_max = 6\n")
    out = tmp_path / "o"
    assert run(["run", "--config", str(cfg), "--seeds", "1-2", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["run_s1.csv", "run_s1_energy.dat", "run_s1_events.csv",
                     "run_s2.csv", "run_s2_energy.dat", "run_s2_events.csv", "summary.csv"]
    summary = rows_of(out / "summary.csv")
    assert list(summary[0]) == list(cli.SUMMARY_HEADER)
    assert [r["seed"] for r in summary] == ["1", "2"]
    for r in summary:
        assert float(r["initial_energy_j"]) == pytest.approx(12.5)
        assert float(r["max_energy_gap"]) < 1e-9
    for line in (out / "run_s1_energy.dat").read_text().splitlines():
        assert len(line.split()) == 2


def test_sweep_grid_times_seeds(tmp_path):
    argv = ["sweep", "--out", str(tmp_path), *SMALL, "--rounds", "4", "--seeds", "1-3",
            "--grid", "node_count=20,30", "--name", "g.csv"]
    assert run(argv) == 0
    rows = rows_of(tmp_path / "g.csv")
    assert len(rows) == 6
    assert [(r["node_count"], r["seed"]) for r in rows] == [
        ("20", "1"), ("20", "2"), ("20", "3"), ("30", "1"), ("30", "2"), ("30", "3")]


def test_sweep_without_grid_is_one_row(tmp_path):
    assert run(["sweep", "--out", str(tmp_path), *SMALL, "--rounds", "3", "--seed", "4"]) == 0
    rows = rows_of(tmp_path / "sweep.csv")
    assert len(rows) == 1 and rows[0]["cell"] == "base"


def test_repeat_runs_are_byte_identical(tmp_path):
    argv = ["run", "--preset", "fig10", "--rounds", "3", "--seeds", "1", *SMALL]
    for d in ("a", "b"):
        assert run([*argv, "--out", str(tmp_path / d)]) == 0
    a = {p.name: p.read_bytes() for p in (tmp_path / "a").iterdir()}
    b = {p.name: p.read_bytes() for p in (tmp_path / "b").iterdir()}
    assert a == b and a


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert run(["sweep", *SMALL, "--rounds", "2"]) == 0
    assert (tmp_path / "env" / "sweep.csv").exists()
    # the flag wins over the environment
    assert run(["sweep", *SMALL, "--rounds", "2", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "sweep.csv").exists()


def test_outputs_confined(tmp_path, capsys):
    assert run(["sweep", *SMALL, "--rounds", "2", "--out", str(tmp_path / "o"), "--name", "../x.csv"]) == 2
    assert "escapes" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_fig9_outputs(tmp_path):
    argv = ["run", "--preset", "fig9", "--seeds", "1", "--out", str(tmp_path), "--set", "node_count=40"]
    assert run(argv) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig9_k1.dat", "fig9_k2.dat", "fig9_k3.dat", "fig9_throughput.csv"]
    for k in (1, 2, 3):
        lines = (tmp_path / f"fig9_k{k}.dat").read_text().splitlines()
        assert [float(l.split()[0]) for l in lines] == list(cli.FIG9_FRACTIONS)
        assert all(0.0 <= float(l.split()[1]) <= 1.0 for l in lines)


def test_fault_plot_preset(tmp_path):
    argv = ["run", "--preset", "fig7", "--rounds", "3", "--seeds", "1", "--out", str(tmp_path),
            "--set", "cluster_count=6"]
    assert run(argv) == 0
    for n in (100, 150, 200, 250):
        lines = (tmp_path / f"fig7_n{n}.dat").read_text().splitlines()
        assert len(lines) == 5 and all(len(l.split()) == 2 for l in lines)


def test_presets_listing(capsys):
    assert run(["presets"]) == 0
    out = capsys.readouterr().out
    for name in cli.PRESETS:
        assert name in out


def test_jobs_must_be_positive(capsys):
    assert run(["sweep", "--jobs", "0"]) == 2
    assert "--jobs" in capsys.readouterr().err
