import csv
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from crowdflow.cli import (BENCH_HEADER, STEPS_HEADER, SUMMARY_HEADER, SWEEP_HEADER, cmd_bench,
                           cmd_sweep, default_densities, main)
from crowdflow.config import ConfigError, ScenarioConfig, format_config, parse_config


def _rows(path: Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_empty_file_gives_defaults(tmp_path: Path) -> None:
    f = tmp_path / "empty.cfg"
    f.write_text("")
    cfg = parse_config(f)
    assert cfg == ScenarioConfig()
    assert (cfg.width, cfg.height, cfg.steps, cfg.repeats) == (480, 480, 25000, 10)
    assert (cfg.alpha, cfg.beta, cfg.rho, cfg.tau0, cfg.q) == (1.0, 2.0, 0.05, 0.1, 1.0)


def test_width_not_multiple_of_16(tmp_path: Path) -> None:
    f = tmp_path / "bad.cfg"
    f.write_text("width = 100\n")
    with pytest.raises(ConfigError, match="width.*multiple of 16"):
        parse_config(f)


def test_flag_overrides_file(tmp_path: Path) -> None:
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nsteps = 500\nmodel = LEM\n")
    cfg = parse_config(f, {"steps": 200, "seed": None})
    assert cfg.steps == 200 and cfg.model == "lem"


@pytest.mark.parametrize("text,key", [("colour = red", "colour"), ("steps = many", "steps"),
                                      ("rho = 2", "rho"), ("model = gpu", "model"),
                                      ("just words", "just words")])
def test_errors_name_the_key(tmp_path: Path, text: str, key: str) -> None:
    f = tmp_path / "c.cfg"
    f.write_text(text + "\n")
    with pytest.raises(ConfigError) as err:
        parse_config(f)
    assert err.value.key == key


@settings(max_examples=50)
@given(st.builds(
    ScenarioConfig,
    width=st.sampled_from([16, 32, 480]), height=st.sampled_from([32, 64, 480]),
    agents_per_side=st.integers(0, 16), model=st.sampled_from(["lem", "aco"]),
    steps=st.integers(0, 10**6), seed=st.integers(0, 2**64 - 1), repeats=st.integers(1, 50),
    executor=st.sampled_from(["seq", "par"]), threads=st.integers(1, 64),
    d0=st.floats(1.001, 100), mu_sel=st.floats(-5, 5), sigma_sel=st.floats(0, 5),
    alpha=st.floats(0, 10), beta=st.floats(0, 10), rho=st.floats(0.001, 1.0),
    tau0=st.floats(1e-6, 10), q=st.floats(1e-6, 100),
    out_dir=st.text("abc/_-.", min_size=1, max_size=10)))
def test_config_round_trip(tmp_path_factory, cfg: ScenarioConfig) -> None:
    f = tmp_path_factory.mktemp("rt") / "c.cfg"
    f.write_text(format_config(cfg))
    assert parse_config(f) == cfg


def _simulate(out: Path, *extra: str) -> int:
    return main(["simulate", "--width", "32", "--height", "32", "--agents-per-side", "50",
                 "--steps", "40", "--model", "lem", "--out", str(out), *extra])


def test_simulate_zero_steps(tmp_path: Path) -> None:
    assert _simulate(tmp_path, "--steps", "0", "--repeats", "1") == 0
    rows = _rows(tmp_path / "summary.csv")
    assert rows[0] == SUMMARY_HEADER
    assert len(rows) == 2 and rows[1][6] == "0"
    assert _rows(tmp_path / "steps.csv") == [STEPS_HEADER]


def test_simulate_two_repeats(tmp_path: Path) -> None:
    assert _simulate(tmp_path, "--repeats", "2", "--seed", "7") == 0
    rows = _rows(tmp_path / "summary.csv")
    assert [r[0] for r in rows[1:]] == ["0", "1", "mean"]
    assert [r[1] for r in rows[1:3]] == ["7", "8"]
    steps = _rows(tmp_path / "steps.csv")
    assert steps[0] == STEPS_HEADER and len(steps) == 1 + 2 * 40


def test_simulate_byte_identical(tmp_path: Path) -> None:
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert _simulate(out, "--repeats", "2", "--no-timing", "--model", "aco") == 0
    for name in ("steps.csv", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_unwritable_out(tmp_path: Path, capsys) -> None:
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert _simulate(blocker / "sub") != 0
    assert "crowdflow" in capsys.readouterr().err


def test_cli_config_error_exit(tmp_path: Path, capsys) -> None:
    assert main(["simulate", "--width", "100", "--out", str(tmp_path)]) == 2
    assert "width" in capsys.readouterr().err


def test_default_densities() -> None:
    d = default_densities(480, 480)
    assert d == list(range(2560, 102401, 2560))
    assert len(d) == 40


def test_sweep_single_row(tmp_path: Path) -> None:
    cfg = ScenarioConfig(width=32, height=32, steps=30, repeats=1, out_dir=str(tmp_path))
    rows = cmd_sweep(cfg, [100], ["lem"])
    assert len(rows) == 1
    csv_rows = _rows(tmp_path / "sweep.csv")
    assert csv_rows[0] == SWEEP_HEADER and len(csv_rows) == 2


def test_sweep_pairs_models(tmp_path: Path) -> None:
    assert main(["sweep", "--width", "32", "--height", "32", "--steps", "30", "--repeats", "2",
                 "--densities", "64,128", "--out", str(tmp_path), "--no-timing"]) == 0
    rows = _rows(tmp_path / "sweep.csv")[1:]
    assert [(r[0], r[1]) for r in rows] == [("64", "lem"), ("64", "aco"), ("128", "lem"), ("128", "aco")]
    assert all(r[2] == "2" for r in rows)


def test_sweep_rejects_oversized_density_before_running(tmp_path: Path) -> None:
    cfg = ScenarioConfig(width=16, height=16, steps=10, repeats=1, out_dir=str(tmp_path / "o"))
    with pytest.raises(ConfigError):
        cmd_sweep(cfg, [10, 10**6], ["lem"])
    assert not (tmp_path / "o").exists()


def test_bench_rows(tmp_path: Path) -> None:
    cfg = ScenarioConfig(width=32, height=32, agents_per_side=80, steps=20, threads=1,
                         out_dir=str(tmp_path))
    rows = cmd_bench(cfg)
    assert [(r["model"], r["executor"]) for r in rows] == [("lem", "seq"), ("lem", "par"),
                                                          ("aco", "seq"), ("aco", "par")]
    assert _rows(tmp_path / "bench.csv")[0] == BENCH_HEADER
    par_1 = [r for r in rows if r["executor"] == "par"]
    # one worker in a pool does the same work as the sequential path
    assert all(0.2 < r["speedup_vs_seq"] < 5 for r in par_1)


def test_bench_zero_steps_guard(tmp_path: Path) -> None:
    cfg = ScenarioConfig(width=16, height=16, agents_per_side=4, steps=0, out_dir=str(tmp_path))
    rows = cmd_bench(cfg)
    assert all(r["seconds"] == 0.0 and r["speedup_vs_seq"] == 1.0 for r in rows)


def test_module_entry_point(tmp_path: Path) -> None:
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "crowdflow", "simulate", "--width", "16",
                          "--height", "16", "--agents-per-side", "4", "--steps", "5",
                          "--repeats", "1", "--out", str(tmp_path)], capture_output=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "summary.csv").exists()
