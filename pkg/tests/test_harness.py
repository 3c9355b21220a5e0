import math
import re
import xml.etree.ElementTree as ET
from dataclasses import replace

import pytest

from mdsgame import cli
from mdsgame.config import KEYS, ConfigError, ScenarioConfig, parse_config, serialize
from mdsgame.game import sweep_symmetric
from mdsgame.output import PlotError, PlotSpec, ResultTable, emit_svg, read_csv, to_csv
from mdsgame.scenarios import (
    MODE_LABELS,
    PLOTS,
    game_config,
    mc_agrees,
    random_r,
    run_equilibrium,
    run_modes,
    run_scenario,
    run_sweep,
    write_outputs,
)


def test_empty_config_gives_defaults():
    assert parse_config("") == ScenarioConfig()
    assert parse_config("# only a comment\n\n") == ScenarioConfig()
    assert ScenarioConfig().alpha == 0.2 and ScenarioConfig().q == 1.53


def test_out_of_range_value_names_key_and_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("k = 4\nalpha = -1\n")
    assert exc.value.key == "alpha" and exc.value.line == 2
    assert "alpha" in str(exc.value)


@pytest.mark.parametrize(
    "text",
    ["bogus = 1", "k 4", "k = four", "k = 4\nk = 5", "scenario = nope", "load_grid ="],
)
def test_bad_config_lines(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_round_trip():
    cfg = parse_config("k = 8\nr_max = 16\nm_nodes = 10\n")
    assert (cfg.k, cfg.r_max, cfg.m_nodes) == (8, 16, 10)
    assert parse_config(serialize(cfg)) == cfg
    assert parse_config("load_grid = 1, 2.5 3  # trailing\nlambda = 0.7").load_grid == (1.0, 2.5, 3.0)
    assert {"lambda", "load_grid", "random_r_offset"} <= set(KEYS)


def test_random_r_rule():
    cfg = ScenarioConfig()
    assert random_r(5, cfg) == 8
    assert random_r(15, cfg) == 16
    assert random_r(16, cfg) == 13
    assert random_r(0, replace(cfg, r_max=0)) == 0


def test_mc_agrees_floor():
    assert mc_agrees(1.0, 1.0, 0.0, 10**6)
    assert mc_agrees(0.5, 0.5 + 2.9e-6, 0.0, 10**6)
    assert not mc_agrees(0.5, 0.5 + 4e-6, 0.0, 10**6)
    assert not mc_agrees(0.5, 0.51, 0.001, 10**6)


def test_csv_has_no_raw_nan_or_inf():
    t = ResultTable(["a", "b", "c"], metadata={"note": "x", "bad": math.nan})
    t.add(1, math.inf, None)
    t.add(0.1, -math.inf, True)
    text = to_csv(t)
    assert not re.search(r"nan|inf", text, re.IGNORECASE)
    assert text.splitlines()[:2] == ["# note: x", "# bad: none"]
    header, rows = read_csv(text)
    assert header == ["a", "b", "c"]
    assert rows == [["1", "none", "none"], ["0.1", "none", "1"]]


def svg_root(text):
    return ET.fromstring(text)


def polylines(root):
    return [e for e in root.iter() if e.tag.endswith("polyline") and e.get("class") == "series"]


def test_svg_empty_table_has_axes_only():
    root = svg_root(emit_svg(ResultTable(["x", "y"]), PlotSpec(x="x", series=["y"])))
    assert polylines(root) == []
    assert any(e.tag.endswith("line") for e in root.iter())


def test_svg_two_points():
    t = ResultTable(["x", "y"])
    t.add(0, 1.0)
    t.add(1, 2.0)
    [line] = polylines(svg_root(emit_svg(t, PlotSpec(x="x", series=["y"]))))
    assert len(line.get("points").split()) == 2


def test_svg_log_scale_drops_nonpositive_and_missing_column():
    t = ResultTable(["x", "y"])
    for x, y in [(0, 0.0), (1, 10.0), (2, 100.0), (3, None)]:
        t.add(x, y)
    [line] = polylines(svg_root(emit_svg(t, PlotSpec(x="x", series=["y"], log_y=True))))
    assert len(line.get("points").split()) == 2
    with pytest.raises(PlotError):
        emit_svg(t, PlotSpec(x="x", series=["z"]))


def test_modes_plot_has_three_legend_entries():
    table = run_modes(replace(ScenarioConfig(), scenario="modes"))
    root = svg_root(emit_svg(table, PLOTS["modes"]))
    entries = [e for e in root.iter() if e.get("class") == "legend-entry"]
    assert len(entries) == 3
    text = "".join(e.text or "" for e in root.iter())
    for label in MODE_LABELS:
        assert label in text


def test_sweep_row_count_and_agreement_with_game_engine():
    cfg = replace(ScenarioConfig(), r_max=8)
    table = run_sweep(cfg)
    assert len(table.rows) == 9
    sweep = sweep_symmetric(game_config(cfg))
    assert table.column("D") == [p.D for p in sweep.points]
    assert table.column("Th") == [p.Th for p in sweep.points]
    assert table.metadata["r_star"] == sweep.r_star


def test_analytic_modes_ordering():
    table = run_modes(replace(ScenarioConfig(), scenario="modes"))
    for load, r_star, rr, conv, rand, ne in table.rows:
        assert rr != r_star
        assert ne <= rand and ne <= conv


def test_equilibrium_scenario():
    table = run_equilibrium(replace(ScenarioConfig(), scenario="equilibrium"))
    assert table.column("r") == [8, 8]
    assert table.metadata["converged"] is True
    assert table.metadata["deviation_margin"] >= 0


def test_same_seed_byte_identical_outputs(tmp_path):
    cfg = replace(ScenarioConfig(), scenario="modes", evaluator="simulated", slots=2000, emit_svg=True)
    a = write_outputs(cfg, run_scenario(cfg), tmp_path / "a")
    b = write_outputs(cfg, run_scenario(cfg), tmp_path / "b")
    assert [p.name for p in a] == ["modes-1.csv", "modes-1.svg"]
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    other = replace(cfg, seed=2)
    c = write_outputs(other, run_scenario(other), tmp_path / "c")
    assert c[0].read_bytes() != a[0].read_bytes()


def test_cli_run_and_errors(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text("r_max = 6\n")
    assert cli.main(["run", "--config", str(good), "--out", str(tmp_path / "o"), "--svg"]) == 0
    assert (tmp_path / "o" / "sweep-r-1.csv").exists()
    assert (tmp_path / "o" / "sweep-r-1.svg").exists()
    assert cli.main(["run", "--config", str(good), "--seed", "7", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "sweep-r-7.csv").exists()

    bad = tmp_path / "bad.cfg"
    bad.write_text("alpha = -1\n")
    assert cli.main(["run", "--config", str(bad)]) == 1
    assert "alpha" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["run"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 1


def test_cli_validate_exit_codes(tmp_path, monkeypatch):
    small = tmp_path / "small.cfg"
    small.write_text("mc_trials = 2000\nr_max = 4\n")
    assert cli.main(["validate", "--config", str(small), "--out", str(tmp_path)]) == 0
    header, rows = read_csv((tmp_path / "validate-1.csv").read_text())
    assert header[0] == "check" and all(r[-1] == "1" for r in rows)

    def failing(cfg):
        t = ResultTable(["check", "pass"], metadata={"failures": 1})
        t.add("forced", False)
        return t

    monkeypatch.setattr(cli, "run_scenario", failing)
    assert cli.main(["validate", "--config", str(small), "--out", str(tmp_path)]) == 2
