"""CLI subcommands, precedence, exit codes, and output layout."""

import filecmp
import os

import pytest
import yaml

import macroflow as mf
from macroflow.cli import main
from macroflow.config import (ConfigError, apply_override, build_config,
                              config_from_dict, config_to_dict, dump_config_yaml)

SMALL = ["--set", "n_traders_per_type=5", "--set", "n_events=4",
         "--set", "allocation.n_draws=300"]

EXPECTED_FILES = ["panel.csv", "shocks.csv", "alloc_by_period.csv",
                  "final_wealth_hist.csv", "mean_wealth_path.csv",
                  "order_by_liquidity.csv", "summary.txt", "config.yaml",
                  "alloc_by_period.png", "final_wealth_hist.png",
                  "mean_wealth_path.png", "order_by_liquidity.png"]


def _dirs_equal(a, b) -> bool:
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.diff_files or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors


def test_run_writes_all_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--seed", "7", "--out", str(out), *SMALL]) == 0
    for name in EXPECTED_FILES:
        assert (out / name).exists(), name
    first = (out / "panel.csv").read_text().splitlines()
    assert first[0] == "# experiment_seed=7"


def test_run_jsonl_option(tmp_path):
    import json

    out = tmp_path / "out"
    assert main(["run", "--seed", "7", "--out", str(out), "--jsonl",
                 "--no-figures", *SMALL]) == 0
    lines = (out / "panel.jsonl").read_text().splitlines()
    assert json.loads(lines[0]) == {"experiment_seed": 7}
    assert len(lines) == 1 + 4 * 5 * 4
    row = json.loads(lines[1])
    assert row["trader_type"] == "Retail" and row["event"] == 0
    assert row["order_size"] in ("small", "medium", "large")


def test_run_no_figures(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--seed", "7", "--out", str(out), "--no-figures", *SMALL]) == 0
    assert not (out / "alloc_by_period.png").exists()
    assert (out / "panel.csv").exists()


def test_run_twice_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--seed", "42", "--out", str(a), *SMALL]) == 0
    assert main(["run", "--seed", "42", "--out", str(b), *SMALL]) == 0
    assert _dirs_equal(a, b)


def test_workers_flag_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--seed", "42", "--out", str(a), "--workers", "1", *SMALL]) == 0
    assert main(["run", "--seed", "42", "--out", str(b), "--workers", "4", *SMALL]) == 0
    assert _dirs_equal(a, b)


def test_summarize_matches_inline_tables(tmp_path):
    run_dir, sum_dir = tmp_path / "run", tmp_path / "sum"
    assert main(["run", "--seed", "3", "--out", str(run_dir), *SMALL]) == 0
    assert main(["summarize", str(run_dir / "panel.csv"), "--out", str(sum_dir)]) == 0
    for name in ("alloc_by_period.csv", "final_wealth_hist.csv",
                 "mean_wealth_path.csv", "order_by_liquidity.csv", "summary.txt"):
        assert (run_dir / name).read_bytes() == (sum_dir / name).read_bytes(), name


def test_out_dir_env_fallback(tmp_path, monkeypatch):
    out = tmp_path / "envout"
    monkeypatch.setenv("MACROFLOW_OUT", str(out))
    assert main(["run", "--seed", "1", *SMALL]) == 0
    assert (out / "panel.csv").exists()


def test_missing_out_dir_is_config_error(tmp_path, monkeypatch):
    monkeypatch.delenv("MACROFLOW_OUT", raising=False)
    assert main(["run", "--seed", "1", *SMALL]) == 1


def test_unwritable_out_dir_is_runtime_error(tmp_path):
    blocked = tmp_path / "blocked"
    blocked.write_text("a file, not a directory")
    assert main(["run", "--seed", "1", "--out", str(blocked), *SMALL]) == 2


def test_print_defaults_contains_archetype_table(capsys):
    assert main(["print-defaults"]) == 0
    data = yaml.safe_load(capsys.readouterr().out)
    agents = data["agents"]
    assert agents["Retail"] == {"risk_aversion": 3.0, "info_level": 0.0,
                                "max_risk": 0.25, "base_txn_cost": 0.1}
    assert agents["Pension"] == {"risk_aversion": 2.0, "info_level": 0.7,
                                 "max_risk": 0.4, "base_txn_cost": 0.005}
    assert agents["Institutional"] == {"risk_aversion": 1.5, "info_level": 0.8,
                                       "max_risk": 0.8, "base_txn_cost": 0.005}
    assert agents["HedgeFund"] == {"risk_aversion": 1.0, "info_level": 1.0,
                                   "max_risk": 1.0, "base_txn_cost": 0.002}
    assert data["seed"] == 42 and data["n_events"] == 36


def test_print_defaults_round_trips():
    text = dump_config_yaml(mf.SimConfig())
    assert config_from_dict(yaml.safe_load(text)) == mf.SimConfig()


def test_validate_config_ok(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text("market:\n  rf: 0.03\nallocation:\n  n_draws: 123\n")
    assert main(["validate-config", "--config", str(cfg_file)]) == 0
    out = capsys.readouterr().out
    assert "rf: 0.03" in out and "# config OK" in out


def test_validate_config_names_offending_key(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text("allocation:\n  grid_step: 0.0\n")
    assert main(["validate-config", "--config", str(cfg_file)]) == 1
    assert "allocation.grid_step" in capsys.readouterr().err


def test_validate_config_unknown_key(tmp_path, capsys):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text("market:\n  riskfree: 0.03\n")
    assert main(["validate-config", "--config", str(cfg_file)]) == 1
    assert "market.riskfree" in capsys.readouterr().err


def test_unparsable_yaml_gives_line_anchored_error(tmp_path, capsys):
    cfg_file = tmp_path / "bad.yaml"
    cfg_file.write_text("market:\n  rf: 0.03\n bad indent: [\n")
    assert main(["validate-config", "--config", str(cfg_file)]) == 1
    err = capsys.readouterr().err
    assert str(cfg_file) in err and ":3" in err


def test_missing_config_file(capsys):
    assert main(["validate-config", "--config", "/nonexistent/cfg.yaml"]) == 1
    assert "not found" in capsys.readouterr().err


def test_precedence_file_then_set_then_flag(tmp_path):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text("seed: 1\nn_events: 5\nmarket:\n  rf: 0.01\n")
    cfg = build_config(str(cfg_file), ["market.rf=0.02", "seed=2"], seed=3)
    assert cfg.market.rf == 0.02      # --set beats file
    assert cfg.seed == 3              # flag beats --set
    assert cfg.n_events == 5          # file beats default


def test_apply_override_parses_yaml_scalars():
    data = {}
    apply_override(data, "allocation.crn=false")
    apply_override(data, "agents.Retail.max_risk=0.3")
    apply_override(data, "n_events=12")
    assert data == {"allocation": {"crn": False},
                    "agents": {"Retail": {"max_risk": 0.3}}, "n_events": 12}
    with pytest.raises(ConfigError):
        apply_override(data, "no-equals-sign")


def test_config_round_trip_with_overrides():
    cfg = build_config(None, ["choice.large.c_liq=2.0", "agents.HedgeFund.max_risk=0.9",
                              "engine.surprise_in_beliefs=true"])
    assert cfg.choice.large.c_liq == 2.0
    assert cfg.agents[3].max_risk == 0.9
    assert cfg.surprise_in_beliefs is True
    assert config_from_dict(config_to_dict(cfg)) == cfg


def test_config_type_errors_name_key():
    with pytest.raises(ConfigError, match="allocation.n_draws"):
        config_from_dict({"allocation": {"n_draws": "many"}})
    with pytest.raises(ConfigError, match="engine.surprise_in_beliefs"):
        config_from_dict({"engine": {"surprise_in_beliefs": 3}})


def test_bench_smoke(capsys):
    assert main(["bench", "--solves", "8", "--workers", "2",
                 "--set", "allocation.n_draws=200"]) == 0
    out = capsys.readouterr().out
    assert "draws/s" in out and "speedup" in out


def test_run_replications_flag(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--seed", "9", "--out", str(out), "--replications", "2",
                 "--no-figures", *SMALL]) == 0
    lines = (out / "panel.csv").read_text().splitlines()
    assert lines[2].startswith("0,")
    assert any(line.startswith("1,") for line in lines[2:])
    # config echo records the replication count for exact reproduction
    echoed = yaml.safe_load((out / "config.yaml").read_text())
    assert echoed["replications"] == 2 and echoed["seed"] == 9
