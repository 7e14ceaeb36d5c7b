import json
import os

import pytest

from rbqdyn.cli import main
from rbqdyn.harness import RunConfig, run_convergence_sweep


def _tiny_overrides(tmp_path):
    return [
        "--set", "M=16",
        "--set", "K=4",
        "--set", "dt_list=[0.25]",
        "--set", "substeps_per_unit=32",
        "--set", "refine_check=false",
        "--set", "threads=1",
        "--out", str(tmp_path),
    ]


def test_cli_cost(tmp_path, capsys):
    rc = main(["cost", "--set", "shuffle_N_max=64", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "ratio=0.333333" in out
    assert (tmp_path / "cost.json").exists()


def test_cli_converge_and_report(tmp_path, capsys):
    rc = main(["converge", *_tiny_overrides(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "fitted slope" in out
    assert (tmp_path / "rows.csv").exists()
    assert (tmp_path / "summary.json").exists()

    rc = main(["report", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "trace_dist" in out
    assert "measured/bound ratio" in out


def test_cli_config_file_roundtrip(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    RunConfig(M=16, K=3).save(cfg_path)
    loaded = RunConfig.load(cfg_path)
    assert loaded.M == 16 and loaded.K == 3


def test_cli_rejects_malformed_set(tmp_path):
    with pytest.raises(SystemExit):
        main(["converge", "--set", "justakey", "--out", str(tmp_path)])


def test_cli_report_missing_dir(tmp_path):
    with pytest.raises(SystemExit):
        main(["report", str(tmp_path / "nope")])
