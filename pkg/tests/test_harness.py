import json
import math
import os

import numpy as np
import pytest

from rbqdyn.harness import (
    RunConfig,
    SweepRow,
    fit_loglog_slope,
    free_packet_selftest,
    run_convergence_sweep,
    run_cost_bench,
    run_hbar_sweep,
    set_config_value,
    validate_substeps,
)


def tiny_config(**kw):
    base = dict(
        M=16,
        K=6,
        dt_list=[0.25, 0.125],
        substeps_per_unit=32,
        refine_check=False,
        threads=1,
        initial_state={
            "type": "gaussian_product",
            "centers": [-2.0, -0.7, 0.7, 2.0],
            "widths": [0.6, 0.6, 0.6, 0.6],
            "momenta": [1.0, 0.35, -0.35, -1.0],
            "symmetrize": False,
        },
    )
    base.update(kw)
    return RunConfig(**base)


def test_config_roundtrip(tmp_path):
    cfg = RunConfig()
    path = tmp_path / "cfg.json"
    cfg.save(path)
    back = RunConfig.load(path)
    assert back == cfg
    assert back.to_dict() == cfg.to_dict()


def test_config_rejects_unknown_fields():
    with pytest.raises(ValueError, match="unknown config fields"):
        RunConfig.from_dict({"no_such_field": 1})


def test_config_validation_commensurate_dt():
    cfg = RunConfig(dt_list=[0.3], substeps_per_unit=64)
    with pytest.raises(ValueError, match="commensurate"):
        cfg.validate()


def test_set_config_value_paths():
    cfg = RunConfig()
    cfg = set_config_value(cfg, "K", "12")
    assert cfg.K == 12
    cfg = set_config_value(cfg, "potential.amplitude", "2.0")
    assert cfg.potential["amplitude"] == 2.0
    with pytest.raises(KeyError):
        set_config_value(cfg, "potential.nope", "1")


def test_worker_count_env(monkeypatch):
    cfg = RunConfig(threads=None)
    monkeypatch.setenv("RBQ_THREADS", "3")
    assert cfg.worker_count() == 3
    assert RunConfig(threads=5).worker_count() == 5


def test_fit_loglog_slope_exact_power_law():
    xs = [0.25, 0.125, 0.0625]
    ys = [0.5 * x**1.3 for x in xs]
    slope, _ = fit_loglog_slope(xs, ys)
    assert slope == pytest.approx(1.3, abs=1e-12)


def test_free_packet_selftest_small():
    from rbqdyn.grid import make_grid

    assert free_packet_selftest(make_grid(16.0, 32, 0.5)) < 1e-8


def test_validate_substeps_escalates():
    cfg = tiny_config(substeps_per_unit=8, refine_tol=1e-5, refine_max_density=2048)
    nu, change = validate_substeps(cfg)
    assert nu >= 8
    assert change < 1e-5


def test_validate_substeps_nonconvergent():
    cfg = tiny_config(substeps_per_unit=8, refine_tol=1e-16, refine_max_density=16)
    with pytest.raises(RuntimeError, match="refinement"):
        validate_substeps(cfg)


def test_convergence_sweep_rows_and_outputs(tmp_path):
    cfg = tiny_config(output_dir=str(tmp_path / "run"))
    res = run_convergence_sweep(cfg)
    assert [r.dt for r in res.rows] == sorted(cfg.dt_list)
    for row in res.rows:
        assert 0.0 <= row.trace_dist <= 2.0
        assert row.wigner_dual_lb >= 0.0
        assert row.pairs_rb / row.pairs_full == pytest.approx(1 / 3)
        assert row.max_norm_drift <= 1e-12
    res.write(cfg.output_dir)
    assert set(os.listdir(cfg.output_dir)) == {"rows.csv", "timings.csv", "summary.json"}
    header = open(os.path.join(cfg.output_dir, "rows.csv")).readline().strip()
    assert header == ",".join(SweepRow.CSV_COLUMNS)
    summary = json.load(open(os.path.join(cfg.output_dir, "summary.json")))
    assert summary["rows"][0]["dt"] == res.rows[0].dt


def test_sweep_deterministic_across_worker_counts(tmp_path):
    res1 = run_convergence_sweep(tiny_config(threads=1))
    res2 = run_convergence_sweep(tiny_config(threads=2))
    d1 = tmp_path / "w1"
    d2 = tmp_path / "w2"
    res1.write(d1)
    res2.write(d2)
    assert (d1 / "rows.csv").read_bytes() == (d2 / "rows.csv").read_bytes()


def test_n2_sweep_errors_vanish():
    cfg = tiny_config(
        N=2,
        K=3,
        initial_state={
            "type": "gaussian_product",
            "centers": [-1.0, 1.0],
            "widths": [0.7, 0.7],
            "momenta": [0.5, -0.5],
            "symmetrize": False,
        },
    )
    res = run_convergence_sweep(cfg)
    for row in res.rows:
        assert row.trace_dist <= 1e-10
        assert row.wigner_dual_lb <= 1e-10


def test_zero_potential_sweep_errors_vanish():
    cfg = tiny_config(potential={"kind": "zero"}, K=3)
    res = run_convergence_sweep(cfg)
    for row in res.rows:
        assert row.trace_dist <= 1e-10


def test_hbar_sweep_rows():
    cfg = tiny_config(
        N=2,
        K=3,
        M=32,
        hbar_sweep={"hbars": [1.0, 0.5], "Ms": [32, 32], "dt": 0.125},
        initial_state={
            "type": "gaussian_product",
            "centers": [-1.0, 1.0],
            "widths": [0.7, 0.7],
            "momenta": [0.5, -0.5],
            "symmetrize": False,
        },
    )
    res = run_hbar_sweep(cfg)
    assert [r.hbar for r in res.rows] == [1.0, 0.5]
    # the theorem bound is hbar-free; the naive bound grows as hbar shrinks
    assert res.rows[0].theorem_rhs == res.rows[1].theorem_rhs
    assert res.rows[1].naive_trace_rhs > res.rows[0].naive_trace_rhs
    for row in res.rows:
        assert row.trace_dist <= 1e-10


def test_cost_bench_counts():
    cfg = RunConfig(cost_Ns=[2, 4, 6], cost_M=8, shuffle_N_max=64)
    report = run_cost_bench(cfg)
    for row in report["counts"]:
        N = row["N"]
        assert row["pairs_full"] == N * (N - 1) // 2
        assert row["pairs_rb"] == N // 2
        assert row["ratio_is_exact"]
    assert len(report["shuffle_Ns"]) == 6
    assert math.isfinite(report["shuffle_exponent"])


def test_initial_state_file_roundtrip(tmp_path):
    from rbqdyn.harness import build_initial_state
    from rbqdyn.propagator import save_state

    cfg = tiny_config(N=2, initial_state={
        "type": "gaussian_product",
        "centers": [-1.0, 1.0],
        "widths": [0.7, 0.7],
        "momenta": [0.0, 0.0],
        "symmetrize": False,
    })
    psi = build_initial_state(cfg)
    path = tmp_path / "init.rbq"
    save_state(psi, path)
    cfg_file = tiny_config(N=2, initial_state={"type": "file", "path": str(path)})
    psi2 = build_initial_state(cfg_file)
    assert np.array_equal(psi.amps, psi2.amps)
