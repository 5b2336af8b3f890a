import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E_GS
from kagomelab import ConfigError, ExperimentSummary, RunConfig, VqeTrace, emit_plot_data, run_batch, trial_seed
from kagomelab.controller import TraceRow
from kagomelab.harness import recursion_starts, trace_path

FAST = dict(ground_energy=E_GS, max_cycles=2, shots=128, reps=1)


def test_trial_seed_is_documented_hash():
    digest = hashlib.sha256(b"7:3").digest()
    assert trial_seed(7, 3) == int.from_bytes(digest[:8], "big")
    assert len({trial_seed(0, i) for i in range(100)}) == 100


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 500),
    st.sampled_from(["none", "controller", "zne", "trex"]),
    st.floats(0, 0.2),
    st.floats(0.001, 0.009),
    st.lists(st.integers(0, 6), min_size=1, max_size=4).map(lambda xs: tuple(sorted({1} | {2 * x + 3 for x in xs}))),
    st.one_of(st.none(), st.floats(-50, -1)),
)
def test_config_round_trip(n_trials, mode, p_cx, stop, scales, ground):
    cfg = RunConfig(n_trials=n_trials, mode=mode, p_cx=p_cx, stop_threshold=stop, zne_scales=scales, ground_energy=ground)
    assert RunConfig.loads(cfg.dumps()) == cfg


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig(mode="none", out_dir=str(tmp_path / "o"))
    cfg.write(tmp_path / "c.cfg")
    assert RunConfig.read(tmp_path / "c.cfg") == cfg


@pytest.mark.parametrize(
    "text, field",
    [
        ("colour = red\n", "colour"),
        ("n_trials = many\n", "n_trials"),
        ("n_trials = 0\n", "n_trials"),
        ("mode = magic\n", "mode"),
        ("lattice = /no/such/file\n", "lattice"),
        ("shots = 10\nshots = 20\n", "shots"),
        ("just words\n", "line 1"),
    ],
)
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError, match=field):
        RunConfig.loads(text)


def test_config_rejects_bad_controller_settings():
    with pytest.raises(ConfigError, match="stop_threshold"):
        RunConfig(stop_threshold=0.05)


def test_relative_paths_resolve_against_config_dir(tmp_path):
    (tmp_path / "cell.txt").write_text("3\n0 1\n1 2\n0 2\n")
    (tmp_path / "c.cfg").write_text("lattice = cell.txt\n")
    assert RunConfig.read(tmp_path / "c.cfg").lattice == str(tmp_path / "cell.txt")


def test_single_noiseless_trial_bookkeeping(tmp_path):
    cfg = RunConfig(mode="none", evaluator="exact", n_trials=1, max_cycles=3, ground_energy=E_GS)
    summary, results = run_batch(cfg, tmp_path)
    assert summary.total == 1
    assert summary.failed == (0 if results[0].success else 1)
    assert summary.avg_cycles == 3.0
    trace = VqeTrace.read_csv(trace_path(tmp_path, 0))
    assert results[0].success == (trace.min_rel_error < cfg.stop_threshold)
    assert ExperimentSummary.loads((tmp_path / "summary.txt").read_text()) == summary


def test_summary_consistency(tmp_path):
    cfg = RunConfig(mode="controller", n_trials=3, **FAST)
    summary, results = run_batch(cfg, tmp_path)
    assert summary.total == 3
    assert summary.failed + sum(r.success for r in results) == 3
    assert summary.success_rate == (3 - summary.failed) / 3
    assert summary.total_evaluations == sum(r.evaluations for r in results)
    for i, r in enumerate(results):
        trace = VqeTrace.read_csv(trace_path(tmp_path, i))
        assert r.success == (trace.min_rel_error < cfg.stop_threshold)


def test_trials_do_not_depend_on_batch_size(tmp_path):
    small = RunConfig(mode="none", n_trials=2, **FAST)
    run_batch(small, tmp_path / "a")
    run_batch(small.replace(n_trials=3), tmp_path / "b")
    for i in range(2):
        assert trace_path(tmp_path / "a", i).read_bytes() == trace_path(tmp_path / "b", i).read_bytes()


def test_worker_count_does_not_change_results(tmp_path):
    cfg = RunConfig(mode="none", n_trials=2, **FAST)
    run_batch(cfg, tmp_path / "serial")
    run_batch(cfg.replace(workers=2), tmp_path / "pool")
    for i in range(2):
        assert trace_path(tmp_path / "serial", i).read_bytes() == trace_path(tmp_path / "pool", i).read_bytes()


def test_io_failure_is_per_trial(tmp_path):
    trace_path(tmp_path, 0).mkdir(parents=True)  # a directory where the file should go
    cfg = RunConfig(mode="none", evaluator="exact", n_trials=2, max_cycles=1, ground_energy=E_GS)
    summary, results = run_batch(cfg, tmp_path)
    assert not results[0].success and "trace write failed" in results[0].error
    assert trace_path(tmp_path, 1).is_file()
    assert summary.total == 2 and summary.failed >= 1


def make_trace(n, restarts=()):
    depth = 0
    rows = []
    for c in range(1, n + 1):
        if c in restarts:
            depth += 1
        rows.append(TraceRow(c, -17.0 - c / n, 1.0, 0.05, depth))
    return VqeTrace(rows)


def test_plot_data_points(tmp_path):
    paths = emit_plot_data(make_trace(150), E_GS, tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "cycle,energy,target"
    data = [ln.split(",") for ln in lines[1:]]
    assert len(data) == 150
    assert {float(d[2]) for d in data} == {E_GS}
    assert paths[1].suffix == ".svg" and paths[1].read_text().lstrip().startswith("<?xml")


def test_plot_marks_recursions(tmp_path):
    trace = make_trace(30, restarts=(11, 21))
    assert recursion_starts(trace) == [11, 21]
    emit_plot_data(trace, E_GS, tmp_path / "p.csv")
    text = (tmp_path / "p.csv").read_text()
    assert "# recursion_start=11" in text and "# recursion_start=21" in text
    assert (tmp_path / "p.svg").read_text().count("recursion @") == 2


def test_plot_output_is_reproducible(tmp_path):
    trace = make_trace(20, restarts=(5,))
    emit_plot_data(trace, E_GS, tmp_path / "a.csv")
    emit_plot_data(trace, E_GS, tmp_path / "b.csv")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_plot_rejects_empty_trace(tmp_path):
    with pytest.raises(ValueError):
        emit_plot_data(VqeTrace(), E_GS, tmp_path / "p.csv")


def test_forced_recursion_run_is_annotated(tmp_path):
    from kagomelab import ControllerConfig, efficient_su2, run_mitigated_vqe
    from kagomelab.lattice import PauliSum

    h = PauliSum(("XX", "YY", "ZZ"), (1.0, 1.0, 1.0))
    res = run_mitigated_vqe(
        h, efficient_su2(2, 1), "frozen", None, E_GS, ControllerConfig(max_cycles_per_pass=4),
        energy_fn=lambda p, hh, s: 0.5 * E_GS,
    )
    emit_plot_data(res.trace, E_GS, tmp_path / "r.csv", svg=False)
    starts = [ln for ln in (tmp_path / "r.csv").read_text().splitlines() if ln.startswith("# recursion_start=")]
    assert starts == [f"# recursion_start={c}" for c in (5, 9, 13, 17, 21)]


def test_noiseless_nft_final_point_is_in_band(tmp_path):
    cfg = RunConfig(mode="none", evaluator="exact", n_trials=1, max_cycles=10, seed=1, ground_energy=E_GS)
    _, results = run_batch(cfg, tmp_path)
    emit_plot_data(results[0].trace, E_GS, tmp_path / "p.csv", svg=False)
    last = (tmp_path / "p.csv").read_text().splitlines()[-1].split(",")
    assert abs(float(last[1]) - E_GS) < 0.01 * abs(E_GS)


def test_avg_cycles_counts_failures():
    from kagomelab import ExperimentResult

    results = [
        ExperimentResult(True, make_trace(4), 0.0, 0, 1.0, -18.0),
        ExperimentResult(False, make_trace(10), 0.1, 0, 1.0, -16.0),
    ]
    s = ExperimentSummary.from_results(results, 0.0)
    assert s.avg_cycles == 7.0 and s.failed == 1 and s.success_rate == 0.5
    assert np.isclose(s.success_rate, (s.total - s.failed) / s.total)
