import csv
import io
import json
import math
import os

import numpy as np
import pytest

from sparsebo.harness import cli
from sparsebo.harness.config import ExperimentConfig
from sparsebo.harness.metrics import (
    best_at_sparsity,
    best_at_sparsity_trace,
    extract_frontier,
    mean_two_se,
    pareto_indices,
)
from sparsebo.harness.reports import emit_reports, load_report, metric_table
from sparsebo.harness import runner
from sparsebo.harness.runner import run_experiment, run_replication, trial_seed
from sparsebo.space import ObservationLog, SearchSpace
from sparsebo.surrogate import FitError

FAST = {"mcmc": {"warmup": 32, "num_samples": 16, "thin": 4},
        "optimizer": {"raw_candidates": 64, "num_restarts": 2, "num_a": 4},
        "acquisition": {"num_base_samples": 32}}


def small(method="SEBO", **kw):
    d = {"problem": "branin", "problem_params": {"ambient_dim": 4}, "method": method,
         "num_init": 4, "num_trials": 6, "replications": 1,
         "penalty": {"kind": "L0_exact"} if method not in ("Sobol", "GPEI", "SAASBO") else None}
    d.update(FAST)
    d.update(kw)
    return ExperimentConfig.from_dict(d)


def _log(rows, dims=3):
    log = ObservationLog(SearchSpace.unit(dims))
    for x, y in rows:
        log.add(x, y, float(np.count_nonzero(x)))
    return log


def test_best_at_sparsity_examples():
    log = _log([([0.0, 0.0, 0.0], 1.0), ([0.5, 0.0, 0.0], 3.0), ([0.5, 0.2, 0.9], 7.0)])
    assert best_at_sparsity(log, 3, -99) == 7.0
    assert best_at_sparsity(log, 0, -99) == 1.0
    assert best_at_sparsity(log, 2, -99) == 3.0
    assert best_at_sparsity(_log([([0.4, 0.4, 0.4], 2.0)]), 1, -99) == -99
    one = _log([([0.0, 0.0, 0.0], -4.0)])
    assert all(best_at_sparsity(one, k, -99) == -4.0 for k in range(4))
    assert best_at_sparsity(_log([([5e-7, 0.0, 0.0], 2.0)]), 0, -99) == 2.0
    assert list(best_at_sparsity_trace(log, 1, -99)) == [1.0, 3.0, 3.0]


def test_frontier_examples():
    one = _log([([0.1, 0.0, 0.0], 2.0)])
    assert len(extract_frontier(one).points) == 1
    two = _log([([0.1, 0.0, 0.0], 2.0), ([0.1, 0.3, 0.0], 1.0)])
    fr = extract_frontier(two)
    assert fr.points == [(0, 2.0, 1.0)]
    assert fr.staircase == [None, 2.0, 2.0, 2.0]
    assert pareto_indices([1.0, 1.0, 3.0], [1.0, 1.0, 2.0]) == [0, 2]


def test_mean_two_se():
    assert mean_two_se([1.0, 3.0]) == (2.0, pytest.approx(2.0))
    assert mean_two_se([5.0]) == (5.0, 0.0)
    assert all(math.isnan(v) for v in mean_two_se([]))


def test_config_validation_and_sweep(tmp_path):
    with pytest.raises(ValueError):
        small(method="Random")
    with pytest.raises(ValueError):
        small(num_init=9)
    with pytest.raises(ValueError):
        ExperimentConfig("branin", "SEBO", 2, 4)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"problem": "branin", "method": "Sobol", "num_init": 1,
                                    "num_trials": 2, "colour": "red"})
    path = tmp_path / "sweep.json"
    d = small("EI_ER").to_dict()
    d["lambdas"] = [0.01, 1.0]
    path.write_text(json.dumps(d))
    sweep = ExperimentConfig.load(path)
    assert [c.lam for c in sweep] == [0.01, 1.0] and sweep[0].name != sweep[1].name
    assert small().with_overrides(3, 10).seeds == [10, 11, 12]


def test_trial_seed_distinct():
    assert len({trial_seed(0, t) for t in range(50)} | {trial_seed(1, t) for t in range(50)}) == 100


def test_sobol_method_never_fits(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("no fitting expected")
    monkeypatch.setattr(runner, "fit_saas", boom)
    monkeypatch.setattr(runner, "fit_map", boom)
    rep = run_replication(small("Sobol", num_trials=8), 0)
    assert len(rep.log) == 8 and {o.metadata["source"] for o in rep.log} == {"sobol"}


def test_fit_failure_falls_back_to_sobol(monkeypatch):
    def fail(*a, **k):
        raise FitError("forced")
    monkeypatch.setattr(runner, "fit_saas", fail)
    rep = run_replication(small(), 0)
    assert len(rep.log) == 6 and [t for t, _ in rep.fallbacks] == [4, 5]
    assert rep.log.observations[4].metadata["source"] == "fallback"


def test_sebo_first_candidate_on_quadratic():
    cfg = ExperimentConfig.from_dict({
        "problem": "quadratic1d", "method": "SEBO", "num_init": 4, "num_trials": 5,
        "penalty": {"kind": "L0_exact"}, "initial_points": [[0.0], [0.25], [0.75], [1.0]]})
    rep = run_replication(cfg, 0)
    assert rep.log.observations[4].x[0] == 0.5 and rep.log.observations[4].xi == 0.0


def test_runs_are_deterministic():
    cfg = small("SEBO")
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert all(o.metadata["source"] == "model" for o in a.replications[0].log.observations[4:])


def test_gpei_and_penalized_methods_run():
    for method in ("GPEI", "EI_ER", "EI_IR", "EI_Chebyshev"):
        rep = run_replication(small(method, num_trials=5, lam=0.1), 0)
        assert len(rep.log) == 5 and not rep.fallbacks


def test_timeout_marks_incomplete():
    cfg = small("Sobol", trial_timeout=0.0, replications=2)
    report = run_experiment(cfg)
    assert all(not r.complete and len(r.log) == 1 for r in report.replications)
    rows = metric_table(report)
    assert math.isnan(rows[-1][3])


def test_emit_reports(tmp_path):
    report = run_experiment(small("Sobol", replications=2, impute_value=-500.0, k_values=[0, 2]))
    out = tmp_path / "run"
    emit_reports(report, out)
    names = sorted(os.listdir(out))
    assert names == ["frontier.json", "metrics.csv", "plot_data.json", "rep_0.csv", "rep_1.csv",
                     "report.json", "timings.json"]
    rows = list(csv.reader(io.StringIO((out / "metrics.csv").read_text())))
    assert rows[0] == ["trial", "k", "rep_0", "rep_1", "mean", "two_se"]
    assert len(rows) == 1 + 6 * 2
    first = {p: (out / p).read_bytes() for p in names if p != "timings.json"}
    again = tmp_path / "again"
    emit_reports(load_report(out), again)
    assert all((again / p).read_bytes() == b for p, b in first.items())
    plot = json.loads((out / "plot_data.json").read_text())
    assert set(plot["best_at_sparsity"]) == {"0", "2"}


def test_zero_replications_headers_only(tmp_path):
    report = run_experiment(small("Sobol", replications=0))
    emit_reports(report, tmp_path)
    assert (tmp_path / "metrics.csv").read_text() == "trial,k,mean,two_se\n"


def test_cli_run_report_demo(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(small("Sobol").to_dict()))
    out = tmp_path / "o"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out), "--reps", "2", "--seed-base", "5"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert [r["seed"] for r in rep["replications"]] == [5, 6]
    before = (out / "metrics.csv").read_bytes()
    (out / "metrics.csv").unlink()
    assert cli.main(["report", "--in", str(out)]) == 0
    assert (out / "metrics.csv").read_bytes() == before
    demo = tmp_path / "d.json"
    assert cli.main(["demo-homotopy", "--out", str(demo)]) == 0
    assert json.loads(demo.read_text())["x"] == [0.5]
    with pytest.raises(SystemExit):
        cli.main(["fly"])
