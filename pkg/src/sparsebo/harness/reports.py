"""Write run artifacts: per-replication logs, metric tables, frontiers and plot data.

Everything except ``timings.json`` is a deterministic function of the report,
so re-emitting the same report reproduces the files byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os

import numpy as np

from sparsebo.harness.metrics import best_at_sparsity_trace, extract_frontier, mean_two_se
from sparsebo.harness.runner import RunReport


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def _impute(report: RunReport) -> float:
    cfg = report.config
    if cfg.impute_value is not None:
        return float(cfg.impute_value)
    ys = [y for r in report.replications for y in r.log.Y]
    return float(min(ys)) if ys else math.nan


def _k_values(report: RunReport) -> list:
    if report.config.k_values:
        return list(report.config.k_values)
    dims = report.replications[0].log.space.dims if report.replications else 0
    return list(range(dims + 1))


def metric_table(report: RunReport) -> list:
    """Rows ``(trial, k, [per-replication values], mean, two_se)``; 1-based trial counts.

    Trials an incomplete replication never reached are NaN and excluded from the
    mean.
    """
    cfg = report.config
    if not report.replications:
        return []
    impute = _impute(report)
    rows = []
    traces = {}
    for k in _k_values(report):
        per_rep = []
        for r in report.replications:
            tr = np.full(cfg.num_trials, np.nan)
            vals = best_at_sparsity_trace(r.log, k, impute)
            tr[:vals.size] = vals
            per_rep.append(tr)
        traces[k] = per_rep
    for t in range(cfg.num_trials):
        for k in _k_values(report):
            vals = [float(tr[t]) for tr in traces[k]]
            mean, se2 = mean_two_se(vals)
            rows.append((t + 1, k, vals, mean, se2))
    return rows


def _write(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(v):
    return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v


def _metrics_csv(report, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "k"] + [f"rep_{i}" for i in range(len(report.replications))] + ["mean", "two_se"])
    for trial, k, vals, mean, se2 in rows:
        w.writerow([trial, k] + [_fmt(v) for v in vals] + [_fmt(mean), _fmt(se2)])
    return buf.getvalue()


def _plot_data(report, rows) -> dict:
    ks = _k_values(report)
    curves = {str(k): {"trial": [], "mean": [], "two_se": []} for k in ks}
    for trial, k, _, mean, se2 in rows:
        c = curves[str(k)]
        c["trial"].append(trial)
        c["mean"].append(_clean(mean))
        c["two_se"].append(_clean(se2))
    stairs = [extract_frontier(r.log).staircase for r in report.replications]
    tradeoff = []
    if stairs:
        impute = _impute(report)
        for level in range(len(stairs[0])):
            vals = [impute if s[level] is None else s[level] for s in stairs]
            mean, se2 = mean_two_se(vals)
            tradeoff.append({"active_dims": level, "mean": _clean(mean), "two_se": _clean(se2)})
    return {"name": report.config.name, "method": report.config.method,
            "impute_value": _clean(_impute(report)), "best_at_sparsity": curves,
            "final_tradeoff": tradeoff}


def emit_reports(report: RunReport, out_dir) -> list:
    """Write all artifacts into ``out_dir``; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def put(name, text):
        path = os.path.join(out_dir, name)
        _write(path, text)
        written.append(path)

    for i, r in enumerate(report.replications):
        put(f"rep_{i}.csv", r.log.to_csv())
    rows = metric_table(report)
    put("metrics.csv", _metrics_csv(report, rows))
    frontiers = [{"replication": i, "seed": r.seed, **extract_frontier(r.log).to_dict()}
                 for i, r in enumerate(report.replications)]
    put("frontier.json", _dump(frontiers))
    put("plot_data.json", _dump(_plot_data(report, rows)))
    put("report.json", _dump(report.to_dict()))
    put("timings.json", _dump(report.timings()))
    return written


def load_report(in_dir) -> RunReport:
    with open(os.path.join(in_dir, "report.json")) as fh:
        d = json.load(fh)
    timings = None
    tpath = os.path.join(in_dir, "timings.json")
    if os.path.exists(tpath):
        with open(tpath) as fh:
            timings = json.load(fh)
    return RunReport.from_dict(d, timings)
