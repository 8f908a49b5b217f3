"""Acquisition maximization over the unit cube.

``optimize_fixed`` screens random raw candidates and runs box-projected
L-BFGS ascent from the best of them. ``optimize_homotopy`` continues the
solution along a decreasing sequence of smoothing widths and finishes by
snapping nearly-sparse coordinates exactly onto the baseline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from sparsebo.penalty import a_schedule

logger = logging.getLogger(__name__)


class OptimizationError(RuntimeError):
    pass


@dataclass
class OptimizerConfig:
    num_restarts: int = 10
    raw_candidates: int = 512
    max_inner_iters: int = 200
    grad_tol: float = 1e-8
    schedule: list = field(default_factory=a_schedule)
    clamp_delta: float = 1e-2
    clamp_acq_rel_slack: float = 1e-6
    clamp_acq_abs_slack: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.num_restarts < 1:
            raise ValueError("num_restarts must be at least 1")
        sched = [float(a) for a in self.schedule]
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("schedule must be strictly decreasing")
        self.schedule = sched

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class CandidateResult:
    x: np.ndarray
    acq_value: float
    homotopy_trace: list = field(default_factory=list)
    clamped_dims: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {"x": [float(v) for v in self.x], "acq_value": float(self.acq_value),
                "homotopy_trace": [{"a": a, "x": [float(v) for v in x], "acq": float(v)}
                                   for a, x, v in self.homotopy_trace],
                "clamped_dims": sorted(int(i) for i in self.clamped_dims)}


def _value(acq, x):
    return float(acq(np.asarray(x)[None, :])[0])


def ascend(acq, x0, config: OptimizerConfig):
    """Projected quasi-Newton ascent from ``x0``; never returns a worse point."""
    x0 = np.clip(np.asarray(x0, dtype=np.float64), 0.0, 1.0)
    v0 = _value(acq, x0)
    if not np.isfinite(v0):
        return x0, v0

    def neg(x):
        v, g = acq.value_and_grad(x[None, :])
        v, g = float(v[0]), g[0]
        if not np.isfinite(v) or not np.all(np.isfinite(g)):
            return 1e30, np.zeros_like(x)
        return -v, -g

    res = optimize.minimize(neg, x0, jac=True, method="L-BFGS-B", bounds=[(0.0, 1.0)] * x0.shape[0],
                            options={"maxiter": config.max_inner_iters, "gtol": config.grad_tol})
    x = np.clip(res.x, 0.0, 1.0)
    v = _value(acq, x)
    if not np.isfinite(v) or v < v0:
        return x0, v0
    return x, v


def raw_candidates(dims, config: OptimizerConfig, extra=()):
    rng = np.random.default_rng(config.seed)
    pts = [np.asarray(e, dtype=np.float64) for e in extra]
    X = rng.uniform(size=(config.raw_candidates, dims))
    if pts:
        X = np.vstack([np.array(pts), X])
    return X


def optimize_fixed(acq, config: OptimizerConfig, extra_seeds=(), dims=None) -> CandidateResult:
    """Multi-start maximization of a single acquisition.

    ``extra_seeds`` (typically the baseline and the incumbent) are screened
    alongside ``config.raw_candidates`` uniform points.
    """
    dims = dims or acq.dims
    X = raw_candidates(dims, config, extra_seeds)
    vals = np.concatenate([acq(X[i:i + 256]) for i in range(0, X.shape[0], 256)])
    finite = np.flatnonzero(np.isfinite(vals))
    if finite.size == 0:
        raise OptimizationError("acquisition is not finite at any raw candidate")
    order = finite[np.argsort(-vals[finite], kind="stable")]
    starts = order[:config.num_restarts]
    best_x, best_v = None, -np.inf
    for idx in starts:
        x, v = ascend(acq, X[idx], config)
        if np.isfinite(v) and v > best_v:
            best_x, best_v = x, v
    if best_x is None:
        raise OptimizationError("every restart produced a non-finite acquisition value")
    return CandidateResult(best_x, best_v)


def clamp_to_baseline(x, acq, baseline, config: OptimizerConfig):
    """Snap coordinates within ``clamp_delta`` of the baseline if the acquisition allows.

    The joint snap is tried first; otherwise coordinates are snapped one at a
    time, nearest first, each accepted only if the acquisition does not drop by
    more than the configured slack.
    """
    x = np.asarray(x, dtype=np.float64).copy()
    baseline = np.asarray(baseline, dtype=np.float64)
    disp = np.abs(x - baseline)
    near = np.flatnonzero(disp <= config.clamp_delta)
    if near.size == 0:
        return x, frozenset()
    v0 = _value(acq, x)
    tol = config.clamp_acq_rel_slack * abs(v0) + config.clamp_acq_abs_slack
    trial = x.copy()
    trial[near] = baseline[near]
    if _value(acq, trial) >= v0 - tol:
        return trial, frozenset(int(i) for i in near)
    clamped = []
    current = x
    for i in near[np.argsort(disp[near], kind="stable")]:
        trial = current.copy()
        trial[i] = baseline[i]
        if _value(acq, trial) >= v0 - tol:
            current = trial
            clamped.append(int(i))
    return current, frozenset(clamped)


def optimize_homotopy(acq_family, config: OptimizerConfig, baseline, extra_seeds=(),
                      dims=None) -> CandidateResult:
    """Continuation over ``config.schedule``: full multi-start at the first width,
    then a warm-started ascent at each subsequent width, then clamping."""
    schedule = config.schedule
    if not schedule:
        raise ValueError("schedule must not be empty")
    first = acq_family(schedule[0])
    res = optimize_fixed(first, config, extra_seeds, dims=dims)
    x, v = res.x, res.acq_value
    trace = [(schedule[0], x.copy(), v)]
    acq = first
    for a in schedule[1:]:
        acq = acq_family(a)
        x, v = ascend(acq, x, config)
        if not np.isfinite(v):
            raise OptimizationError(f"non-finite acquisition at a={a}")
        trace.append((a, x.copy(), v))
    x, clamped = clamp_to_baseline(x, acq, baseline, config)
    return CandidateResult(x, _value(acq, x), trace, clamped)
