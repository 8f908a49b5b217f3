"""Sparsity-aware performance metrics over observation logs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sparsebo.penalty import active_count
from sparsebo.space import ObservationLog

DEFAULT_ZERO_TOL = 1e-6


def active_counts(log: ObservationLog, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Number of coordinates of each observation that differ from the baseline."""
    if len(log) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.asarray(active_count(log.X, log.space.baseline, zero_tol), dtype=np.int64)


def best_at_sparsity(log: ObservationLog, k: int, impute_value: float,
                     zero_tol: float = DEFAULT_ZERO_TOL) -> float:
    """Best observed value among points with at most ``k`` active dimensions."""
    counts = active_counts(log, zero_tol)
    mask = counts <= k
    if not mask.any():
        return float(impute_value)
    return float(np.max(log.Y[mask]))


def best_at_sparsity_trace(log: ObservationLog, k: int, impute_value: float,
                           zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """``best_at_sparsity`` after each trial."""
    counts = active_counts(log, zero_tol)
    y = np.where(counts <= k, log.Y, -np.inf)
    running = np.maximum.accumulate(y) if y.size else y
    return np.where(np.isfinite(running), running, float(impute_value))


@dataclass
class ParetoFrontier:
    """Non-dominated observations under (max y, min exact penalty) plus the staircase.

    ``points`` holds ``(trial, y, xi)`` sorted by increasing penalty.
    ``staircase[level]`` is the best value among points with at most ``level``
    active dims, ``None`` where no point qualifies.
    """

    points: list
    staircase: list

    def to_dict(self) -> dict:
        return {"points": [{"trial": t, "y": y, "xi": xi} for t, y, xi in self.points],
                "staircase": self.staircase}


def pareto_indices(y, xi) -> list:
    """Indices of non-dominated points, ordered by penalty then value; ties keep the earliest."""
    y = np.asarray(y, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    order = np.lexsort((np.arange(y.size), -y, xi))
    keep, best = [], -math.inf
    for i in order:
        if y[i] > best:
            keep.append(int(i))
            best = y[i]
    return keep


def extract_frontier(log: ObservationLog, zero_tol: float = DEFAULT_ZERO_TOL) -> ParetoFrontier:
    y, xi = log.Y, log.XI
    points = [(log.observations[i].trial, float(y[i]), float(xi[i])) for i in pareto_indices(y, xi)]
    counts = active_counts(log, zero_tol)
    stair, best = [], None
    for level in range(log.space.dims + 1):
        hit = y[counts == level]
        if hit.size:
            top = float(hit.max())
            best = top if best is None else max(best, top)
        stair.append(best)
    return ParetoFrontier(points, stair)


def mean_two_se(values) -> tuple:
    """Mean and two standard errors across replications (NaNs ignored)."""
    v = np.asarray(values, dtype=np.float64)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return math.nan, math.nan
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(2.0 * v.std(ddof=1) / math.sqrt(v.size))
