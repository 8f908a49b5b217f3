"""Brute-force objective-versus-sparsity trade-off on dense grids.

Both helpers work in whatever coordinates ``f`` and the penalty share; pass
``bounds`` to grid over a raw domain instead of the unit cube.
"""

from __future__ import annotations

import numpy as np

from sparsebo.penalty import PenaltySpec, eval_exact


def _grid(bounds, resolution):
    axes = [np.linspace(lo, hi, resolution) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1), tuple(len(a) for a in axes)


def _evaluate_grid(f, penalty, bounds, resolution):
    bounds = [(0.0, 1.0)] * penalty.dims if bounds is None else [tuple(b) for b in bounds]
    if len(bounds) != penalty.dims:
        raise ValueError("bounds and penalty dimension disagree")
    if len(bounds) > 3:
        raise ValueError("grid oracles are limited to at most 3 dimensions")
    X, shape = _grid(bounds, resolution)
    fx = np.asarray(f(X), dtype=np.float64).reshape(-1)
    xi = np.asarray(eval_exact(penalty.exact(), X), dtype=np.float64).reshape(-1)
    return X, fx, xi, shape


def grid_slack(xi, shape):
    """Half the largest change in the penalty between neighbouring grid points."""
    grid = xi.reshape(shape)
    steps = [np.max(np.abs(np.diff(grid, axis=k))) for k in range(grid.ndim) if shape[k] > 1]
    return 0.5 * max(steps) if steps else 0.0


def tradeoff_oracle(f, penalty: PenaltySpec, theta_grid, x_grid_resolution: int,
                    bounds=None) -> list:
    """``[(theta, h(theta))]`` with ``h`` the best grid value of ``f`` at penalty ``theta``.

    A grid point counts toward ``theta`` when its exact penalty is within half
    the penalty spacing of the grid. ``h`` is ``None`` where nothing qualifies.
    """
    _, fx, xi, shape = _evaluate_grid(f, penalty, bounds, x_grid_resolution)
    slack = grid_slack(xi, shape)
    out = []
    for theta in theta_grid:
        mask = np.abs(xi - theta) <= slack
        out.append((float(theta), float(np.max(fx[mask])) if mask.any() else None))
    return out


def penalized_maximizers(f, penalty: PenaltySpec, lambdas, x_grid_resolution: int,
                         bounds=None) -> list:
    """Grid maximizer of ``f - lam * xi`` for each ``lam``: ``[(lam, x, xi)]``."""
    X, fx, xi, _ = _evaluate_grid(f, penalty, bounds, x_grid_resolution)
    out = []
    for lam in lambdas:
        i = int(np.argmax(fx - lam * xi))
        out.append((float(lam), X[i].copy(), float(xi[i])))
    return out
