"""Closed-form test functions and their high-dimensional embeddings.

Base functions take raw coordinates in their usual domains and are written in
minimization form; :class:`EmbeddedSynthetic` negates them by default so that
every problem in the package is maximized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sparsebo.space import SearchSpace

_B = 5.1 / (4.0 * math.pi ** 2)
_C = 5.0 / math.pi
_T = 1.0 / (8.0 * math.pi)

BRANIN_BOUNDS = ((-5.0, 10.0), (0.0, 15.0))
BRANIN_MIN = 0.397887357729739

HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN6_A = np.array([
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
])
HARTMANN6_P = 1e-4 * np.array([
    [1312, 1696, 5569, 124, 8283, 5886],
    [2329, 4135, 8307, 3736, 1004, 9991],
    [2348, 1451, 3522, 2883, 3047, 6650],
    [4047, 8828, 8732, 5743, 1091, 381],
])
HARTMANN6_MIN = -3.32236801141551
HARTMANN6_ARGMIN = (0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573)


def branin(X):
    """Branin function on ``[-5, 10] x [0, 15]``; ``X`` has shape ``(..., 2)``."""
    X = np.asarray(X, dtype=np.float64)
    x1, x2 = X[..., 0], X[..., 1]
    return (x2 - _B * x1 ** 2 + _C * x1 - 6.0) ** 2 + 10.0 * (1.0 - _T) * np.cos(x1) + 10.0


def log_branin(X):
    """``log(10 + Branin)``, whose negation is the log-transformed Branin."""
    return np.log(10.0 + branin(X))


def hartmann6(X):
    """Six-dimensional Hartmann function on the unit cube."""
    X = np.asarray(X, dtype=np.float64)
    inner = np.sum(HARTMANN6_A * (X[..., None, :] - HARTMANN6_P) ** 2, axis=-1)
    return -np.sum(HARTMANN6_ALPHA * np.exp(-inner), axis=-1)


BASE_FUNCTIONS = {
    "Branin": (branin, BRANIN_BOUNDS),
    "LogBranin": (log_branin, BRANIN_BOUNDS),
    "Hartmann6": (hartmann6, ((0.0, 1.0),) * 6),
}


@dataclass(frozen=True)
class EmbeddedSynthetic:
    """A low-dimensional test function hidden among inactive unit-cube coordinates.

    The active coordinates are mapped affinely onto the base function's domain.
    The baseline (sparse point) is the normalized origin.
    """

    base: str
    ambient_dim: int = 50
    active_dims: tuple | None = None
    negate: bool = True

    def __post_init__(self):
        if self.base not in BASE_FUNCTIONS:
            raise ValueError(f"unknown base function {self.base!r}")
        arity = len(BASE_FUNCTIONS[self.base][1])
        active = tuple(range(arity)) if self.active_dims is None else tuple(int(i) for i in self.active_dims)
        if len(active) != arity:
            raise ValueError(f"{self.base} needs {arity} active dims, got {len(active)}")
        if len(set(active)) != arity or min(active) < 0 or max(active) >= self.ambient_dim:
            raise ValueError("active dims must be distinct indices below ambient_dim")
        object.__setattr__(self, "active_dims", active)

    @property
    def name(self) -> str:
        return f"{self.base}{self.ambient_dim}D"

    @property
    def space(self) -> SearchSpace:
        return SearchSpace.unit(self.ambient_dim)

    @property
    def optimum(self) -> float:
        best = {"Branin": BRANIN_MIN, "LogBranin": math.log(10.0 + BRANIN_MIN),
                "Hartmann6": HARTMANN6_MIN}[self.base]
        return -best if self.negate else best

    def to_raw(self, x):
        """Raw base-function coordinates of unit-cube points."""
        x = np.asarray(x, dtype=np.float64)
        bounds = np.array(BASE_FUNCTIONS[self.base][1])
        z = x[..., list(self.active_dims)]
        return bounds[:, 0] + z * (bounds[:, 1] - bounds[:, 0])

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.ambient_dim:
            raise ValueError(f"expected {self.ambient_dim} coordinates, got {x.shape[-1]}")
        val = BASE_FUNCTIONS[self.base][0](self.to_raw(x))
        val = -val if self.negate else val
        return float(val) if np.ndim(val) == 0 else val

    evaluate = __call__

    def to_dict(self) -> dict:
        return {"type": "embedded", "base": self.base, "ambient_dim": self.ambient_dim,
                "active_dims": list(self.active_dims), "negate": self.negate}


def eval_synthetic(problem: EmbeddedSynthetic, x) -> float:
    return problem(x)


@dataclass(frozen=True)
class Quadratic1D:
    """``f(x) = -x^2`` on ``[0, 1]`` with the sparse point at 0.5."""

    baseline: float = 0.5

    name = "quadratic1d"

    @property
    def space(self) -> SearchSpace:
        return SearchSpace((0.0,), (1.0,), (self.baseline,))

    @property
    def optimum(self) -> float:
        return 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        val = -x[..., 0] ** 2
        return float(val) if np.ndim(val) == 0 else val

    evaluate = __call__

    def to_dict(self) -> dict:
        return {"type": "quadratic1d", "baseline": self.baseline}
