"""Search spaces, unit-cube normalization, Sobol initialization and observation logs."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class SearchSpace:
    """Box-bounded domain with a designated sparse (baseline) point.

    ``integer_dims`` are optimized as continuous coordinates and rounded only
    when a point is denormalized for evaluation.
    """

    lower: tuple
    upper: tuple
    baseline_raw: tuple
    integer_dims: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        base = tuple(float(v) for v in self.baseline_raw)
        if not (len(lower) == len(upper) == len(base)) or len(lower) == 0:
            raise ValueError("lower, upper and baseline_raw must have the same positive length")
        for i, (lo, hi, b) in enumerate(zip(lower, upper, base)):
            if not lo < hi:
                raise ValueError(f"dimension {i}: lower {lo} must be < upper {hi}")
            if not lo <= b <= hi:
                raise ValueError(f"dimension {i}: baseline {b} outside [{lo}, {hi}]")
        dims = frozenset(int(i) for i in self.integer_dims)
        if any(i < 0 or i >= len(lower) for i in dims):
            raise ValueError("integer_dims index out of range")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "baseline_raw", base)
        object.__setattr__(self, "integer_dims", dims)

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def baseline(self) -> np.ndarray:
        """Baseline point in normalized coordinates."""
        return normalize(np.array(self.baseline_raw), self)

    @classmethod
    def unit(cls, dims: int, baseline=None) -> "SearchSpace":
        base = np.zeros(dims) if baseline is None else np.broadcast_to(baseline, (dims,))
        return cls(lower=(0.0,) * dims, upper=(1.0,) * dims, baseline_raw=tuple(base))

    def to_dict(self) -> dict:
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "baseline_raw": list(self.baseline_raw),
            "integer_dims": sorted(self.integer_dims),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SearchSpace":
        return cls(
            lower=tuple(d["lower"]),
            upper=tuple(d["upper"]),
            baseline_raw=tuple(d["baseline_raw"]),
            integer_dims=frozenset(d.get("integer_dims", ())),
        )


def _check_dims(point, space):
    point = np.asarray(point, dtype=np.float64)
    if point.shape[-1] != space.dims:
        raise ValueError(f"expected {space.dims} coordinates, got {point.shape[-1]}")
    return point


def normalize(point, space: SearchSpace) -> np.ndarray:
    """Affinely map raw coordinates onto ``[0, 1]^D``."""
    point = _check_dims(point, space)
    lo = np.array(space.lower)
    hi = np.array(space.upper)
    if np.any(point < lo) or np.any(point > hi):
        raise ValueError("point outside search-space bounds")
    return (point - lo) / (hi - lo)


def denormalize(point, space: SearchSpace) -> np.ndarray:
    """Inverse of :func:`normalize`; integer dimensions are rounded."""
    point = _check_dims(point, space)
    lo = np.array(space.lower)
    hi = np.array(space.upper)
    raw = lo + point * (hi - lo)
    if space.integer_dims:
        idx = sorted(space.integer_dims)
        raw[..., idx] = np.clip(np.floor(raw[..., idx] + 0.5), np.ceil(lo[idx]), np.floor(hi[idx]))
    return raw


def snap(point, space: SearchSpace) -> np.ndarray:
    """Normalized coordinates of the point that is actually evaluated."""
    if not space.integer_dims:
        return np.asarray(point, dtype=np.float64).copy()
    return normalize(denormalize(point, space), space)


def sobol_init(space: SearchSpace, n: int, seed: int) -> list:
    """``n`` scrambled Sobol points in the unit cube, deterministic in ``seed``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return []
    sampler = qmc.Sobol(d=space.dims, scramble=True, seed=np.random.default_rng(seed))
    with warnings.catch_warnings():
        # balance-property warning for non power-of-two n
        warnings.simplefilter("ignore", UserWarning)
        pts = sampler.random(n)
    return [p for p in pts]


@dataclass
class Observation:
    x: np.ndarray
    y: float
    xi: float
    trial: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "x": [float(v) for v in self.x],
            "y": float(self.y),
            "xi": float(self.xi),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Observation":
        return cls(np.array(d["x"], dtype=np.float64), float(d["y"]), float(d["xi"]),
                   int(d["trial"]), dict(d.get("metadata", {})))


class ObservationLog:
    """Ordered record of evaluated points; trial indices run 0, 1, 2, ..."""

    def __init__(self, space: SearchSpace, seed: int = 0, observations=None):
        self.space = space
        self.seed = int(seed)
        self.observations = []
        for obs in observations or ():
            self._append(obs)

    def _append(self, obs: Observation):
        if obs.trial != len(self.observations):
            raise ValueError(f"trial index {obs.trial} breaks contiguity (expected {len(self.observations)})")
        x = np.asarray(obs.x, dtype=np.float64)
        if x.shape != (self.space.dims,):
            raise ValueError("observation dimension mismatch")
        if np.any(x < 0) or np.any(x > 1):
            raise ValueError("observation outside the unit cube")
        self.observations.append(obs)

    def add(self, x, y: float, xi: float, **metadata) -> Observation:
        obs = Observation(np.array(x, dtype=np.float64), float(y), float(xi),
                          len(self.observations), dict(metadata))
        self._append(obs)
        return obs

    def __len__(self):
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    @property
    def X(self) -> np.ndarray:
        if not self.observations:
            return np.zeros((0, self.space.dims))
        return np.array([o.x for o in self.observations])

    @property
    def Y(self) -> np.ndarray:
        return np.array([o.y for o in self.observations], dtype=np.float64)

    @property
    def XI(self) -> np.ndarray:
        return np.array([o.xi for o in self.observations], dtype=np.float64)

    def to_dict(self) -> dict:
        return {
            "space": self.space.to_dict(),
            "baseline": [float(v) for v in self.space.baseline],
            "seed": self.seed,
            "observations": [o.to_dict() for o in self.observations],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationLog":
        space = SearchSpace.from_dict(d["space"])
        return cls(space, d.get("seed", 0), [Observation.from_dict(o) for o in d["observations"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ObservationLog":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial"] + [f"x_{i}" for i in range(self.space.dims)] + ["y", "xi"])
        for o in self.observations:
            w.writerow([o.trial] + [repr(float(v)) for v in o.x] + [repr(float(o.y)), repr(float(o.xi))])
        return buf.getvalue()
