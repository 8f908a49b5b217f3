"""Sparsity penalties measured relative to a baseline point.

``L0_exact`` counts displaced coordinates; ``L0_smoothed`` is the Gaussian-bump
relaxation ``D - sum_i exp(-0.5 (r_i / a)^2)`` used inside acquisition
optimization; ``L1`` and ``GroupLasso`` are the usual convex penalties.
All functions accept a single point ``(D,)`` or a batch ``(m, D)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

KINDS = ("L0_exact", "L0_smoothed", "L1", "GroupLasso")

DEFAULT_A_START = 10 ** -0.5
DEFAULT_A_END = 1e-3
DEFAULT_NUM_A = 30


@dataclass(frozen=True)
class PenaltySpec:
    kind: str
    baseline: tuple
    groups: tuple = ()
    a: float = DEFAULT_A_START
    zero_tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}")
        base = tuple(float(v) for v in np.ravel(self.baseline))
        object.__setattr__(self, "baseline", base)
        if self.kind == "L0_smoothed" and not self.a > 0:
            raise ValueError("smoothing width a must be positive")
        if self.zero_tol < 0:
            raise ValueError("zero_tol must be non-negative")
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if self.kind == "GroupLasso":
            flat = sorted(i for g in groups for i in g)
            if flat != list(range(len(base))):
                raise ValueError("groups must partition the dimension indices")

    @property
    def dims(self) -> int:
        return len(self.baseline)

    def with_a(self, a: float) -> "PenaltySpec":
        return replace(self, a=float(a))

    def exact(self) -> "PenaltySpec":
        """Reporting counterpart: smoothed L0 reports as exact L0."""
        if self.kind == "L0_smoothed":
            return replace(self, kind="L0_exact")
        return self

    def smoothed(self, a: float) -> "PenaltySpec":
        """Differentiable counterpart at width ``a`` (L1/GroupLasso are returned as-is)."""
        if self.kind in ("L0_exact", "L0_smoothed"):
            return replace(self, kind="L0_smoothed", a=float(a))
        return self

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "baseline": list(self.baseline),
            "groups": [list(g) for g in self.groups],
            "a": self.a,
            "zero_tol": self.zero_tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PenaltySpec":
        return cls(kind=d["kind"], baseline=tuple(d["baseline"]),
                   groups=tuple(tuple(g) for g in d.get("groups", ())),
                   a=float(d.get("a", DEFAULT_A_START)), zero_tol=float(d.get("zero_tol", 1e-6)))


def _displacement(spec, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != spec.dims:
        raise ValueError(f"expected {spec.dims} coordinates, got {x.shape[-1]}")
    return x - np.asarray(spec.baseline)


def bump(r, a):
    """Gaussian bump ``exp(-0.5 (r/a)^2)``."""
    return np.exp(-0.5 * (np.asarray(r) / a) ** 2)


def bump_grad(r, a):
    """Derivative of :func:`bump` with respect to ``r``."""
    r = np.asarray(r)
    return -(r / a**2) * bump(r, a)


def active_count(x, baseline, zero_tol=1e-6):
    r = np.asarray(x, dtype=np.float64) - np.asarray(baseline, dtype=np.float64)
    return np.sum(np.abs(r) > zero_tol, axis=-1)


def eval_exact(spec: PenaltySpec, x):
    r = _displacement(spec, x)
    if spec.kind == "L0_exact":
        val = np.sum(np.abs(r) > spec.zero_tol, axis=-1).astype(np.float64)
    elif spec.kind == "L0_smoothed":
        val = spec.dims - np.sum(bump(r, spec.a), axis=-1)
    elif spec.kind == "L1":
        val = np.sum(np.abs(r), axis=-1)
    else:
        val = sum(np.linalg.norm(r[..., list(g)], axis=-1) for g in spec.groups)
    return float(val) if np.ndim(val) == 0 else val


def eval_smooth_grad(spec: PenaltySpec, x):
    """Value and (sub)gradient; the subgradient at a kink is 0."""
    if spec.kind == "L0_exact":
        raise ValueError("exact L0 is not differentiable; optimize the smoothed penalty via homotopy")
    r = _displacement(spec, x)
    if spec.kind == "L0_smoothed":
        phi = bump(r, spec.a)
        val = spec.dims - phi.sum(axis=-1)
        grad = (r / spec.a**2) * phi
    elif spec.kind == "L1":
        val = np.abs(r).sum(axis=-1)
        grad = np.sign(r)
    else:
        val = np.zeros(r.shape[:-1])
        grad = np.zeros_like(r)
        for g in spec.groups:
            g = list(g)
            norm = np.linalg.norm(r[..., g], axis=-1)
            val = val + norm
            safe = np.where(norm > 0, norm, 1.0)
            grad[..., g] = np.where(norm[..., None] > 0, r[..., g] / safe[..., None], 0.0)
    if np.ndim(val) == 0:
        val = float(val)
    return val, grad


def a_schedule(k: int = DEFAULT_NUM_A, a_start: float = DEFAULT_A_START,
               a_end: float = DEFAULT_A_END) -> list:
    """``k`` smoothing widths, log-linearly spaced from ``a_start`` down to ``a_end``."""
    if not (a_start > 0 and a_end > 0):
        raise ValueError("schedule endpoints must be positive")
    if not a_start > a_end:
        raise ValueError("a_start must exceed a_end")
    if k < 2:
        raise ValueError("schedule needs at least two values")
    vals = np.logspace(np.log10(a_start), np.log10(a_end), k)
    vals[0] = a_start
    vals[-1] = a_end
    return [float(v) for v in vals]
