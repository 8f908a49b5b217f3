"""Acquisition functions for sparse BO.

Every acquisition object exposes ``__call__(X) -> values`` and
``value_and_grad(X) -> (values, grads)`` on batches ``X`` of shape ``(m, D)``.
Values are averaged over the samples of the posterior ensemble. Penalties
inside an acquisition use the differentiable form carried by
``spec.penalty``; observed penalties always use the exact form.

The model object only needs ``predict_raw(X, grad)`` (per-sample mean and
standard deviation in raw objective units, shapes ``(M, m)`` and
``(M, m, D)`` for gradients) and ``best_observed``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from sparsebo import kernels
from sparsebo.penalty import PenaltySpec, eval_exact, eval_smooth_grad

logger = logging.getLogger(__name__)

KINDS = ("EI", "UCB", "EI_ER", "EI_IR", "EI_Chebyshev", "SEBO_EHVI")
REF_MODES = ("observed", "pareto")
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _npdf(z):
    return INV_SQRT_2PI * np.exp(-0.5 * z * z)


@dataclass(frozen=True)
class MCConfig:
    num_base_samples: int = 128
    seed: int = 0


@dataclass(frozen=True)
class AcquisitionSpec:
    kind: str
    penalty: PenaltySpec | None = None
    lam: float = 0.0
    beta: float = 4.0
    ref_point: tuple | None = None
    C: float = 0.05
    f_star_estimate: float | None = None
    ref_mode: str = "observed"
    mc: MCConfig = field(default_factory=MCConfig)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.ref_mode not in REF_MODES:
            raise ValueError(f"ref_mode must be one of {REF_MODES}")

    def with_penalty(self, penalty: PenaltySpec) -> "AcquisitionSpec":
        return replace(self, penalty=penalty)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "penalty": self.penalty.to_dict() if self.penalty else None,
                "lambda": self.lam, "beta": self.beta,
                "ref_point": list(self.ref_point) if self.ref_point is not None else None,
                "C": self.C, "f_star_estimate": self.f_star_estimate, "ref_mode": self.ref_mode,
                "mc": {"num_base_samples": self.mc.num_base_samples, "seed": self.mc.seed}}


# ---------------------------------------------------------------------------
# closed forms


def ei_analytic(mu, sigma, incumbent):
    """Expected improvement of a Gaussian over ``incumbent``."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if np.any(np.isnan(mu)) or np.any(np.isnan(sigma)) or np.isnan(incumbent):
        raise ValueError("NaN input to expected improvement")
    if np.any(sigma < 0):
        raise ValueError("sigma must be non-negative")
    val, _, _ = _ei_terms(mu, sigma, incumbent)
    return float(val) if val.ndim == 0 else val


def _ei_terms(mu, sigma, incumbent):
    """EI with its partial derivatives in ``mu`` and ``sigma``."""
    diff = mu - incumbent
    pos = sigma > 0
    safe = np.where(pos, sigma, 1.0)
    with np.errstate(over="ignore"):
        z = diff / safe
        cdf = ndtr(z)
        pdf = _npdf(z)
    val = np.where(pos, diff * cdf + sigma * pdf, np.maximum(diff, 0.0))
    d_mu = np.where(pos, cdf, (diff > 0).astype(np.float64))
    d_sigma = np.where(pos, pdf, 0.0)
    return np.maximum(val, 0.0), d_mu, d_sigma


def ucb(mu, sigma, beta):
    """Upper confidence bound ``mu + sqrt(beta) * sigma``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return mu + math.sqrt(beta) * np.asarray(sigma)


def ucb_external(mu, sigma, beta, lam, xi):
    """UCB of f, minus the penalty."""
    return ucb(mu, sigma, beta) - lam * xi


def ucb_internal(mu, sigma, beta, lam, xi):
    """UCB of the regularized objective ``f - lam * xi``."""
    return ucb(mu - lam * xi, sigma, beta)


def chebyshev_scalarize(f_val, xi_val, spec: AcquisitionSpec):
    """Augmented Chebyshev scalarization of (objective, penalty).

    The baseline penalty value is 0 by convention.
    """
    f_star = spec.f_star_estimate
    if f_star is None:
        raise ValueError("Chebyshev scalarization needs f_star_estimate")
    lam = spec.lam
    return spec.C * (f_val - lam * xi_val) - np.maximum(f_star - f_val, lam * xi_val)


# ---------------------------------------------------------------------------
# hypervolume


@dataclass
class Frontier:
    """Pareto set in (objective, -penalty) orientation, both maximized."""

    points: np.ndarray
    ref: tuple

    @property
    def f(self):
        return self.points[:, 0]

    @property
    def neg_xi(self):
        return self.points[:, 1]


def build_frontier(points, ref, warn=True) -> Frontier:
    """Prune to the non-dominated points that strictly dominate ``ref``.

    ``points`` are ``(f, -xi)`` pairs. The result is sorted by decreasing ``f``.
    A warning is issued only for non-dominated points dropped because of ``ref``.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    ref = (float(ref[0]), float(ref[1]))
    if pts.shape[0] == 0:
        return Frontier(np.zeros((0, 2)), ref)
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    keep = []
    best = -np.inf
    for i in order:
        if pts[i, 1] > best:
            keep.append(i)
            best = pts[i, 1]
    pts = pts[keep]
    ok = (pts[:, 0] > ref[0]) & (pts[:, 1] > ref[1])
    if warn and not np.all(ok):
        warnings.warn(f"dropping {int(np.sum(~ok))} frontier point(s) that do not dominate the reference point",
                      RuntimeWarning)
    return Frontier(pts[ok], ref)


def hypervolume_2d(frontier) -> float:
    """Exact area dominated by the frontier points above its reference point."""
    if isinstance(frontier, Frontier):
        return kernels.hypervolume_2d(frontier.points, frontier.ref)
    points, ref = frontier
    return kernels.hypervolume_2d(points, ref)


def default_ref_point(y, dims: int):
    """``(min y - 10% of range, -(D + 0.5))`` in (objective, -penalty) orientation."""
    y = np.asarray(y, dtype=np.float64)
    lo, hi = float(np.min(y)), float(np.max(y))
    span = hi - lo
    if span <= 0:
        span = max(abs(lo), 1.0)
    return (lo - 0.1 * span, -(dims + 0.5))


def pareto_ref_point(y, xi, dims: int):
    """Objective anchor from the current Pareto set: its worst value minus 10% of its range.

    Sparse points whose objective is worse than every frontier point then earn
    no hypervolume, which keeps the search away from the bad end of the trade-off.
    """
    y = np.asarray(y, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    order = np.lexsort((-y, xi))
    front, best = [], -np.inf
    for i in order:
        if y[i] > best:
            front.append(y[i])
            best = y[i]
    return default_ref_point(front, dims)


def base_normal_samples(n: int, seed: int) -> np.ndarray:
    """Scrambled-Sobol standard normal quantiles, fixed for a given seed."""
    sampler = qmc.Sobol(d=1, scramble=True, seed=np.random.default_rng(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = sampler.random(n).ravel()
    return ndtri(np.clip(u, 1e-10, 1.0 - 1e-10))


# ---------------------------------------------------------------------------
# acquisition objects


def _observed(log):
    if log is None:
        return None, None
    return np.asarray(log.Y, dtype=np.float64), np.asarray(log.X, dtype=np.float64)


class Acquisition:
    """Base class; subclasses implement :meth:`_evaluate`."""

    def __init__(self, model, spec: AcquisitionSpec, log=None):
        self.model = model
        self.spec = spec
        self.log = log

    @property
    def dims(self):
        return self.model.dims

    def with_penalty(self, penalty: PenaltySpec) -> "Acquisition":
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.spec = self.spec.with_penalty(penalty)
        return new

    def _penalty(self, X, grad):
        pen = self.spec.penalty
        if pen is None or self.spec.lam == 0 and self.spec.kind in ("EI_ER", "EI_IR"):
            z = np.zeros(X.shape[0])
            return (z, np.zeros_like(X)) if grad else (z, None)
        if pen.kind == "L0_exact":
            return eval_exact(pen, X) * np.ones(X.shape[0]), (np.zeros_like(X) if grad else None)
        val, g = eval_smooth_grad(pen, X)
        return np.asarray(val) * np.ones(X.shape[0]), g

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return self._evaluate(X, grad=False)[0]

    def value_and_grad(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return self._evaluate(X, grad=True)

    def _evaluate(self, X, grad):
        raise NotImplementedError


class ExpectedImprovement(Acquisition):
    """Ensemble-averaged analytic EI, optionally minus ``lam * xi`` (external regularization)."""

    def __init__(self, model, spec, log=None):
        super().__init__(model, spec, log)
        y, _ = _observed(log)
        if y is not None and y.size == 0:
            raise ValueError("expected improvement needs at least one observation")
        self.incumbent = float(np.max(y)) if y is not None else model.best_observed

    def _evaluate(self, X, grad):
        lam = self.spec.lam if self.spec.kind == "EI_ER" else 0.0
        if grad:
            mu, sigma, dmu, dsigma = self.model.predict_raw(X, grad=True)
        else:
            mu, sigma = self.model.predict_raw(X)
        ei, d_mu, d_sigma = _ei_terms(mu, sigma, self.incumbent)
        val = ei.mean(axis=0)
        xi, dxi = self._penalty(X, grad) if lam > 0 else (0.0, 0.0)
        val = val - lam * xi
        if not grad:
            return val, None
        g = np.mean(d_mu[..., None] * dmu + d_sigma[..., None] * dsigma, axis=0)
        return val, g - lam * dxi


class UpperConfidenceBound(Acquisition):
    """Ensemble-averaged UCB minus ``lam * xi`` (external and internal coincide)."""

    def _evaluate(self, X, grad):
        root = math.sqrt(self.spec.beta)
        lam = self.spec.lam
        if grad:
            mu, sigma, dmu, dsigma = self.model.predict_raw(X, grad=True)
        else:
            mu, sigma = self.model.predict_raw(X)
        xi, dxi = self._penalty(X, grad) if lam > 0 else (0.0, 0.0)
        val = ucb_external(mu, sigma, self.spec.beta, lam, xi).mean(axis=0)
        if not grad:
            return val, None
        return val, np.mean(dmu + root * dsigma, axis=0) - lam * dxi


class _MonteCarlo(Acquisition):
    def __init__(self, model, spec, log=None, base_samples=None):
        super().__init__(model, spec, log)
        if base_samples is None:
            base_samples = base_normal_samples(spec.mc.num_base_samples, spec.mc.seed)
        self.eps = np.asarray(base_samples, dtype=np.float64)

    def _samples(self, X, grad):
        """Pathwise samples ``(m, M, N)`` and their ``mu``/``sigma`` gradients."""
        if grad:
            mu, sigma, dmu, dsigma = self.model.predict_raw(X, grad=True)
        else:
            mu, sigma = self.model.predict_raw(X)
            dmu = dsigma = None
        f = mu.T[:, :, None] + sigma.T[:, :, None] * self.eps[None, None, :]
        return f, dmu, dsigma

    def _pathwise_grad(self, weights, dmu, dsigma):
        """Average of ``weights * df/dx`` where ``f = mu + sigma * eps``; weights ``(m, M, N)``."""
        w_mu = weights.mean(axis=2)
        w_sig = (weights * self.eps[None, None, :]).mean(axis=2)
        return (np.einsum("km,mkd->kd", w_mu, dmu) + np.einsum("km,mkd->kd", w_sig, dsigma)) / weights.shape[1]


class InternalRegularizedEI(_MonteCarlo):
    """Quasi-MC EI of ``g = f - lam * xi`` against the best observed ``y - lam * xi_exact``."""

    def __init__(self, model, spec, log, base_samples=None):
        super().__init__(model, spec, log, base_samples)
        if log is None or len(log) == 0:
            raise ValueError("internal regularization needs a non-empty observation log")
        exact = spec.penalty.exact() if spec.penalty is not None else None
        xi_obs = eval_exact(exact, log.X) if (exact is not None and spec.lam > 0) else np.zeros(len(log))
        self.incumbent = float(np.max(log.Y - spec.lam * np.asarray(xi_obs)))

    def _evaluate(self, X, grad):
        lam = self.spec.lam
        f, dmu, dsigma = self._samples(X, grad)
        xi, dxi = self._penalty(X, grad) if lam > 0 else (np.zeros(X.shape[0]), np.zeros_like(X))
        imp = f - lam * xi[:, None, None] - self.incumbent
        val = np.maximum(imp, 0.0).mean(axis=(1, 2))
        if not grad:
            return val, None
        active = (imp > 0).astype(np.float64)
        g = self._pathwise_grad(active, dmu, dsigma) - lam * active.mean(axis=(1, 2))[:, None] * dxi
        return val, g


class ChebyshevEI(_MonteCarlo):
    """Quasi-MC EI of the augmented Chebyshev scalarization."""

    def __init__(self, model, spec, log, base_samples=None):
        y = np.asarray(log.Y, dtype=np.float64)
        if spec.f_star_estimate is None:
            spec = replace(spec, f_star_estimate=float(np.max(y)))
        super().__init__(model, spec, log, base_samples)
        xi_obs = eval_exact(spec.penalty.exact(), log.X)
        self.incumbent = float(np.max(chebyshev_scalarize(y, np.asarray(xi_obs), spec)))

    def _evaluate(self, X, grad):
        spec = self.spec
        f, dmu, dsigma = self._samples(X, grad)
        xi, dxi = self._penalty(X, grad)
        xi3 = xi[:, None, None]
        t = chebyshev_scalarize(f, xi3, spec)
        imp = t - self.incumbent
        val = np.maximum(imp, 0.0).mean(axis=(1, 2))
        if not grad:
            return val, None
        active = (imp > 0).astype(np.float64)
        first = (spec.f_star_estimate - f) >= spec.lam * xi3
        dt_df = spec.C + first.astype(np.float64)
        dt_dxi = -spec.C * spec.lam - spec.lam * (~first)
        g = self._pathwise_grad(active * dt_df, dmu, dsigma)
        g += (active * dt_dxi).mean(axis=(1, 2))[:, None] * dxi
        return val, g


class SeboEHVI(_MonteCarlo):
    """Quasi-MC expected hypervolume improvement over (objective, -penalty).

    The penalty objective is deterministic: the candidate contributes
    ``-xi_smooth(x)`` while the observed frontier uses exact penalties.
    """

    chunk = 64

    def __init__(self, model, spec, log, base_samples=None):
        super().__init__(model, spec, log, base_samples)
        if spec.penalty is None:
            raise ValueError("SEBO needs a penalty")
        y = np.asarray(log.Y, dtype=np.float64) if log is not None else np.zeros(0)
        xi_obs = np.asarray(eval_exact(spec.penalty.exact(), log.X)) if y.size else np.zeros(0)
        ref = spec.ref_point
        if ref is None and not y.size:
            ref = (0.0, -(model.dims + 0.5))
        elif ref is None and spec.ref_mode == "pareto":
            ref = pareto_ref_point(y, xi_obs, model.dims)
        elif ref is None:
            ref = default_ref_point(y, model.dims)
        self.frontier = build_frontier(np.column_stack([y, -xi_obs]) if y.size else np.zeros((0, 2)), ref)

    def hvi(self, a, b):
        fr = self.frontier
        return kernels.hvi_batch(fr.f, fr.neg_xi, fr.ref, a, b)

    def _evaluate(self, X, grad):
        vals = np.empty(X.shape[0])
        grads = np.empty_like(X) if grad else None
        for start in range(0, X.shape[0], self.chunk):
            sl = slice(start, start + self.chunk)
            v, g = self._evaluate_chunk(X[sl], grad)
            vals[sl] = v
            if grad:
                grads[sl] = g
        return vals, grads

    def _evaluate_chunk(self, X, grad):
        f, dmu, dsigma = self._samples(X, grad)
        m, M, N = f.shape
        xi, dxi = self._penalty(X, grad)
        b = np.repeat(-xi, M * N)
        val, da, db = self.hvi(f.ravel(), b)
        val = val.reshape(m, M, N).mean(axis=(1, 2))
        if not grad:
            return val, None
        g = self._pathwise_grad(da.reshape(m, M, N), dmu, dsigma)
        g -= db.reshape(m, M, N).mean(axis=(1, 2))[:, None] * dxi
        return val, g


def make_acquisition(spec: AcquisitionSpec, model, log=None, base_samples=None) -> Acquisition:
    if spec.kind in ("EI", "EI_ER"):
        return ExpectedImprovement(model, spec, log)
    if spec.kind == "UCB":
        return UpperConfidenceBound(model, spec, log)
    if spec.kind == "EI_IR":
        return InternalRegularizedEI(model, spec, log, base_samples)
    if spec.kind == "EI_Chebyshev":
        return ChebyshevEI(model, spec, log, base_samples)
    return SeboEHVI(model, spec, log, base_samples)


def _single(acq, x):
    v, g = acq.value_and_grad(np.asarray(x, dtype=np.float64)[None, :])
    return float(v[0]), g[0]


def ei_er(ensemble, x, spec: AcquisitionSpec, log=None):
    """Externally regularized EI at ``x``: ``(value, gradient)``."""
    return _single(ExpectedImprovement(ensemble, replace(spec, kind="EI_ER"), log), x)


def ei_ir(ensemble, x, spec: AcquisitionSpec, log, base_samples=None):
    """Internally regularized quasi-MC EI at ``x``: ``(value, gradient)``."""
    return _single(InternalRegularizedEI(ensemble, replace(spec, kind="EI_IR"), log, base_samples), x)


def sebo_ehvi(ensemble, x, spec: AcquisitionSpec, log, base_samples=None):
    """SEBO expected hypervolume improvement at ``x``: ``(value, gradient)``."""
    return _single(SeboEHVI(ensemble, replace(spec, kind="SEBO_EHVI"), log, base_samples), x)
