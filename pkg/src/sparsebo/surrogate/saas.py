"""SAAS-prior GP: hierarchical half-Cauchy shrinkage on inverse squared lengthscales.

    tau ~ HC(alpha),  rho_i ~ HC(tau),  outputscale ~ Gamma(2, 0.15),
    noise_excess ~ HC(0.1),  mean ~ N(0, 1)

Inference runs NUTS over ``u = [log tau, log rho_1..D, log outputscale,
log noise_excess, mean]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from sparsebo.surrogate import nuts
from sparsebo.surrogate.gp import (
    NOISE_FLOOR,
    FitError,
    KernelParams,
    PosteriorEnsemble,
    _training_data,
    log_marginal_likelihood,
    sq_diffs,
    standardize,
)

LOG_2_OVER_PI = math.log(2.0 / math.pi)
OUTPUTSCALE_SHAPE = 2.0
OUTPUTSCALE_RATE = 0.15
NOISE_SCALE = 0.1


def log_half_cauchy(t, scale):
    """Log density of the half-Cauchy distribution; ``-inf`` for ``t <= 0``."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = LOG_2_OVER_PI - math.log(scale) - np.log1p((t / scale) ** 2)
    val = np.where(t > 0, val, -np.inf)
    return float(val) if val.ndim == 0 else val


@dataclass
class McmcConfig:
    warmup: int = 256
    num_samples: int = 128
    thin: int = 8
    seed: int = 0
    alpha: float = 0.1
    max_tree_depth: int = 6


class SaasPosterior:
    """Unnormalized SAAS log posterior over the unconstrained vector."""

    def __init__(self, X, y, alpha=0.1):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.alpha = float(alpha)
        self.D = self.X.shape[1]
        self.D2 = sq_diffs(self.X)

    @property
    def dim(self) -> int:
        return self.D + 4

    def log_prob(self, u, jacobian=True):
        """Log density and gradient with respect to ``u``.

        With ``jacobian=True`` the log-Jacobian of the log transforms is added,
        giving the density of ``u`` itself (the sampler target).
        """
        u = np.asarray(u, dtype=np.float64)
        log_tau = u[0]
        log_rho = u[1:1 + self.D]
        tau = math.exp(log_tau)
        rho = np.exp(log_rho)
        log_s, log_t, mean = u[-3], u[-2], u[-1]
        t = math.exp(log_t)
        lml, g_lml = log_marginal_likelihood(u[1:], self.D2, self.y)
        if not np.isfinite(lml):
            return -np.inf, np.zeros_like(u)
        a2 = self.alpha ** 2
        rho2 = rho * rho
        tau2 = tau * tau
        lp = lml
        lp += self.D * LOG_2_OVER_PI - self.D * log_tau - np.sum(np.log1p(rho2 / tau2))
        lp += LOG_2_OVER_PI - math.log(self.alpha) - math.log1p(tau2 / a2)
        s = math.exp(log_s)
        lp += (OUTPUTSCALE_SHAPE * math.log(OUTPUTSCALE_RATE) - math.lgamma(OUTPUTSCALE_SHAPE)
               + (OUTPUTSCALE_SHAPE - 1.0) * log_s - OUTPUTSCALE_RATE * s)
        lp += LOG_2_OVER_PI - math.log(NOISE_SCALE) - math.log1p((t / NOISE_SCALE) ** 2)
        lp += -0.5 * mean ** 2 - 0.5 * math.log(2 * math.pi)
        g = np.zeros_like(u)
        g[1:] = g_lml
        g[0] = np.sum(-1.0 + 2.0 * rho2 / (tau2 + rho2)) - 2.0 * tau2 / (a2 + tau2)
        g[1:1 + self.D] += -2.0 * rho2 / (tau2 + rho2)
        g[-3] += (OUTPUTSCALE_SHAPE - 1.0) - OUTPUTSCALE_RATE * s
        g[-2] += -2.0 * t * t / (NOISE_SCALE ** 2 + t * t)
        g[-1] += -mean
        if jacobian:
            lp += log_tau + np.sum(log_rho) + log_s + log_t
            g[:-1] += 1.0
        return float(lp), g

    def initial_point(self, rng):
        u = np.concatenate([[math.log(self.alpha)], np.full(self.D, math.log(self.alpha)),
                            [0.0, math.log(0.01), 0.0]])
        return u + 0.01 * rng.standard_normal(u.shape[0])


def saas_log_density(params: KernelParams, tau: float, alpha: float, data) -> float:
    """SAAS log posterior (up to a constant) at constrained parameter values.

    ``data`` is ``(X, y_standardized)``. Returns ``-inf`` if any half-Cauchy
    argument is non-positive.
    """
    if not (tau > 0 and alpha > 0) or np.any(params.inv_sq_lengthscales <= 0):
        return -np.inf
    X, y = data
    post = SaasPosterior(X, y, alpha)
    u = np.concatenate([[math.log(tau)], params.to_unconstrained()])
    lp, _ = post.log_prob(u, jacobian=False)
    return lp


def fit_saas(data, config: McmcConfig | None = None) -> PosteriorEnsemble:
    """Sample the SAAS posterior with NUTS; returns ``num_samples // thin`` samples."""
    config = config or McmcConfig()
    X, y_raw = _training_data(data)
    if X.shape[0] < 2:
        raise ValueError("SAAS fit needs at least two observations")
    y, mu, sd, degenerate = standardize(y_raw)
    if degenerate:
        warnings.warn("objective values are constant; standard deviation floored", RuntimeWarning)
    post = SaasPosterior(X, y, config.alpha)
    rng = np.random.default_rng(config.seed)
    draws, stats = nuts.sample(post.log_prob, post.initial_point(rng), config.warmup,
                               config.num_samples, rng, max_tree_depth=config.max_tree_depth)
    draws = draws[::config.thin]
    samples = []
    for u in draws:
        try:
            samples.append(KernelParams.from_unconstrained(u[1:]))
        except ValueError:
            continue
    if not samples:
        raise FitError("no valid SAAS posterior samples")
    info = {"method": "saas", "tau": [float(math.exp(u[0])) for u in draws],
            "step_size": stats.step_size, "divergences": stats.divergences,
            "mean_tree_depth": stats.mean_tree_depth, "accept_prob": stats.accept_prob,
            "degenerate": degenerate}
    return PosteriorEnsemble(samples, X, y, mu, sd, info=info)
