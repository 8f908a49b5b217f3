"""No-U-Turn sampler with dual-averaging step size and diagonal metric adaptation.

Follows the slice-variable formulation of Hoffman & Gelman (2014, Algorithm 6).
``logp_grad(theta)`` must return ``(log density, gradient)``; a non-finite
log density marks the state invalid (treated as divergent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DELTA_MAX = 1000.0


@dataclass
class NutsStats:
    step_size: float
    inv_metric: np.ndarray
    mean_tree_depth: float
    divergences: int
    accept_prob: float


class _Tree:
    __slots__ = ("th_m", "r_m", "g_m", "th_p", "r_p", "g_p", "th", "g", "lp", "n", "s", "a", "na")


def _safe(logp_grad, theta):
    lp, g = logp_grad(theta)
    if not np.isfinite(lp) or not np.all(np.isfinite(g)):
        return -np.inf, np.zeros_like(theta)
    return lp, g


class NUTS:
    def __init__(self, logp_grad, dim, rng, max_tree_depth=6, target_accept=0.8):
        self.logp_grad = logp_grad
        self.dim = dim
        self.rng = rng
        self.max_tree_depth = max_tree_depth
        self.target_accept = target_accept
        self.inv_metric = np.ones(dim)
        self.divergences = 0

    def _leapfrog(self, theta, r, g, eps):
        r = r + 0.5 * eps * g
        theta = theta + eps * self.inv_metric * r
        lp, g = _safe(self.logp_grad, theta)
        r = r + 0.5 * eps * g
        return theta, r, g, lp

    def _kinetic(self, r):
        return 0.5 * np.dot(r * self.inv_metric, r)

    def _momentum(self):
        return self.rng.standard_normal(self.dim) / np.sqrt(self.inv_metric)

    def _no_uturn(self, th_m, th_p, r_m, r_p):
        d = th_p - th_m
        return np.dot(d, self.inv_metric * r_m) >= 0 and np.dot(d, self.inv_metric * r_p) >= 0

    def find_step_size(self, theta, lp, g):
        eps = 1.0
        r = self._momentum()
        h0 = lp - self._kinetic(r)
        _, r1, _, lp1 = self._leapfrog(theta, r, g, eps)
        log_ratio = (lp1 - self._kinetic(r1)) - h0 if np.isfinite(lp1) else -np.inf
        direction = 1.0 if log_ratio > math.log(0.5) else -1.0
        for _ in range(100):
            if direction > 0 and not log_ratio > math.log(0.5):
                break
            if direction < 0 and not log_ratio < math.log(0.5):
                break
            eps = eps * (2.0 ** direction)
            _, r1, _, lp1 = self._leapfrog(theta, r, g, eps)
            log_ratio = (lp1 - self._kinetic(r1)) - h0 if np.isfinite(lp1) else -np.inf
        return eps

    def _build(self, theta, r, g, log_u, v, j, eps, h0):
        t = _Tree()
        if j == 0:
            th1, r1, g1, lp1 = self._leapfrog(theta, r, g, v * eps)
            joint = lp1 - self._kinetic(r1) if np.isfinite(lp1) else -np.inf
            t.th_m = t.th_p = t.th = th1
            t.r_m = t.r_p = r1
            t.g_m = t.g_p = t.g = g1
            t.lp = lp1
            t.n = 1 if log_u <= joint else 0
            t.s = log_u < joint + DELTA_MAX
            if not t.s:
                self.divergences += 1
            t.a = min(1.0, math.exp(joint - h0)) if np.isfinite(joint) else 0.0
            t.na = 1
            return t
        t = self._build(theta, r, g, log_u, v, j - 1, eps, h0)
        if not t.s:
            return t
        if v < 0:
            t2 = self._build(t.th_m, t.r_m, t.g_m, log_u, v, j - 1, eps, h0)
            t.th_m, t.r_m, t.g_m = t2.th_m, t2.r_m, t2.g_m
        else:
            t2 = self._build(t.th_p, t.r_p, t.g_p, log_u, v, j - 1, eps, h0)
            t.th_p, t.r_p, t.g_p = t2.th_p, t2.r_p, t2.g_p
        n_tot = t.n + t2.n
        if n_tot > 0 and self.rng.uniform() < t2.n / n_tot:
            t.th, t.g, t.lp = t2.th, t2.g, t2.lp
        t.a += t2.a
        t.na += t2.na
        t.n = n_tot
        t.s = t2.s and self._no_uturn(t.th_m, t.th_p, t.r_m, t.r_p)
        return t

    def transition(self, theta, lp, g, eps):
        """One NUTS transition; returns ``(theta, lp, g, accept_stat, depth)``."""
        r0 = self._momentum()
        h0 = lp - self._kinetic(r0)
        log_u = h0 + math.log(self.rng.uniform())
        th_m = th_p = theta
        r_m = r_p = r0
        g_m = g_p = g
        n = 1
        s = True
        depth = 0
        a_sum, na_sum = 0.0, 0
        while s and depth < self.max_tree_depth:
            v = -1 if self.rng.uniform() < 0.5 else 1
            if v < 0:
                t = self._build(th_m, r_m, g_m, log_u, v, depth, eps, h0)
                th_m, r_m, g_m = t.th_m, t.r_m, t.g_m
            else:
                t = self._build(th_p, r_p, g_p, log_u, v, depth, eps, h0)
                th_p, r_p, g_p = t.th_p, t.r_p, t.g_p
            if t.s and self.rng.uniform() < t.n / n:
                theta, lp, g = t.th, t.lp, t.g
            n += t.n
            a_sum += t.a
            na_sum += t.na
            s = t.s and self._no_uturn(th_m, th_p, r_m, r_p)
            depth += 1
        return theta, lp, g, a_sum / max(na_sum, 1), depth


def _adaptation_windows(num_warmup):
    """Stan-style slow windows between a fast initial and terminal buffer."""
    init = int(0.15 * num_warmup)
    term = int(0.1 * num_warmup)
    start, end = init, num_warmup - term
    if end - start < 20:
        return []
    span = end - start
    first = start + span // 3
    return [(start, first), (first, end)]


def sample(logp_grad, init, num_warmup, num_samples, rng, max_tree_depth=6, target_accept=0.8):
    """Run NUTS; returns ``(samples (num_samples, d), NutsStats)``."""
    theta = np.asarray(init, dtype=np.float64).copy()
    dim = theta.shape[0]
    sampler = NUTS(logp_grad, dim, rng, max_tree_depth, target_accept)
    lp, g = _safe(logp_grad, theta)
    if not np.isfinite(lp):
        raise RuntimeError("initial point has zero posterior density")

    def restart(eps):
        return {"mu": math.log(10.0 * eps), "hbar": 0.0, "log_eps": math.log(eps),
                "log_eps_bar": 0.0, "t": 0}

    eps = sampler.find_step_size(theta, lp, g)
    da = restart(eps)
    windows = _adaptation_windows(num_warmup)
    window_ends = {end: start for start, end in windows}
    buffer = []
    gamma, t0, kappa = 0.05, 10.0, 0.75
    depths, accepts = [], []
    out = np.empty((num_samples, dim))
    for it in range(num_warmup + num_samples):
        theta, lp, g, acc, depth = sampler.transition(theta, lp, g, eps)
        if it < num_warmup:
            da["t"] += 1
            t = da["t"]
            da["hbar"] = (1 - 1 / (t + t0)) * da["hbar"] + (target_accept - acc) / (t + t0)
            da["log_eps"] = da["mu"] - math.sqrt(t) / gamma * da["hbar"]
            w = t ** -kappa
            da["log_eps_bar"] = w * da["log_eps"] + (1 - w) * da["log_eps_bar"]
            eps = math.exp(da["log_eps"])
            if any(s <= it < e for s, e in windows):
                buffer.append(theta.copy())
            if (it + 1) in window_ends and len(buffer) > 5:
                arr = np.array(buffer)
                nb = arr.shape[0]
                var = np.var(arr, axis=0, ddof=1)
                sampler.inv_metric = (nb / (nb + 5.0)) * var + 1e-3 * (5.0 / (nb + 5.0))
                buffer = []
                eps = sampler.find_step_size(theta, lp, g)
                da = restart(eps)
            if it == num_warmup - 1:
                eps = math.exp(da["log_eps_bar"])
        else:
            out[it - num_warmup] = theta
            depths.append(depth)
            accepts.append(acc)
    stats = NutsStats(step_size=eps, inv_metric=sampler.inv_metric.copy(),
                      mean_tree_depth=float(np.mean(depths)) if depths else 0.0,
                      divergences=sampler.divergences,
                      accept_prob=float(np.mean(accepts)) if accepts else 0.0)
    return out, stats
