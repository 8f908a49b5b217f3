"""ARD Matern-5/2 Gaussian processes on the unit cube.

Hyperparameters are handled in an unconstrained vector
``[log rho_1..D, log outputscale, log noise_excess, mean]`` where
``noise = NOISE_FLOOR + noise_excess``. Targets are standardized before fitting.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

logger = logging.getLogger(__name__)

SQRT5 = math.sqrt(5.0)
NOISE_FLOOR = 1e-8
Y_STD_FLOOR = 1e-12
JITTER_START = 1e-8
JITTER_MAX = 1e-4
LOG_2PI = math.log(2.0 * math.pi)


class FitError(RuntimeError):
    """Raised when a Gram matrix cannot be factorized even after maximal jitter."""


@dataclass(frozen=True)
class KernelParams:
    outputscale: float
    inv_sq_lengthscales: np.ndarray
    noise: float
    mean: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.inv_sq_lengthscales, dtype=np.float64).ravel()
        object.__setattr__(self, "inv_sq_lengthscales", rho)
        for name, v in (("outputscale", self.outputscale), ("noise", self.noise)):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not (np.all(np.isfinite(rho)) and np.all(rho > 0)):
            raise ValueError("inverse squared lengthscales must be positive and finite")
        if not np.isfinite(self.mean):
            raise ValueError("mean must be finite")

    @property
    def dims(self) -> int:
        return self.inv_sq_lengthscales.shape[0]

    def to_unconstrained(self) -> np.ndarray:
        excess = max(self.noise - NOISE_FLOOR, 1e-12)
        return np.concatenate([np.log(self.inv_sq_lengthscales),
                               [math.log(self.outputscale), math.log(excess), self.mean]])

    @classmethod
    def from_unconstrained(cls, u) -> "KernelParams":
        u = np.asarray(u, dtype=np.float64)
        return cls(outputscale=float(np.exp(u[-3])), inv_sq_lengthscales=np.exp(u[:-3]),
                   noise=NOISE_FLOOR + float(np.exp(u[-2])), mean=float(u[-1]))

    def to_dict(self) -> dict:
        return {"outputscale": self.outputscale,
                "inv_sq_lengthscales": [float(v) for v in self.inv_sq_lengthscales],
                "noise": self.noise, "mean": self.mean}

    @classmethod
    def from_dict(cls, d) -> "KernelParams":
        return cls(d["outputscale"], np.array(d["inv_sq_lengthscales"]), d["noise"], d.get("mean", 0.0))


def _m52_from_r2(r2):
    r = np.sqrt(np.maximum(r2, 0.0))
    e = np.exp(-SQRT5 * r)
    k = (1.0 + SQRT5 * r + (5.0 / 3.0) * r2) * e
    # derivative with respect to r^2; finite at r = 0
    dk_dr2 = -(5.0 / 6.0) * (1.0 + SQRT5 * r) * e
    return k, dk_dr2


def matern52(x, z, params: KernelParams) -> float:
    """ARD Matern-5/2 covariance between two points."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.shape[-1] != params.dims:
        raise ValueError("dimension mismatch")
    r2 = float(np.sum(params.inv_sq_lengthscales * (x - z) ** 2))
    k, _ = _m52_from_r2(r2)
    return params.outputscale * float(k)


def matern52_grad(x, z, params: KernelParams) -> np.ndarray:
    """Gradient of :func:`matern52` with respect to ``x``."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    d = x - z
    r2 = float(np.sum(params.inv_sq_lengthscales * d ** 2))
    _, g = _m52_from_r2(r2)
    return params.outputscale * g * 2.0 * params.inv_sq_lengthscales * d


def sq_diffs(X):
    """Pairwise squared coordinate differences, flattened to ``(n*n, D)``."""
    X = np.asarray(X, dtype=np.float64)
    diff = X[:, None, :] - X[None, :, :]
    return (diff * diff).reshape(-1, X.shape[1])


def _cholesky(K, outputscale):
    jitter = 0.0
    n = K.shape[0]
    while True:
        try:
            return linalg.cholesky(K + jitter * np.eye(n), lower=True, check_finite=False), jitter
        except linalg.LinAlgError:
            jitter = JITTER_START * outputscale if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX * outputscale * (1 + 1e-9):
                raise FitError("Gram matrix not positive definite after maximal jitter")


def log_marginal_likelihood(u, D2, y, want_grad=True):
    """Gaussian log marginal likelihood and its gradient in unconstrained space.

    ``D2`` is :func:`sq_diffs` of the training inputs, ``y`` standardized targets.
    Returns ``-inf`` (and a zero gradient) if the Gram matrix cannot be factorized.
    """
    n = y.shape[0]
    rho = np.exp(u[:-3])
    s = math.exp(u[-3])
    noise_ex = math.exp(u[-2])
    noise = NOISE_FLOOR + noise_ex
    mean = u[-1]
    r2 = (D2 @ rho).reshape(n, n)
    kb, dkb = _m52_from_r2(r2)
    K = s * kb
    K[np.diag_indices(n)] += noise
    try:
        L, _ = _cholesky(K, s)
    except FitError:
        return -np.inf, np.zeros_like(u)
    resid = y - mean
    alpha = linalg.cho_solve((L, True), resid, check_finite=False)
    lml = -0.5 * resid @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * LOG_2PI
    if not want_grad:
        return float(lml), None
    Kinv = linalg.cho_solve((L, True), np.eye(n), check_finite=False)
    W = np.outer(alpha, alpha) - Kinv
    grad = np.empty_like(u)
    grad[:-3] = 0.5 * rho * ((W * (s * dkb)).ravel() @ D2)
    grad[-3] = 0.5 * np.sum(W * (s * kb))
    grad[-2] = 0.5 * np.trace(W) * noise_ex
    grad[-1] = np.sum(alpha)
    return float(lml), grad


def standardize(y):
    """Return ``(y_std_units, mean, std, degenerate)``."""
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise ValueError("objective values must be finite")
    mu = float(np.mean(y)) if y.size else 0.0
    sd = float(np.std(y, ddof=1)) if y.size > 1 else 0.0
    degenerate = sd < Y_STD_FLOOR
    if degenerate:
        sd = Y_STD_FLOOR
    return (y - mu) / sd, mu, sd, degenerate


class PosteriorEnsemble:
    """A set of GP hyperparameter samples conditioned on the same data.

    Predictions are returned per sample in standardized units; ``y_mean`` and
    ``y_std`` convert to raw objective units.
    """

    def __init__(self, samples, train_x, train_y, y_mean=0.0, y_std=1.0, info=None):
        if len(samples) < 1:
            raise ValueError("ensemble needs at least one sample")
        self.samples = list(samples)
        self.train_x = np.asarray(train_x, dtype=np.float64).reshape(-1, self.samples[0].dims)
        self.train_y = np.asarray(train_y, dtype=np.float64).ravel()
        self.y_mean = float(y_mean)
        self.y_std = float(y_std)
        self.info = dict(info or {})
        self.rho = np.array([p.inv_sq_lengthscales for p in self.samples])
        self.outputscale = np.array([p.outputscale for p in self.samples])
        self.noise = np.array([p.noise for p in self.samples])
        self.mean = np.array([p.mean for p in self.samples])
        self._factorize()

    @property
    def num_samples(self) -> int:
        return len(self.samples)

    @property
    def dims(self) -> int:
        return self.rho.shape[1]

    def _factorize(self):
        n = self.train_x.shape[0]
        M = self.num_samples
        self.alpha = np.zeros((M, n))
        self.Linv = np.zeros((M, n, n))
        self.jitter = np.zeros(M)
        if n == 0:
            return
        D2 = sq_diffs(self.train_x)
        for m in range(M):
            kb, _ = _m52_from_r2((D2 @ self.rho[m]).reshape(n, n))
            K = self.outputscale[m] * kb
            K[np.diag_indices(n)] += self.noise[m]
            L, self.jitter[m] = _cholesky(K, self.outputscale[m])
            self.alpha[m] = linalg.cho_solve((L, True), self.train_y - self.mean[m], check_finite=False)
            self.Linv[m] = linalg.solve_triangular(L, np.eye(n), lower=True, check_finite=False)

    def gram(self, m: int) -> np.ndarray:
        """Training covariance (with noise and jitter) for sample ``m``."""
        n = self.train_x.shape[0]
        kb, _ = _m52_from_r2((sq_diffs(self.train_x) @ self.rho[m]).reshape(n, n))
        K = self.outputscale[m] * kb
        K[np.diag_indices(n)] += self.noise[m] + self.jitter[m]
        return K

    def predict(self, X, grad=False, observation_noise=False):
        """Per-sample marginal mean and variance at the rows of ``X``.

        Returns ``mean, var`` of shape ``(M, q)``; with ``grad=True`` also their
        derivatives with respect to ``X`` of shape ``(M, q, D)``.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        M, q, n = self.num_samples, X.shape[0], self.train_x.shape[0]
        if X.shape[1] != self.dims:
            raise ValueError("dimension mismatch")
        var0 = self.outputscale + (self.noise if observation_noise else 0.0)
        if n == 0:
            mean = np.repeat(self.mean[:, None], q, axis=1)
            var = np.repeat(var0[:, None], q, axis=1)
            if grad:
                z = np.zeros((M, q, self.dims))
                return mean, var, z, z.copy()
            return mean, var
        diff = X[:, None, :] - self.train_x[None, :, :]
        r2 = np.einsum("qnd,md->mqn", diff * diff, self.rho)
        kb, dkb = _m52_from_r2(r2)
        k = self.outputscale[:, None, None] * kb
        mean = self.mean[:, None] + np.einsum("mqn,mn->mq", k, self.alpha)
        w = np.einsum("mij,mqj->mqi", self.Linv, k)
        var = var0[:, None] - np.sum(w * w, axis=-1)
        neg = var <= 0.0
        var = np.where(neg, 0.0, var)
        if not grad:
            return mean, var
        G = self.outputscale[:, None, None] * dkb
        two_rho = 2.0 * self.rho[:, None, :]
        dmean = two_rho * np.einsum("mqn,qnd->mqd", G * self.alpha[:, None, :], diff)
        v = np.einsum("mji,mqj->mqi", self.Linv, w)
        dvar = -2.0 * two_rho * np.einsum("mqn,qnd->mqd", G * v, diff)
        dvar = np.where(neg[..., None], 0.0, dvar)
        return mean, var, dmean, dvar

    @property
    def best_observed(self) -> float:
        """Largest training target in raw units."""
        if self.train_y.size == 0:
            raise ValueError("ensemble has no training data")
        return self.y_mean + self.y_std * float(np.max(self.train_y))

    def predict_raw(self, X, grad=False):
        """Per-sample mean and standard deviation of the latent objective in raw units."""
        out = self.predict(X, grad=grad)
        mu = self.y_mean + self.y_std * out[0]
        sd = np.sqrt(out[1])
        sigma = self.y_std * sd
        if not grad:
            return mu, sigma
        dmu = self.y_std * out[2]
        safe = np.where(sd > 0, sd, 1.0)
        dsigma = np.where(sd[..., None] > 0, self.y_std * out[3] / (2.0 * safe[..., None]), 0.0)
        return mu, sigma, dmu, dsigma

    def posterior(self, X, observation_noise=False):
        """Per-sample joint posterior: list of ``{"mean", "cov"}`` in standardized units."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        q, n = X.shape[0], self.train_x.shape[0]
        out = []
        for m in range(self.num_samples):
            r2q = np.sum(self.rho[m] * (X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
            Kqq = self.outputscale[m] * _m52_from_r2(r2q)[0]
            if observation_noise:
                Kqq = Kqq + self.noise[m] * np.eye(q)
            if n == 0:
                mu = np.full(q, self.mean[m])
                cov = Kqq
            else:
                r2 = np.sum(self.rho[m] * (X[:, None, :] - self.train_x[None, :, :]) ** 2, axis=-1)
                k = self.outputscale[m] * _m52_from_r2(r2)[0]
                mu = self.mean[m] + k @ self.alpha[m]
                w = self.Linv[m] @ k.T
                cov = Kqq - w.T @ w
            cov = 0.5 * (cov + cov.T)
            out.append({"mean": mu, "cov": cov})
        return out

    def to_dict(self) -> dict:
        return {"samples": [p.to_dict() for p in self.samples],
                "y_mean": self.y_mean, "y_std": self.y_std,
                "train_x": self.train_x.tolist(), "train_y": self.train_y.tolist()}

    @classmethod
    def from_dict(cls, d) -> "PosteriorEnsemble":
        samples = [KernelParams.from_dict(s) for s in d["samples"]]
        return cls(samples, np.array(d["train_x"]).reshape(-1, samples[0].dims),
                   np.array(d["train_y"]), d["y_mean"], d["y_std"])


def posterior(ensemble: PosteriorEnsemble, X, observation_noise=False):
    """Joint posterior per sample plus de-standardization constants."""
    return {"samples": ensemble.posterior(X, observation_noise=observation_noise),
            "y_mean": ensemble.y_mean, "y_std": ensemble.y_std}


def _training_data(data):
    if hasattr(data, "X") and hasattr(data, "Y"):
        return np.asarray(data.X, dtype=np.float64), np.asarray(data.Y, dtype=np.float64)
    X, y = data
    return np.atleast_2d(np.asarray(X, dtype=np.float64)), np.asarray(y, dtype=np.float64).ravel()


@dataclass
class MapConfig:
    num_restarts: int = 4
    maxiter: int = 200
    seed: int = 0


# weak priors for the MAP baseline: lengthscale ~ Gamma(3, 6), outputscale ~ Gamma(2, 0.15),
# noise excess ~ HalfCauchy(0.1), mean ~ N(0, 1)
def _map_log_prior(u):
    rho = np.exp(u[:-3])
    ell = rho ** -0.5
    s = math.exp(u[-3])
    t = math.exp(u[-2])
    lp = np.sum(2.0 * np.log(ell) - 6.0 * ell) + (math.log(s) - 0.15 * s)
    lp += -math.log1p((t / 0.1) ** 2) - 0.5 * u[-1] ** 2
    g = np.empty_like(u)
    g[:-3] = -1.0 + 3.0 * ell
    g[-3] = 1.0 - 0.15 * s
    g[-2] = -2.0 * t * t / (0.01 + t * t)
    g[-1] = -u[-1]
    return float(lp), g


def _map_bounds(D):
    return ([(math.log(1e-4), math.log(1e4))] * D
            + [(math.log(1e-3), math.log(1e3)), (math.log(1e-10), math.log(10.0)), (-10.0, 10.0)])


def fit_map(data, config: MapConfig | None = None) -> PosteriorEnsemble:
    """Maximum a posteriori GP fit; returns a single-sample ensemble.

    ``data`` is an :class:`~sparsebo.space.ObservationLog` or an ``(X, y)`` pair.
    """
    config = config or MapConfig()
    X, y_raw = _training_data(data)
    if X.shape[0] < 2:
        raise ValueError("MAP fit needs at least two observations")
    y, mu, sd, degenerate = standardize(y_raw)
    if degenerate:
        warnings.warn("objective values are constant; standard deviation floored", RuntimeWarning)
    D = X.shape[1]
    D2 = sq_diffs(X)

    def neg_obj(u):
        lml, g = log_marginal_likelihood(u, D2, y)
        if not np.isfinite(lml):
            return 1e25, np.zeros_like(u)
        lp, gp = _map_log_prior(u)
        return -(lml + lp), -(g + gp)

    rng = np.random.default_rng(config.seed)
    starts = [np.concatenate([np.full(D, math.log(4.0)), [0.0, math.log(1e-2), 0.0]])]
    for _ in range(config.num_restarts - 1):
        starts.append(np.concatenate([rng.uniform(math.log(0.5), math.log(50.0), D),
                                      [rng.uniform(-1.0, 1.0), rng.uniform(math.log(1e-6), math.log(0.1)),
                                       rng.uniform(-0.5, 0.5)]]))
    bounds = _map_bounds(D)
    best_u, best_val = None, np.inf
    init_vals = []
    for u0 in starts:
        f0, _ = neg_obj(u0)
        init_vals.append(-f0)
        res = optimize.minimize(neg_obj, u0, jac=True, method="L-BFGS-B", bounds=bounds,
                                options={"maxiter": config.maxiter})
        u, val = (res.x, res.fun) if res.fun <= f0 else (u0, f0)
        if val < best_val:
            best_u, best_val = u, val
    if not np.isfinite(best_val) or best_val >= 1e25:
        raise FitError("MAP fit failed at every restart")
    params = KernelParams.from_unconstrained(best_u)
    info = {"method": "map", "objective": -best_val, "initial_objectives": init_vals,
            "degenerate": degenerate}
    return PosteriorEnsemble([params], X, y, mu, sd, info=info)
