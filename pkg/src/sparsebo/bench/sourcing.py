"""Content-sourcing simulator for a recommender system.

Each of ``S`` sources mixes ``T`` latent topics; each topic is a distribution
over ``K`` items, and each item carries a quality score. A retrieval policy
says how many items to pull from each source. The quality of a policy is the
total score of the distinct items retrieved minus a weighted retrieval cost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from sparsebo import kernels
from sparsebo.space import SearchSpace, denormalize

NUM_TOPICS = 8
NUM_ITEMS = 1000
NUM_SOURCES = 25
MAX_PER_SOURCE = 50
THETA_CONCENTRATION = 0.2
PHI_CONCENTRATION = 0.5
TOPIC_LOG_MEAN = 0.25
TOPIC_LOG_SD = 1.5
COST_SD = 0.1
COST_WEIGHT = 0.6
DEFAULT_REPS = 1000


@dataclass
class SourcingModel:
    theta: np.ndarray
    phi: np.ndarray
    Q: np.ndarray
    m: np.ndarray
    c: np.ndarray
    seed: int

    @property
    def shape(self) -> tuple:
        """``(sources, topics, items)``."""
        return self.theta.shape[0], self.theta.shape[1], self.phi.shape[1]

    def __post_init__(self):
        self.theta_cum = _cumulative(self.theta)
        self.phi_cum = _cumulative(self.phi)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "theta": self.theta.tolist(), "phi": self.phi.tolist(),
                "Q": self.Q.tolist(), "m": self.m.tolist(), "c": self.c.tolist()}

    @classmethod
    def from_dict(cls, d) -> "SourcingModel":
        return cls(theta=np.array(d["theta"]), phi=np.array(d["phi"]), Q=np.array(d["Q"]),
                   m=np.array(d["m"]), c=np.array(d["c"]), seed=int(d["seed"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SourcingModel":
        return cls.from_dict(json.loads(text))


def _cumulative(P):
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    return np.ascontiguousarray(cum)


def item_scores(phi, Q):
    return phi.T @ Q


def source_costs(theta, Q, noise):
    """Per-item retrieval cost of every source, truncated below at 0."""
    q = theta @ Q
    return np.maximum(q / (2.0 * q.sum()) + COST_SD * noise, 0.0)


def sourcing_generate(seed: int, sources: int = NUM_SOURCES, topics: int = NUM_TOPICS,
                      items: int = NUM_ITEMS) -> SourcingModel:
    rng = np.random.default_rng(seed)
    theta = rng.dirichlet(np.full(topics, THETA_CONCENTRATION), size=sources)
    phi = rng.dirichlet(np.full(items, PHI_CONCENTRATION), size=topics)
    Q = rng.lognormal(TOPIC_LOG_MEAN, TOPIC_LOG_SD, size=topics)
    noise = rng.standard_normal(sources)
    return SourcingModel(theta=theta, phi=phi, Q=Q, m=item_scores(phi, Q),
                         c=source_costs(theta, Q, noise), seed=int(seed))


def _check_policy(model, policy):
    policy = np.asarray(policy)
    S = model.theta.shape[0]
    if policy.shape != (S,):
        raise ValueError(f"policy must have {S} entries")
    if np.any(policy != np.round(policy)):
        raise ValueError("policy entries must be integers")
    policy = policy.astype(np.int64)
    if np.any(policy < 0) or np.any(policy > MAX_PER_SOURCE):
        raise ValueError(f"policy entries must lie in [0, {MAX_PER_SOURCE}]")
    return policy


def sourcing_evaluate(model: SourcingModel, policy, reps: int = DEFAULT_REPS, seed: int = 0,
                      impl=None) -> dict:
    """Mean quality and its standard error over ``reps`` simulated retrievals."""
    policy = _check_policy(model, policy)
    if reps < 1:
        raise ValueError("reps must be positive")
    cost = float(model.c @ policy)
    total = int(policy.sum())
    rng = np.random.default_rng(seed)
    u_topic = rng.random((reps, total))
    u_item = rng.random((reps, total))
    rs = kernels.sourcing_relevance(model.theta_cum, model.phi_cum, model.m, policy,
                                    u_topic, u_item, impl=impl)
    quality = rs - COST_WEIGHT * cost
    mean = float(np.mean(quality))
    se = float(np.std(quality, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return {"mean_quality": mean, "std_err": se, "cost": cost}


@dataclass
class SourcingProblem:
    """Maximize simulated policy quality over 25 integer retrieval counts."""

    model_seed: int = 0
    reps: int = DEFAULT_REPS
    eval_seed: int = 0

    name = "sourcing"

    def __post_init__(self):
        self.model = sourcing_generate(self.model_seed)

    @property
    def space(self) -> SearchSpace:
        S = self.model.theta.shape[0]
        return SearchSpace((0.0,) * S, (float(MAX_PER_SOURCE),) * S, (0.0,) * S,
                           integer_dims=frozenset(range(S)))

    optimum = None

    def __call__(self, x):
        policy = denormalize(np.asarray(x, dtype=np.float64), self.space)
        return sourcing_evaluate(self.model, policy, self.reps, self.eval_seed)["mean_quality"]

    evaluate = __call__

    def to_dict(self) -> dict:
        return {"type": "sourcing", "model_seed": self.model_seed, "reps": self.reps,
                "eval_seed": self.eval_seed}
