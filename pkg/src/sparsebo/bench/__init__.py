"""Benchmark problems and a name-based registry.

A problem is a callable on normalized points with ``space``, ``name``,
``optimum`` and ``to_dict``.
"""

from sparsebo.bench.sourcing import (
    SourcingModel,
    SourcingProblem,
    sourcing_evaluate,
    sourcing_generate,
)
from sparsebo.bench.synthetic import (
    EmbeddedSynthetic,
    Quadratic1D,
    branin,
    eval_synthetic,
    hartmann6,
    log_branin,
)
from sparsebo.bench.tradeoff import penalized_maximizers, tradeoff_oracle


def _embedded(base, default_dim=50):
    def build(ambient_dim=default_dim, active_dims=None, negate=True):
        return EmbeddedSynthetic(base, ambient_dim, active_dims, negate)
    return build


PROBLEMS = {
    "branin": _embedded("Branin"),
    "hartmann6": _embedded("Hartmann6"),
    "log_branin": _embedded("LogBranin", 2),
    "quadratic1d": Quadratic1D,
    "sourcing": SourcingProblem,
}


def make_problem(name: str, **params):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**params)


__all__ = [
    "EmbeddedSynthetic", "PROBLEMS", "Quadratic1D", "SourcingModel", "SourcingProblem",
    "branin", "eval_synthetic", "hartmann6", "log_branin", "make_problem",
    "penalized_maximizers", "sourcing_evaluate", "sourcing_generate", "tradeoff_oracle",
]
