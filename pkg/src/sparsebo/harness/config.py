"""Experiment configuration: one JSON document per method x problem study."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from sparsebo.acqopt import OptimizerConfig
from sparsebo.penalty import DEFAULT_A_END, DEFAULT_A_START, DEFAULT_NUM_A, PenaltySpec, a_schedule
from sparsebo.surrogate import MapConfig, McmcConfig

METHODS = ("Sobol", "GPEI", "SAASBO", "EI_ER", "EI_IR", "SEBO", "EI_Chebyshev")
PENALIZED = ("EI_ER", "EI_IR", "SEBO", "EI_Chebyshev")
DEFAULT_LAMBDA_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0)


@dataclass
class ExperimentConfig:
    problem: str
    method: str
    num_init: int
    num_trials: int
    problem_params: dict = field(default_factory=dict)
    penalty: dict | None = None
    lam: float = 0.0
    replications: int = 1
    seeds: list | None = None
    mcmc: dict = field(default_factory=dict)
    map: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)
    acquisition: dict = field(default_factory=dict)
    impute_value: float | None = None
    k_values: list = field(default_factory=list)
    initial_points: list = field(default_factory=list)
    trial_timeout: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.num_init < 0 or self.num_trials < 1:
            raise ValueError("num_init must be >= 0 and num_trials >= 1")
        if self.num_init > self.num_trials:
            raise ValueError("num_init must not exceed num_trials")
        if self.replications < 0:
            raise ValueError("replications must be non-negative")
        if self.seeds is None:
            self.seeds = list(range(self.replications))
        self.seeds = [int(s) for s in self.seeds]
        if len(self.seeds) != self.replications:
            raise ValueError("len(seeds) must equal replications")
        if self.method in PENALIZED and not self.penalty:
            raise ValueError(f"method {self.method} needs a penalty")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if len(self.initial_points) > self.num_trials:
            raise ValueError("more initial points than trials")
        self.k_values = [int(k) for k in self.k_values]
        if not self.name:
            self.name = f"{self.method}_{self.problem}"

    # -- derived objects ----------------------------------------------------

    def penalty_spec(self, space) -> PenaltySpec:
        """Penalty anchored at the problem's baseline; exact L0 when none is configured."""
        d = dict(self.penalty or {"kind": "L0_exact"})
        d.setdefault("baseline", list(space.baseline))
        return PenaltySpec.from_dict(d)

    def mcmc_config(self, seed: int) -> McmcConfig:
        return McmcConfig(**{**self.mcmc, "seed": seed})

    def map_config(self, seed: int) -> MapConfig:
        return MapConfig(**{**self.map, "seed": seed})

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        opts = dict(self.optimizer)
        schedule = a_schedule(int(opts.pop("num_a", DEFAULT_NUM_A)),
                              float(opts.pop("a_start", DEFAULT_A_START)),
                              float(opts.pop("a_end", DEFAULT_A_END)))
        return OptimizerConfig(**opts, schedule=schedule, seed=seed)

    def with_overrides(self, replications=None, seed_base=None) -> "ExperimentConfig":
        reps = self.replications if replications is None else int(replications)
        if seed_base is None and reps == self.replications:
            return self
        base = 0 if seed_base is None else int(seed_base)
        return replace(self, replications=reps, seeds=[base + i for i in range(reps)])

    def expand_lambdas(self, lambdas=DEFAULT_LAMBDA_GRID) -> list:
        """One config per lambda, named after it."""
        return [replace(self, lam=float(l), name=f"{self.name}_lam{l:g}") for l in lambdas]

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig | list":
        """Read a config file; a ``lambdas`` list expands into a sweep."""
        with open(path) as fh:
            d = json.load(fh)
        lambdas = d.pop("lambdas", None)
        cfg = cls.from_dict(d)
        return cfg.expand_lambdas(lambdas) if lambdas else cfg
