"""The BO loop: Sobol initialization, then fit, propose, evaluate, log."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from sparsebo.acqopt import OptimizationError, optimize_fixed, optimize_homotopy
from sparsebo.acquisition import AcquisitionSpec, MCConfig, make_acquisition
from sparsebo.bench import make_problem
from sparsebo.harness.config import PENALIZED, ExperimentConfig
from sparsebo.penalty import eval_exact
from sparsebo.space import ObservationLog, snap, sobol_init
from sparsebo.surrogate import FitError, fit_map, fit_saas

logger = logging.getLogger(__name__)

THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
_ACQ_KIND = {"GPEI": "EI", "SAASBO": "EI", "EI_ER": "EI_ER", "EI_IR": "EI_IR",
             "SEBO": "SEBO_EHVI", "EI_Chebyshev": "EI_Chebyshev"}


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1)[0])


@dataclass
class ReplicationResult:
    seed: int
    log: ObservationLog
    trial_times: list = field(default_factory=list)
    fallbacks: list = field(default_factory=list)
    complete: bool = True

    def to_dict(self) -> dict:
        """Deterministic content only; wall times are kept separately."""
        return {"seed": self.seed, "complete": self.complete,
                "fallbacks": [{"trial": t, "reason": r} for t, r in self.fallbacks],
                "log": self.log.to_dict()}

    @classmethod
    def from_dict(cls, d, trial_times=()) -> "ReplicationResult":
        return cls(seed=int(d["seed"]), log=ObservationLog.from_dict(d["log"]),
                   trial_times=list(trial_times),
                   fallbacks=[(int(f["trial"]), f["reason"]) for f in d.get("fallbacks", [])],
                   complete=bool(d.get("complete", True)))


@dataclass
class RunReport:
    config: ExperimentConfig
    problem: dict
    replications: list

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "problem": self.problem,
                "replications": [r.to_dict() for r in self.replications]}

    @classmethod
    def from_dict(cls, d, timings=None) -> "RunReport":
        timings = timings or {}
        reps = [ReplicationResult.from_dict(r, timings.get(str(i), ()))
                for i, r in enumerate(d["replications"])]
        return cls(ExperimentConfig.from_dict(d["config"]), d["problem"], reps)

    def timings(self) -> dict:
        return {str(i): list(r.trial_times) for i, r in enumerate(self.replications)}


def _acquisition_spec(config: ExperimentConfig, penalty, trial_rng, seed):
    opts = dict(config.acquisition)
    mc = MCConfig(num_base_samples=int(opts.pop("num_base_samples", 128)), seed=seed)
    kind = _ACQ_KIND[config.method]
    lam = config.lam
    if kind == "EI_Chebyshev":
        w = trial_rng.uniform(0.05, 0.95)
        lam = w / (1.0 - w)
    ref = opts.pop("ref_point", None)
    return AcquisitionSpec(kind=kind, penalty=penalty if config.method in PENALIZED else None,
                           lam=lam, ref_point=tuple(ref) if ref is not None else None, mc=mc, **opts)


def propose(config: ExperimentConfig, log: ObservationLog, penalty, seed: int):
    """Fit the method's surrogate and maximize its acquisition; returns a ``CandidateResult``."""
    rng = np.random.default_rng(seed)
    if config.method == "GPEI":
        model = fit_map(log, config.map_config(seed))
    else:
        model = fit_saas(log, config.mcmc_config(seed))
    opt = config.optimizer_config(seed)
    use_homotopy = config.method in PENALIZED and penalty.kind in ("L0_exact", "L0_smoothed")
    pen = penalty.smoothed(opt.schedule[0]) if use_homotopy else penalty
    spec = _acquisition_spec(config, pen, rng, seed)
    acq = make_acquisition(spec, model, log)
    baseline = log.space.baseline
    extra = [baseline, log.X[int(np.argmax(log.Y))]]
    if use_homotopy:
        return optimize_homotopy(lambda a: acq.with_penalty(penalty.smoothed(a)), opt, baseline,
                                 extra_seeds=extra, dims=log.space.dims)
    return optimize_fixed(acq, opt, extra_seeds=extra, dims=log.space.dims)


def run_replication(config: ExperimentConfig, rep: int, problem=None) -> ReplicationResult:
    problem = problem or make_problem(config.problem, **config.problem_params)
    seed = config.seeds[rep]
    space = problem.space
    penalty = config.penalty_spec(space)
    exact = penalty.exact()
    log = ObservationLog(space, seed)
    result = ReplicationResult(seed, log)
    preset = [np.asarray(p, dtype=np.float64) for p in config.initial_points]
    sobol = sobol_init(space, config.num_trials - len(preset), seed)
    for t in range(config.num_trials):
        start = time.perf_counter()
        meta = {}
        if t < len(preset):
            x, meta["source"] = preset[t], "preset"
        elif t < config.num_init or config.method == "Sobol":
            x, meta["source"] = sobol[t - len(preset)], "sobol"
        else:
            try:
                cand = propose(config, log, penalty, trial_seed(seed, t))
                x, meta["source"] = cand.x, "model"
                meta["acq_value"] = float(cand.acq_value)
            except (FitError, OptimizationError, np.linalg.LinAlgError, RuntimeError) as exc:
                logger.warning("replication %d trial %d: %s; using a Sobol point", rep, t, exc)
                result.fallbacks.append((t, f"{type(exc).__name__}: {exc}"))
                x, meta["source"] = sobol[t - len(preset)], "fallback"
        x = snap(np.clip(x, 0.0, 1.0), space)
        log.add(x, float(problem(x)), float(eval_exact(exact, x)), **meta)
        elapsed = time.perf_counter() - start
        result.trial_times.append(elapsed)
        if config.trial_timeout is not None and elapsed > config.trial_timeout and t + 1 < config.num_trials:
            logger.warning("replication %d: trial %d took %.1fs (> %.1fs); stopping early",
                           rep, t, elapsed, config.trial_timeout)
            result.complete = False
            break
    return result


def _worker(args):
    config_dict, rep = args
    return run_replication(ExperimentConfig.from_dict(config_dict), rep)


def _threads_env(threads_per_worker: int):
    for var in THREAD_ENV_VARS:
        os.environ.setdefault(var, str(threads_per_worker))


def run_experiment(config: ExperimentConfig, workers: int = 1) -> RunReport:
    """Run every replication; with ``workers > 1`` replications run in subprocesses.

    Results are assembled in replication order regardless of completion order.
    """
    problem = make_problem(config.problem, **config.problem_params)
    if workers <= 1 or config.replications <= 1:
        reps = [run_replication(config, i, problem) for i in range(config.replications)]
    else:
        _threads_env(1)
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
            reps = list(pool.map(_worker, [(config.to_dict(), i) for i in range(config.replications)]))
    return RunReport(config, problem.to_dict(), reps)
