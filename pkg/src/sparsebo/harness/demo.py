"""One-dimensional homotopy illustration.

Four observations of ``f(x) = -x^2`` at 0, 0.25, 0.75 and 1 with the sparse
point at 0.5. Under an exact L0 penalty the only way to improve the
(objective, sparsity) frontier is to land exactly on 0.5, which a narrow
smoothed penalty hides behind a vanishing gradient.
"""

from __future__ import annotations

from sparsebo.acqopt import OptimizerConfig, optimize_fixed, optimize_homotopy
from sparsebo.acquisition import AcquisitionSpec, make_acquisition
from sparsebo.bench import Quadratic1D
from sparsebo.penalty import PenaltySpec, eval_exact
from sparsebo.space import ObservationLog
from sparsebo.surrogate import McmcConfig, fit_saas

DEMO_POINTS = (0.0, 0.25, 0.75, 1.0)


def demo_setup(mcmc_seed: int = 0):
    """Observation log, fitted SAAS ensemble and an acquisition family ``a -> acq``."""
    problem = Quadratic1D()
    space = problem.space
    pen = PenaltySpec("L0_exact", tuple(space.baseline))
    log = ObservationLog(space)
    for x in DEMO_POINTS:
        log.add([x], problem([x]), eval_exact(pen, [x]))
    model = fit_saas(log, McmcConfig(seed=mcmc_seed))
    acq = make_acquisition(AcquisitionSpec("SEBO_EHVI", penalty=pen.smoothed(10 ** -0.5)), model, log)
    return log, model, lambda a: acq.with_penalty(pen.smoothed(a))


def homotopy_demo(mcmc_seed: int = 0, optimizer_seed: int = 0) -> dict:
    log, _, family = demo_setup(mcmc_seed)
    cfg = OptimizerConfig(seed=optimizer_seed)
    baseline = log.space.baseline
    res = optimize_homotopy(family, cfg, baseline, extra_seeds=[baseline, log.X[0]], dims=1)
    return {"observations": [{"x": float(o.x[0]), "y": o.y, "xi": o.xi} for o in log],
            "baseline": float(baseline[0]), **res.to_dict()}


def fixed_width_demo(a: float = 1e-3, seed: int = 0, starts: int = 10, mcmc_seed: int = 0,
                     family=None) -> dict:
    """Plain multi-start ascent at a single narrow width, from random starts only."""
    if family is None:
        _, _, family = demo_setup(mcmc_seed)
    cfg = OptimizerConfig(seed=seed, raw_candidates=starts, num_restarts=starts)
    return optimize_fixed(family(a), cfg, dims=1).to_dict()
