"""Randomized invariants across modules."""

import dataclasses
import json

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsebo.acqopt import OptimizerConfig, clamp_to_baseline, optimize_fixed
from sparsebo.acquisition import build_frontier, ei_analytic, hypervolume_2d, ucb_external, ucb_internal
from sparsebo.bench import EmbeddedSynthetic, sourcing_evaluate, sourcing_generate
from sparsebo.harness.config import ExperimentConfig
from sparsebo.harness.metrics import best_at_sparsity
from sparsebo.harness.runner import run_replication
from sparsebo.kernels import hvi_batch
from sparsebo.penalty import PenaltySpec, eval_exact
from sparsebo.space import ObservationLog, SearchSpace, denormalize, normalize, sobol_init

unit = st.floats(0.0, 1.0, allow_nan=False)
reals = st.floats(-1e3, 1e3, allow_nan=False)
FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def spaces(draw, max_dims=5):
    d = draw(st.integers(1, max_dims))
    lo = draw(arrays(np.float64, d, elements=st.floats(-1e3, 1e3)))
    # widths not tiny relative to |lower|, otherwise cancellation dominates
    width = draw(arrays(np.float64, d, elements=st.floats(1e-3, 1e3)))
    width = np.maximum(width, 1e-2 * np.abs(lo))
    frac = draw(arrays(np.float64, d, elements=unit))
    hi = lo + width
    base = np.clip(lo + frac * width, lo, hi)
    return SearchSpace(tuple(lo), tuple(hi), tuple(base))


@FAST
@given(spaces(), st.data())
def test_normalize_roundtrip(space, data):
    u = data.draw(arrays(np.float64, space.dims, elements=unit))
    raw = denormalize(u, space)
    back = normalize(np.clip(raw, space.lower, space.upper), space)
    assert np.allclose(back, u, rtol=1e-12, atol=1e-12)


@FAST
@given(st.integers(1, 6), st.integers(0, 300), st.integers(0, 2 ** 31))
def test_sobol_bounds_and_determinism(d, n, seed):
    space = SearchSpace.unit(d)
    a = sobol_init(space, n, seed)
    assert len(a) == n and all(np.all((p >= 0) & (p <= 1)) for p in a)
    assert all(np.array_equal(p, q) for p, q in zip(a, sobol_init(space, n, seed)))


@FAST
@given(st.lists(st.tuples(arrays(np.float64, 3, elements=unit), reals), max_size=8))
def test_log_roundtrip(rows):
    log = ObservationLog(SearchSpace.unit(3), seed=4)
    for x, y in rows:
        log.add(x, y, float(np.count_nonzero(x)), source="t")
    back = ObservationLog.from_json(json.dumps(json.loads(log.to_json())))
    assert back.to_dict() == log.to_dict()


@FAST
@given(arrays(np.float64, 4, elements=unit), arrays(np.float64, 4, elements=unit),
       st.floats(1e-3, 1.0))
def test_smoothed_l0_range(x, base, a):
    val = eval_exact(PenaltySpec("L0_smoothed", tuple(base), a=a), x)
    assert 0.0 <= val <= 4.0
    assert eval_exact(PenaltySpec("L0_smoothed", tuple(base), a=a), base) == 0.0
    if np.any(np.abs(x - base) > 1e-6 * a):
        assert val > 0


@FAST
@given(arrays(np.float64, 3, elements=unit), arrays(np.float64, 3, elements=unit))
def test_group_lasso_singletons_are_l1(x, base):
    gl = PenaltySpec("GroupLasso", tuple(base), groups=((0,), (1,), (2,)))
    assert np.isclose(eval_exact(gl, x), eval_exact(PenaltySpec("L1", tuple(base)), x), rtol=1e-13)


point_sets = arrays(np.float64, st.tuples(st.integers(0, 12), st.just(2)), elements=st.floats(-1, 2))


@FAST
@given(point_sets, st.randoms(use_true_random=False))
def test_hypervolume_permutation_and_monotone(pts, rnd):
    ref = (0.0, 0.0)
    hv = hypervolume_2d((pts, ref))
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    assert hypervolume_2d((pts[perm], ref)) == hv
    extra = np.vstack([pts, [[rnd.uniform(-1, 2), rnd.uniform(-1, 2)]]])
    assert hypervolume_2d((extra, ref)) >= hv


@FAST
@given(point_sets, st.floats(-1, 2), st.floats(-1, 2))
def test_hvi_is_hypervolume_difference(pts, a, b):
    ref = (0.0, 0.0)
    fr = build_frontier(pts, ref, warn=False)
    val, _, _ = hvi_batch(fr.f, fr.neg_xi, ref, np.array([a]), np.array([b]))
    expect = hypervolume_2d((np.vstack([pts, [[a, b]]]), ref)) - hypervolume_2d((pts, ref))
    assert val[0] >= 0 and np.isclose(val[0], expect, rtol=1e-9, atol=1e-12)


@FAST
@given(reals, st.floats(0, 10), st.floats(0, 20), st.floats(0, 10), st.floats(0, 50))
def test_ucb_external_equals_internal(mu, sigma, beta, lam, xi):
    assert np.isclose(ucb_external(mu, sigma, beta, lam, xi), ucb_internal(mu, sigma, beta, lam, xi),
                      rtol=1e-12, atol=1e-9)


@FAST
@given(reals, st.floats(0, 100), reals)
def test_ei_non_negative(mu, sigma, inc):
    v = ei_analytic(mu, sigma, inc)
    assert np.isfinite(v) and v >= 0 and v >= mu - inc - 1e-9 * max(1.0, abs(mu), abs(inc))


class _Quad:
    def __init__(self, c):
        self.c, self.dims = c, c.size

    def __call__(self, X):
        return -np.sum((np.atleast_2d(X) - self.c) ** 2, axis=1)

    def value_and_grad(self, X):
        X = np.atleast_2d(X)
        return self(X), -2 * (X - self.c)


@FAST
@given(arrays(np.float64, 3, elements=st.floats(-2, 3)), st.integers(0, 100))
def test_optimizer_stays_in_box(c, seed):
    acq = _Quad(c)
    cfg = OptimizerConfig(seed=seed, raw_candidates=16, num_restarts=2)
    res = optimize_fixed(acq, cfg)
    assert np.all((res.x >= 0) & (res.x <= 1))
    assert np.allclose(res.x, np.clip(c, 0, 1), atol=1e-6)
    x, _ = clamp_to_baseline(res.x, acq, np.full(3, 0.5), cfg)
    assert np.all((x >= 0) & (x <= 1)) and acq(x)[0] >= acq(res.x)[0] - 1e-6 * abs(acq(res.x)[0]) - 1e-12


@FAST
@given(st.lists(st.tuples(arrays(np.float64, 4, elements=st.sampled_from([0.0, 0.3, 1.0])), reals),
                min_size=1, max_size=10))
def test_best_at_sparsity_monotone(rows):
    log = ObservationLog(SearchSpace.unit(4))
    for x, y in rows:
        log.add(x, y, float(np.count_nonzero(x)))
    vals = [best_at_sparsity(log, k, -1e9) for k in range(5)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    prefix = ObservationLog(SearchSpace.unit(4), observations=log.observations[:-1])
    assert all(best_at_sparsity(prefix, k, -1e9) <= vals[k] for k in range(5))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.sampled_from(["L0_exact", "L1"]))
def test_stored_penalty_matches_recomputation(seed, kind):
    cfg = ExperimentConfig.from_dict({"problem": "branin", "problem_params": {"ambient_dim": 5},
                                      "method": "Sobol", "num_init": 0, "num_trials": 6,
                                      "penalty": {"kind": kind}, "seeds": [seed]})
    rep = run_replication(cfg, 0)
    pen = cfg.penalty_spec(rep.log.space).exact()
    assert np.allclose(rep.log.XI, eval_exact(pen, rep.log.X), rtol=0, atol=1e-12)


@FAST
@given(arrays(np.float64, 50, elements=unit), arrays(np.float64, 48, elements=unit))
def test_embedding_invariance(x, other):
    prob = EmbeddedSynthetic("Branin")
    y = x.copy()
    y[2:] = other
    assert prob(x) == prob(y)


_MODEL = sourcing_generate(7)


@settings(max_examples=15, deadline=None)
@given(arrays(np.int64, 25, elements=st.integers(0, 6)), st.floats(0.0, 0.5), st.integers(0, 99))
def test_sourcing_monotone_in_cost(policy, bump, seed):
    base = sourcing_evaluate(_MODEL, policy, 10, seed)["mean_quality"]
    pricier = dataclasses.replace(_MODEL, c=_MODEL.c + bump)
    assert sourcing_evaluate(pricier, policy, 10, seed)["mean_quality"] <= base + 1e-12
