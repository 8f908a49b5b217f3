import dataclasses
import math

import numpy as np
import pytest

from sparsebo.bench import (
    EmbeddedSynthetic,
    Quadratic1D,
    SourcingModel,
    SourcingProblem,
    eval_synthetic,
    log_branin,
    make_problem,
    penalized_maximizers,
    sourcing_evaluate,
    sourcing_generate,
    tradeoff_oracle,
)
from sparsebo.bench.synthetic import BRANIN_BOUNDS, HARTMANN6_ARGMIN
from sparsebo.penalty import PenaltySpec


def test_branin_embedded_minimizer():
    prob = EmbeddedSynthetic("Branin")
    x = np.random.default_rng(0).uniform(size=50)
    x[0], x[1] = (math.pi + 5) / 15, 2.275 / 15
    assert eval_synthetic(prob, x) == pytest.approx(-0.397887357729738339, abs=1e-9)


def test_hartmann6_embedded_minimizer():
    x = np.zeros(50)
    x[:6] = HARTMANN6_ARGMIN
    assert eval_synthetic(EmbeddedSynthetic("Hartmann6"), x) == pytest.approx(3.32237, abs=1e-5)


def test_embedding_invariance():
    rng = np.random.default_rng(1)
    for base in ("Branin", "Hartmann6", "LogBranin"):
        prob = EmbeddedSynthetic(base, active_dims=None)
        a = rng.uniform(size=50)
        b = rng.uniform(size=50)
        b[list(prob.active_dims)] = a[list(prob.active_dims)]
        assert prob(a) == prob(b)


def test_batched_and_custom_active_dims():
    prob = EmbeddedSynthetic("Branin", ambient_dim=10, active_dims=(7, 3))
    X = np.random.default_rng(2).uniform(size=(4, 10))
    assert np.array_equal(prob(X), [prob(x) for x in X])
    swapped = X.copy()
    swapped[:, [0, 1]] = X[:, [7, 3]]
    assert np.allclose(EmbeddedSynthetic("Branin", 10)(swapped), prob(X))
    with pytest.raises(ValueError):
        EmbeddedSynthetic("Branin", active_dims=(0,))
    with pytest.raises(ValueError):
        EmbeddedSynthetic("Rosenbrock")


def test_registry():
    assert make_problem("branin").space.dims == 50
    assert make_problem("log_branin").space.dims == 2
    assert isinstance(make_problem("quadratic1d"), Quadratic1D)
    with pytest.raises(ValueError):
        make_problem("ackley")


def test_sourcing_model_shape_and_simplex():
    model = sourcing_generate(0)
    assert model.theta.shape == (25, 8) and model.phi.shape == (8, 1000)
    for P in (model.theta, model.phi):
        assert np.all(P >= 0) and np.max(np.abs(P.sum(axis=1) - 1)) <= 1e-12
    assert np.all(model.m > 0) and np.all(model.c >= 0)
    assert np.allclose(model.m, model.phi.T @ model.Q, rtol=1e-14)


def test_sourcing_determinism_and_round_trip():
    a, b = sourcing_generate(3), sourcing_generate(3)
    assert a.to_json() == b.to_json()
    c = SourcingModel.from_json(a.to_json())
    policy = np.full(25, 4)
    assert sourcing_evaluate(a, policy, 50, 1) == sourcing_evaluate(c, policy, 50, 1)


def test_sourcing_zero_policy():
    out = sourcing_evaluate(sourcing_generate(0), np.zeros(25, dtype=int), 20)
    assert out["mean_quality"] == 0.0 and out["std_err"] == 0.0


def test_sourcing_cost_deterministic_and_bounded():
    model = sourcing_generate(1)
    rng = np.random.default_rng(0)
    policy = rng.integers(0, 51, size=25)
    a = sourcing_evaluate(model, policy, 30, seed=0)
    b = sourcing_evaluate(model, policy, 30, seed=9)
    assert a["cost"] == b["cost"] == pytest.approx(float(model.c @ policy))
    assert a["mean_quality"] + 0.6 * a["cost"] <= model.m.sum() + 1e-9


def _simulate(model, policy, u_topic, u_item):
    """Plain loop transcription of the retrieval simulation."""
    out = []
    for r in range(u_topic.shape[0]):
        seen = set()
        j = 0
        for s, count in enumerate(policy):
            for _ in range(count):
                z = int(np.searchsorted(np.cumsum(model.theta[s]), u_topic[r, j], side="right"))
                z = min(z, model.theta.shape[1] - 1)
                w = int(np.searchsorted(np.cumsum(model.phi[z]), u_item[r, j], side="right"))
                seen.add(min(w, model.phi.shape[1] - 1))
                j += 1
        out.append(sum(model.m[k] for k in seen))
    return np.array(out)


def test_sourcing_matches_loop_oracle():
    model = sourcing_generate(2)
    policy = np.zeros(25, dtype=int)
    policy[[0, 4, 11, 24]] = [3, 7, 1, 5]
    reps = 6
    rng = np.random.default_rng(5)
    u_topic, u_item = rng.random((reps, 16)), rng.random((reps, 16))
    rs = _simulate(model, policy, u_topic, u_item)
    expect = rs - 0.6 * float(model.c @ policy)
    out = sourcing_evaluate(model, policy, reps, seed=5)
    assert out["mean_quality"] == pytest.approx(expect.mean(), rel=1e-10)
    assert out["std_err"] == pytest.approx(expect.std(ddof=1) / math.sqrt(reps), rel=1e-8)


def test_sourcing_monotone_in_cost():
    model = sourcing_generate(4)
    policy = np.full(25, 2)
    base = sourcing_evaluate(model, policy, 40, seed=3)["mean_quality"]
    pricier = dataclasses.replace(model, c=model.c + 0.05)
    assert sourcing_evaluate(pricier, policy, 40, seed=3)["mean_quality"] <= base


def test_sourcing_policy_validation():
    model = sourcing_generate(0)
    for bad in (np.full(25, 51), np.full(25, -1), np.full(24, 1), np.full(25, 1.5)):
        with pytest.raises(ValueError):
            sourcing_evaluate(model, bad, 5)


def test_sourcing_problem_snaps_integer_policy():
    prob = SourcingProblem(reps=20)
    assert prob.space.dims == 25 and prob(np.zeros(25)) == 0.0
    assert prob(np.full(25, 0.1)) == prob(np.full(25, 0.1))


def test_tradeoff_constant_and_extreme():
    pen = PenaltySpec("L1", (0.0, 0.0))
    res = tradeoff_oracle(lambda X: np.full(len(X), 2.0), pen, [0.0, 0.5, 1.0, 1.7], 41)
    assert all(h == 2.0 for _, h in res)
    f = lambda X: X[:, 0] + X[:, 1]
    (_, h), = tradeoff_oracle(f, pen, [2.0], 41)
    assert h == 2.0
    (_, h), = tradeoff_oracle(f, pen, [5.0], 41)
    assert h is None


def _log_branin_h(thetas, res=1000):
    f = lambda X: -log_branin(X)
    out = tradeoff_oracle(f, PenaltySpec("L1", (0.0, 0.0)), thetas, res, bounds=BRANIN_BOUNDS)
    return np.array([h for _, h in out])


def test_log_branin_convex_stretch():
    th = np.linspace(0.5, 2.1, 5)
    assert np.all(np.diff(_log_branin_h(th), 2) > 0)
    lo, hi = 0.05, 2.76
    h_lo, h_hi = _log_branin_h([lo, hi])
    inner = np.linspace(0.5, 2.6, 8)
    chord = h_lo + (inner - lo) / (hi - lo) * (h_hi - h_lo)
    assert np.all(_log_branin_h(inner) < chord)


def test_penalized_maximizers_l1_grid():
    f = lambda X: -np.sum((X - 0.6) ** 2, axis=1)
    out = penalized_maximizers(f, PenaltySpec("L1", (0.0, 0.0)), [0.0, 0.4, 10.0], 61)
    assert np.allclose(out[0][1], [0.6, 0.6])
    assert np.allclose(out[1][1], [0.4, 0.4])
    assert out[2][2] == 0.0
    with pytest.raises(ValueError):
        penalized_maximizers(f, PenaltySpec("L1", (0.0,) * 4), [1.0], 5)
