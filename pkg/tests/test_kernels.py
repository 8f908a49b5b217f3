import os
import subprocess
import sys

import numpy as np
import pytest

from sparsebo import _pykernels, kernels
from sparsebo.acquisition import build_frontier
from sparsebo.bench import sourcing_generate

ck = pytest.importorskip("sparsebo._ckernels")


def _front(rng, n):
    pts = rng.uniform(0, 1, size=(n, 2))
    return build_frontier(pts, (-0.1, -0.1))


def test_hypervolume_backends_agree():
    rng = np.random.default_rng(0)
    for n in (0, 1, 5, 40):
        pts = rng.uniform(-0.2, 1, size=(n, 2))
        a = kernels.hypervolume_2d(pts, (0.0, 0.0), impl=ck)
        b = kernels.hypervolume_2d(pts, (0.0, 0.0), impl=_pykernels)
        assert a == pytest.approx(b, rel=1e-13, abs=1e-15)


def test_hvi_backends_agree():
    rng = np.random.default_rng(1)
    for n in (0, 1, 7):
        fr = _front(rng, n)
        a, b = rng.uniform(-0.3, 1.2, size=500), rng.uniform(-0.3, 1.2, size=500)
        out_c = kernels.hvi_batch(fr.f, fr.neg_xi, fr.ref, a, b, impl=ck)
        out_p = kernels.hvi_batch(fr.f, fr.neg_xi, fr.ref, a, b, impl=_pykernels)
        for u, v in zip(out_c, out_p):
            assert np.allclose(u, v, rtol=1e-12, atol=1e-14)


def test_sourcing_backends_agree():
    model = sourcing_generate(0)
    rng = np.random.default_rng(2)
    policy = rng.integers(0, 10, size=25)
    total = int(policy.sum())
    ut, ui = rng.random((20, total)), rng.random((20, total))
    args = (model.theta_cum, model.phi_cum, model.m, policy, ut, ui)
    assert np.allclose(kernels.sourcing_relevance(*args, impl=ck),
                       kernels.sourcing_relevance(*args, impl=_pykernels), rtol=1e-12)


def test_backend_override():
    env = dict(os.environ, SPARSEBO_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import sparsebo.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    if os.environ.get("SPARSEBO_BACKEND", "").lower() != "python":
        assert kernels.BACKEND == "cython"
