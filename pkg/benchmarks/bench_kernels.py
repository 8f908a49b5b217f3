"""Compare the compiled and numpy kernel backends on workloads sized like a real run.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from sparsebo import _pykernels, kernels
from sparsebo.acquisition import build_frontier
from sparsebo.bench import sourcing_generate

try:
    from sparsebo import _ckernels
except ImportError:
    _ckernels = None


def workloads():
    rng = np.random.default_rng(0)
    pts = rng.uniform(size=(200, 2))
    fr = build_frontier(rng.uniform(size=(40, 2)), (-0.1, -0.1), warn=False)
    # one SEBO evaluation chunk: 64 candidates x 16 posterior samples x 128 base samples
    a = rng.uniform(-0.2, 1.2, size=64 * 16 * 128)
    b = np.repeat(rng.uniform(-0.2, 1.2, size=64), 16 * 128)
    model = sourcing_generate(0)
    policy = np.full(25, 20)
    total = int(policy.sum())
    ut, ui = rng.random((1000, total)), rng.random((1000, total))
    return {
        "hypervolume_2d (200 pts)": lambda impl: kernels.hypervolume_2d(pts, (0.0, 0.0), impl=impl),
        "hvi_batch (131k pts, 40-pt front)":
            lambda impl: kernels.hvi_batch(fr.f, fr.neg_xi, fr.ref, a, b, impl=impl),
        "sourcing_relevance (1000 reps x 500 draws)":
            lambda impl: kernels.sourcing_relevance(model.theta_cum, model.phi_cum, model.m, policy,
                                                    ut, ui, impl=impl),
    }


def _close(u, v):
    if isinstance(u, tuple):
        return all(np.allclose(x, y, rtol=1e-12, atol=1e-14) for x, y in zip(u, v))
    return np.allclose(u, v, rtol=1e-12, atol=1e-14)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    print(f"active backend: {kernels.BACKEND}")
    if _ckernels is None:
        print("compiled core not available; timing the numpy fallback only")
    print(f"{'kernel':44s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}  agree")
    for name, fn in workloads().items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:44s} {t_py:10.2f}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        agree = _close(fn(_pykernels), fn(_ckernels))
        print(f"{name:44s} {t_py:10.2f} {t_c:10.2f} {t_py / t_c:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
