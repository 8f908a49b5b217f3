"""Backend selection for the hot loops.

The compiled extension ``sparsebo._ckernels`` is used when it imports; the
numpy fallback in ``sparsebo._pykernels`` otherwise. Set
``SPARSEBO_BACKEND=python`` to force the fallback.
"""

import os

import numpy as np

from sparsebo import _pykernels

_FORCE_PYTHON = os.environ.get("SPARSEBO_BACKEND", "").lower() == "python"

if _FORCE_PYTHON:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from sparsebo import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def hypervolume_2d(points, ref, impl=None):
    """Area dominated by ``points`` (both coordinates maximized) above ``ref``."""
    impl = impl or _impl
    pts = _f64(points).reshape(-1, 2)
    return float(impl.hypervolume_2d(pts, float(ref[0]), float(ref[1])))


def hvi_batch(front0, front1, ref, a, b, impl=None):
    """Hypervolume improvement of each point ``(a[i], b[i])`` over a pruned front.

    ``front0`` must be strictly decreasing and ``front1`` strictly increasing,
    all entries strictly above ``ref``. Returns ``(value, d/da, d/db)``.
    """
    impl = impl or _impl
    return impl.hvi_batch(_f64(front0), _f64(front1), float(ref[0]), float(ref[1]),
                          _f64(a), _f64(b))


def sourcing_relevance(theta_cum, phi_cum, m, policy, u_topic, u_item, impl=None):
    """Per-repetition de-duplicated relevance score of a retrieval policy."""
    impl = impl or _impl
    return impl.sourcing_relevance(_f64(theta_cum), _f64(phi_cum), _f64(m),
                                   np.ascontiguousarray(policy, dtype=np.int64),
                                   _f64(u_topic), _f64(u_item))
