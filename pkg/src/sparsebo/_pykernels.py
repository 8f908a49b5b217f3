"""Pure numpy implementations of the compiled kernels in ``_ckernels.pyx``.

Same signatures and semantics; used when the extension is unavailable or
``SPARSEBO_BACKEND=python`` is set.
"""

import numpy as np


def hypervolume_2d(points, ref0, ref1):
    points = np.asarray(points, dtype=np.float64)
    if points.shape[0] == 0:
        return 0.0
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    area = 0.0
    best1 = ref1
    for p0, p1 in points[order]:
        if p0 <= ref0:
            break
        if p1 > best1:
            area += (p0 - ref0) * (p1 - best1)
            best1 = p1
    return float(area)


def hvi_batch(front0, front1, ref0, ref1, a, b):
    front0 = np.asarray(front0, dtype=np.float64)
    front1 = np.asarray(front1, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    # segment k covers (lo_k, hi_k] at covered level level_k
    hi = np.concatenate(([np.inf], front0))
    lo = np.concatenate((front0, [ref0]))
    level = np.concatenate(([ref1], front1))
    top = np.minimum(a[:, None], hi[None, :])
    width = np.clip(top - lo[None, :], 0.0, None)
    gap = b[:, None] - level[None, :]
    pos = gap > 0
    valid = (a > ref0) & (b > ref1)
    val = np.where(valid, np.sum(width * np.where(pos, gap, 0.0), axis=1), 0.0)
    db = np.where(valid, np.sum(np.where(pos, width, 0.0), axis=1), 0.0)
    # segment containing a: first k with width > 0
    nonempty = width > 0
    first = np.argmax(nonempty, axis=1)
    has = nonempty[np.arange(a.shape[0]), first]
    gap_first = gap[np.arange(a.shape[0]), first]
    da = np.where(valid & has & (gap_first > 0), gap_first, 0.0)
    return val, da, db


def sourcing_relevance(theta_cum, phi_cum, m, policy, u_topic, u_item):
    S, T = theta_cum.shape
    K = phi_cum.shape[1]
    R = u_topic.shape[0]
    seen = np.zeros((R, K), dtype=bool)
    rows = np.arange(R)[:, None]
    col = 0
    for s in range(S):
        n = int(policy[s])
        if n == 0:
            continue
        ut = u_topic[:, col:col + n]
        topics = np.searchsorted(theta_cum[s], ut, side="right")
        np.minimum(topics, T - 1, out=topics)
        ui = u_item[:, col:col + n]
        items = np.empty_like(topics)
        for t in range(T):
            mask = topics == t
            if mask.any():
                items[mask] = np.searchsorted(phi_cum[t], ui[mask], side="right")
        np.minimum(items, K - 1, out=items)
        seen[rows, items] = True
        col += n
    return seen.astype(np.float64) @ np.asarray(m, dtype=np.float64)
