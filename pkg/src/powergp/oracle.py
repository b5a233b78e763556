"""Brute-force global references for small power-control instances.

Exhaustive grid search stands in for a true global optimizer at N <= 6, and
binary (min/max) vertex enumeration covers the folklore that near-optimal
allocations live at the power box corners.  Both evaluate the exact weighted
sum rate, so they are independent of the GP machinery they are used to check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .power import PowerControlProblem, weighted_sum_rate_batch

GRID_DIM_CAP = 6
VERTEX_DIM_CAP = 20
_CHUNK = 1 << 18


@dataclass(frozen=True)
class OracleResult:
    p_best: np.ndarray
    objective: float
    evaluations: int
    description: str


def grid_search(prob: PowerControlProblem, points_per_dim: int) -> OracleResult:
    """Best weighted sum rate over a full linear grid including both bounds."""
    n = prob.n_links
    if n > GRID_DIM_CAP:
        raise ValueError(f"grid search supports at most {GRID_DIM_CAP} links, got {n}")
    if points_per_dim < 2:
        raise ValueError("points_per_dim must be at least 2")
    axes = [np.linspace(prob.p_min_w[i], prob.p_max_w[i], points_per_dim)
            for i in range(n)]
    total = points_per_dim ** n
    best_obj = -np.inf
    best_idx = -1
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        coords = np.unravel_index(idx, (points_per_dim,) * n)
        p = np.stack([axes[i][coords[i]] for i in range(n)], axis=1)
        objs = weighted_sum_rate_batch(prob, p)
        k = int(np.argmax(objs))
        if objs[k] > best_obj:
            best_obj = float(objs[k])
            best_idx = int(idx[k])
    coords = np.unravel_index(best_idx, (points_per_dim,) * n)
    p_best = np.array([axes[i][coords[i]] for i in range(n)], dtype=float)
    return OracleResult(p_best=p_best, objective=best_obj, evaluations=total,
                        description=f"grid:{points_per_dim}^{n}")


def vertex_enumeration(prob: PowerControlProblem) -> OracleResult:
    """Best weighted sum rate over all {p_min, p_max} corner allocations."""
    n = prob.n_links
    if n > VERTEX_DIM_CAP:
        raise ValueError(
            f"vertex enumeration supports at most {VERTEX_DIM_CAP} links, got {n}")
    total = 1 << n
    best_obj = -np.inf
    best_idx = -1
    bits = np.arange(n)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        mask = (idx[:, None] >> bits) & 1
        p = np.where(mask == 1, prob.p_max_w, prob.p_min_w)
        objs = weighted_sum_rate_batch(prob, p)
        k = int(np.argmax(objs))
        if objs[k] > best_obj:
            best_obj = float(objs[k])
            best_idx = int(idx[k])
    mask = (best_idx >> bits) & 1
    p_best = np.where(mask == 1, prob.p_max_w, prob.p_min_w).astype(float)
    return OracleResult(p_best=p_best, objective=best_obj, evaluations=total,
                        description=f"vertices:2^{n}")
