"""Strategy evaluation, Pareto dominance and dominance-front peeling.

All four objectives are minimized: worst-case N-1 loading over the horizon,
maximum topological depth, number of topology switches, and number of time
steps spent outside the reference topology.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .dataset import Instance
from .errors import ValidationError


class ObjectiveVector(NamedTuple):
    lf1: float
    depth: int
    switches: int
    non_ref: int


Strategy = tuple  # length-t_max tuple of topology ids


def round_lf1(x: float) -> float:
    """Round a loading to one decimal place, ties away from zero."""
    if not np.isfinite(x):
        return float(x)
    return float(Decimal(repr(float(x))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def lf1_tenths(values) -> np.ndarray:
    """Vectorized :func:`round_lf1` returning integer tenths.

    ``+inf`` maps to the int64 maximum so it still compares above everything.
    """
    x = np.asarray(values, dtype=np.float64)
    out = np.full(x.shape, np.iinfo(np.int64).max, dtype=np.int64)
    finite = np.isfinite(x)
    scaled = np.abs(x[finite]) * 10.0
    approx = np.floor(scaled + 0.5)
    # x*10 is inexact for values like 80.05; decide near-ties in decimal
    near = np.abs(scaled - np.floor(scaled) - 0.5) < 1e-6
    if np.any(near):
        src = np.abs(x[finite][near])
        approx[near] = [int(Decimal(repr(float(v))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP) * 10) for v in src]
    out[finite] = (np.sign(x[finite]) * approx).astype(np.int64)
    return out


def evaluate_indices(instance: Instance, rows: np.ndarray) -> np.ndarray:
    """Objective matrix for strategies given as topology row indices.

    ``rows`` has shape ``(n, t_max)``; returns ``(n, 4)`` float columns in
    ObjectiveVector order.  No feasibility check.
    """
    rows = np.atleast_2d(rows)
    t = np.arange(instance.t_max)
    out = np.empty((rows.shape[0], 4))
    out[:, 0] = instance.lf1[rows, t].max(axis=1)
    out[:, 1] = instance.depths[rows].max(axis=1)
    out[:, 2] = (rows[:, 1:] != rows[:, :-1]).sum(axis=1)
    out[:, 3] = (rows != instance.ref_index).sum(axis=1)
    return out


def evaluate(instance: Instance, strategy: Sequence[int]) -> ObjectiveVector:
    if len(strategy) != instance.t_max:
        raise ValidationError(f"strategy has {len(strategy)} genes, expected {instance.t_max}")
    rows = instance.to_indices(strategy)
    unavailable = ~instance.available_mask[rows, np.arange(instance.t_max)]
    if unavailable.any():
        t = int(np.flatnonzero(unavailable)[0])
        raise ValidationError(f"topology {strategy[t]} is not available at t={t}")
    lf1, depth, switches, non_ref = evaluate_indices(instance, rows[None, :])[0]
    return ObjectiveVector(float(lf1), int(depth), int(switches), int(non_ref))


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and better somewhere."""
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def _nondominated_mask(pts: np.ndarray) -> np.ndarray:
    n = len(pts)
    keep = np.ones(n, dtype=bool)
    chunk = max(1, 4_000_000 // max(n, 1))
    for lo in range(0, n, chunk):
        p = pts[lo:lo + chunk]
        le = (pts[None, :, :] <= p[:, None, :]).all(axis=2)
        lt = (pts[None, :, :] < p[:, None, :]).any(axis=2)
        keep[lo:lo + chunk] = ~(le & lt).any(axis=1)
    return keep


def front_ranks(points, k_max=None) -> np.ndarray:
    """1-based nondominated-sorting rank of every row of ``points``.

    Duplicate rows share a rank.  With ``k_max`` peeling stops early and all
    rows beyond front ``k_max`` get rank ``k_max + 1``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        return np.zeros(len(pts), dtype=np.int64)
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    ranks = np.zeros(len(uniq), dtype=np.int64)
    remaining = np.arange(len(uniq))
    rank = 0
    while len(remaining) and (k_max is None or rank < k_max):
        rank += 1
        keep = _nondominated_mask(uniq[remaining])
        ranks[remaining[keep]] = rank
        remaining = remaining[~keep]
    ranks[remaining] = rank + 1
    return ranks[inverse]


def pareto_front(points: Iterable) -> set:
    """Unique points not dominated by any other input point."""
    uniq = list(dict.fromkeys(points))
    if not uniq:
        return set()
    mask = _nondominated_mask(np.array(uniq, dtype=np.float64))
    return {p for p, k in zip(uniq, mask) if k}


def rank_fronts(points: Iterable, k_max: int) -> list:
    """Peel successive Pareto fronts F_1..F_k (k <= k_max) from unique points."""
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    uniq = list(dict.fromkeys(points))
    if not uniq:
        return []
    ranks = front_ranks(np.array(uniq, dtype=np.float64), k_max)
    fronts = []
    for k in range(1, min(int(ranks.max()), k_max) + 1):
        fronts.append({p for p, r in zip(uniq, ranks) if r == k})
    return fronts


def rounded(v) -> ObjectiveVector:
    """Copy of an objective vector with lf1 rounded to one decimal."""
    return ObjectiveVector(round_lf1(v[0]), int(v[1]), int(v[2]), int(v[3]))
