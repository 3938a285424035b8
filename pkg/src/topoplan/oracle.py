"""Brute-force ground truth for small instances.

Enumerates every strategy in the Cartesian product of available topologies,
so it shares no code path with the block algorithm beyond the objective
definitions and front peeling.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .dataset import Instance
from .errors import OracleLimitError, ValidationError
from .objectives import ObjectiveVector, rank_fronts, round_lf1


@dataclass(frozen=True)
class OracleLimits:
    max_strategy_count: int = 10_000_000


def strategy_space_size(instance: Instance) -> int:
    return math.prod(len(a) for a in instance.available_indices)


def _enumerate_points(instance: Instance, d_max: int, s_max: int) -> Counter:
    """Rounded objective point -> number of in-bounds strategies."""
    avail = instance.available_indices
    ref = instance.ref_index
    counts = Counter()
    # chunk over the first step's choices to keep memory flat
    rest = list(itertools.product(*avail[1:])) if instance.t_max > 1 else [()]
    tail = np.array(rest, dtype=np.int64).reshape(len(rest), instance.t_max - 1)
    cols = np.arange(instance.t_max)
    for g0 in avail[0].tolist():
        rows = np.hstack([np.full((len(tail), 1), g0, dtype=np.int64), tail])
        depth = instance.depths[rows].max(axis=1)
        switches = (rows[:, 1:] != rows[:, :-1]).sum(axis=1)
        keep = (depth <= d_max) & (switches <= s_max)
        if not keep.any():
            continue
        rows, depth, switches = rows[keep], depth[keep], switches[keep]
        lf1 = instance.lf1[rows, cols].max(axis=1)
        non_ref = (rows != ref).sum(axis=1)
        for key in zip(lf1.tolist(), depth.tolist(), switches.tolist(), non_ref.tolist()):
            counts[key] += 1
    points = Counter()
    for (lf1, d, w, z), c in counts.items():
        points[ObjectiveVector(round_lf1(lf1), d, w, z)] += c
    return points


def brute_force_fronts(instance: Instance, d_max: int, s_max: int, k_max: int = 1,
                       limits: OracleLimits = OracleLimits()) -> list:
    """Fronts 1..k_max as lists of ``(point, strategy_count)``, lf1 rounded.

    Raises OracleLimitError when the strategy space exceeds the limit.
    """
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    size = strategy_space_size(instance)
    if size > limits.max_strategy_count:
        raise OracleLimitError(size, limits.max_strategy_count)
    points = _enumerate_points(instance, d_max, s_max)
    fronts = rank_fronts(points, k_max)
    return [sorted(((p, points[p]) for p in front), key=lambda x: (x[0][1], x[0][2], x[0][3], x[0][0]))
            for front in fronts]


@dataclass
class EquivalenceReport:
    passed: bool
    adjacency_mode: str | None
    message: str
    n_fronts: int = 0

    def __bool__(self):
        return self.passed


def _front_dicts(fronts) -> list:
    return [{tuple(p): int(c) for p, c in front} for front in fronts]


def compare_fronts(oracle_fronts: list, candidate_fronts: list) -> str | None:
    """First discrepancy between two ``[(point, count)]`` front lists, ignoring counts."""
    a, b = _front_dicts(oracle_fronts), _front_dicts(candidate_fronts)
    for k in range(max(len(a), len(b))):
        fa = a[k] if k < len(a) else {}
        fb = b[k] if k < len(b) else {}
        missing = sorted(set(fa) - set(fb))
        extra = sorted(set(fb) - set(fa))
        if missing:
            return f"front {k + 1}: point {missing[0]} missing from exact result"
        if extra:
            return f"front {k + 1}: point {extra[0]} not produced by brute force"
    return None


def compare_counts(oracle_fronts: list, candidate_fronts: list) -> str | None:
    a, b = _front_dicts(oracle_fronts), _front_dicts(candidate_fronts)
    for k, (fa, fb) in enumerate(zip(a, b), start=1):
        for p in sorted(fa):
            if fa[p] != fb.get(p):
                return f"front {k}: point {p} has {fb.get(p)} strategies, brute force counts {fa[p]}"
    return None


def exact_as_fronts(result) -> list:
    return [[(e.point, e.strategy_count) for e in front] for front in result.fronts]


def check_equivalence(instance: Instance, d_max: int, s_max: int, k_max: int = 1,
                      limits: OracleLimits = OracleLimits(), candidate=None,
                      candidate_counts: bool = True) -> EquivalenceReport:
    """Compare exact fronts against brute force; report which counting mode matches.

    ``candidate`` optionally replaces the exact solver output with given
    ``[(point, count)]`` fronts, e.g. read back from a front file; its counts
    are checked only when ``candidate_counts`` is set (distinct-strategy
    counting).
    """
    from .exact import exact_fronts

    oracle = brute_force_fronts(instance, d_max, s_max, k_max, limits)
    if candidate is not None:
        diff = compare_fronts(oracle, candidate)
        if diff:
            return EquivalenceReport(False, None, diff, len(oracle))
        if not candidate_counts:
            return EquivalenceReport(True, None, f"{len(oracle)} fronts match; counts not compared", len(oracle))
        counts_diff = compare_counts(oracle, candidate)
        if counts_diff:
            return EquivalenceReport(False, None, counts_diff, len(oracle))
        return EquivalenceReport(True, "strict", f"{len(oracle)} fronts and counts match", len(oracle))

    strict = exact_as_fronts(exact_fronts(instance, d_max, s_max, k_max, strict_adjacency=True))
    diff = compare_fronts(oracle, strict)
    if diff:
        return EquivalenceReport(False, None, diff, len(oracle))
    matched = []
    first_diff = None
    for mode, fronts in (("strict", strict),
                         ("loose", exact_as_fronts(exact_fronts(instance, d_max, s_max, k_max)))):
        counts_diff = compare_counts(oracle, fronts)
        if counts_diff is None:
            matched.append(mode)
        elif first_diff is None:
            first_diff = f"{mode}: {counts_diff}"
    if not matched:
        return EquivalenceReport(False, None, first_diff, len(oracle))
    mode = matched[0] if len(matched) == 1 else "both"
    return EquivalenceReport(True, mode, f"{len(oracle)} fronts match; counts match in {mode} mode", len(oracle))
