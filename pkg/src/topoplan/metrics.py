"""Quality indicators for approximation fronts: IGD+ and multi-front coverage."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .objectives import ObjectiveVector, round_lf1


@dataclass(frozen=True)
class NormalizationBounds:
    ideal: ObjectiveVector
    maximum: ObjectiveVector

    def __post_init__(self):
        lo = np.asarray(self.ideal, dtype=np.float64)
        hi = np.asarray(self.maximum, dtype=np.float64)
        if lo.shape != (4,) or hi.shape != (4,):
            raise ValidationError("bounds need four components")
        if np.any(hi <= lo):
            raise ValidationError(f"zero-width or inverted bounds: ideal {tuple(lo)} maximum {tuple(hi)}")

    @classmethod
    def from_problem(cls, lf1_range, d_max: int, s_max: int, t_max: int) -> "NormalizationBounds":
        """Bounds derived from the feasible lf1 range and the discrete limits.

        Degenerate ranges (a single feasible lf1, or a zero limit) are widened
        to one unit (0.1 for lf1) so normalization stays defined.
        """
        lo, hi = float(lf1_range[0]), float(lf1_range[1])
        if not hi > lo:
            hi = lo + 0.1
        return cls(ObjectiveVector(lo, 0, 0, 0),
                   ObjectiveVector(hi, max(d_max, 1), max(s_max, 1), max(t_max, 1)))

    def as_arrays(self):
        return np.asarray(self.ideal, dtype=np.float64), np.asarray(self.maximum, dtype=np.float64)


# Ideal and worst objective values on the published case-study day.
CASE_STUDY_BOUNDS = NormalizationBounds(ObjectiveVector(77.3, 0, 0, 0), ObjectiveVector(212.5, 3, 5, 24))


def normalize(points, bounds: NormalizationBounds) -> np.ndarray:
    """Min-max scale to the unit box, clamped; accepts one vector or a matrix."""
    lo, hi = bounds.as_arrays()
    x = np.asarray(points, dtype=np.float64)
    return np.clip((x - lo) / (hi - lo), 0.0, 1.0)


def _matrix(points) -> np.ndarray:
    pts = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=np.float64)
    return pts.reshape(-1, 4)


def igd_plus(approx: Iterable, reference: Iterable, bounds: NormalizationBounds) -> float:
    """Mean over reference points of the distance to the nearest approximation
    point, counting only the objectives in which the approximation is worse."""
    ref = _matrix(reference)
    if len(ref) == 0:
        raise ValidationError("reference set is empty")
    app = _matrix(approx)
    if len(app) == 0:
        return math.inf
    z = normalize(ref, bounds)
    a = normalize(app, bounds)
    diff = np.maximum(a[None, :, :] - z[:, None, :], 0.0)
    dist = np.sqrt((diff ** 2).sum(axis=2))
    return float(dist.min(axis=1).mean())


def _rounded_key(p) -> tuple:
    return (round_lf1(float(p[0])), int(p[1]), int(p[2]), int(p[3]))


def front_coverage(approx_front: Iterable, reference_fronts: Sequence, k: int) -> tuple:
    """``(I_k, Î_k)``: approximation points landing on reference front ``k``.

    Approximation lf1 values are rounded to one decimal before matching; the
    reference fronts are expected to carry rounded lf1 already.
    """
    if not 1 <= k <= len(reference_fronts):
        raise ValidationError(f"k must be in 1..{len(reference_fronts)}, got {k}")
    ref = {_rounded_key(p) for p in reference_fronts[k - 1]}
    if not ref:
        raise ValidationError(f"reference front {k} is empty")
    approx = {_rounded_key(p) for p in approx_front}
    hits = len(approx & ref)
    return hits, hits / len(ref)


def coverage_table(approx_front: Iterable, reference_fronts: Sequence, k_max: int = 10) -> list:
    """``[(I_k, Î_k)]`` for k = 1..k_max; fronts beyond the reference depth give (0, 0.0)."""
    approx = list(approx_front)
    out = []
    for k in range(1, k_max + 1):
        if k <= len(reference_fronts) and len(reference_fronts[k - 1]):
            out.append(front_coverage(approx, reference_fronts, k))
        else:
            out.append((0, 0.0))
    return out
