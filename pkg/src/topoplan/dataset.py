"""Problem instances: precomputed per-topology depth and worst-case N-1 loading.

An instance holds, for every topology and time step, the worst-case N-1 line
loading in percent (``nan`` where the topology is unavailable).  Grid
calculations happen upstream; everything downstream only reads this table.

On disk an instance is a directory with three files::

    manifest.json    {"t_max": ..., "reference_id": ..., "name": ...}
    topologies.csv   topology_id,depth
    lf1.csv          topology_id,t,lf1

A topology is available at ``t`` exactly when ``lf1.csv`` has a row for it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError

MANIFEST = "manifest.json"
TOPOLOGIES = "topologies.csv"
LF1 = "lf1.csv"

# Reference-topology loading and per-step availability of the congested day
# used for the published case study, plus its depth distribution.
CASE_STUDY_REFERENCE_LF1 = (
    112.0, 100.0, 101.4, 104.2, 106.0, 113.6, 144.4, 119.8,
    126.2, 120.0, 115.6, 118.0, 118.8, 113.3, 101.4, 103.2,
    102.4, 111.6, 128.9, 142.1, 136.7, 131.1, 123.6, 113.3,
)
CASE_STUDY_STEP_COUNTS = (39180,) * 7 + (19950,) + (19590,) * 13 + (39180,) * 3
CASE_STUDY_DEPTH_COUNTS = {0: 1, 1: 489, 2: 20777, 3: 230827}


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable topology dataset.

    ``lf1`` is a dense ``(n_topologies, t_max)`` array aligned with
    ``topology_ids``; unavailable pairs hold ``nan``.  Internally, solvers
    address topologies by row index; ids only appear at the boundaries.
    """

    t_max: int
    topology_ids: np.ndarray
    depths: np.ndarray
    lf1: np.ndarray
    reference_id: int
    name: str = "instance"

    def __post_init__(self):
        ids = np.asarray(self.topology_ids, dtype=np.int64)
        depths = np.asarray(self.depths, dtype=np.int64)
        lf1 = np.asarray(self.lf1, dtype=np.float64)
        order = np.argsort(ids, kind="stable")
        ids, depths, lf1 = ids[order], depths[order], lf1[order]
        for arr in (ids, depths, lf1):
            arr.setflags(write=False)
        object.__setattr__(self, "topology_ids", ids)
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "lf1", lf1)
        object.__setattr__(self, "t_max", int(self.t_max))
        object.__setattr__(self, "reference_id", int(self.reference_id))

    @classmethod
    def from_rows(cls, t_max, reference_id, topologies: Mapping[int, int], rows, name="instance"):
        """Build from ``{id: depth}`` and ``(id, t, lf1)`` rows.

        Raises ValidationError for duplicate rows, unknown ids or steps outside
        the horizon.  Instance invariants are *not* checked here; see
        :func:`validate_instance`.
        """
        ids = np.array(sorted(topologies), dtype=np.int64)
        pos = {int(g): i for i, g in enumerate(ids)}
        depths = np.array([topologies[int(g)] for g in ids], dtype=np.int64)
        lf1 = np.full((len(ids), int(t_max)), np.nan)
        for g, t, value in rows:
            g, t = int(g), int(t)
            if g not in pos:
                raise ValidationError(f"lf1 row for unknown topology {g}")
            if not 0 <= t < t_max:
                raise ValidationError(f"lf1 row for topology {g} has t={t} outside 0..{t_max - 1}")
            i = pos[g]
            if not np.isnan(lf1[i, t]):
                raise ValidationError(f"duplicate lf1 row for topology {g} at t={t}")
            lf1[i, t] = float(value)
        return cls(t_max, ids, depths, lf1, reference_id, name)

    @property
    def n_topologies(self) -> int:
        return len(self.topology_ids)

    @cached_property
    def index(self) -> dict:
        return {int(g): i for i, g in enumerate(self.topology_ids)}

    @cached_property
    def ref_index(self) -> int:
        return self.index[self.reference_id]

    @cached_property
    def available_mask(self) -> np.ndarray:
        mask = ~np.isnan(self.lf1)
        mask.setflags(write=False)
        return mask

    @cached_property
    def available_indices(self) -> tuple:
        """Per time step, the sorted row indices of available topologies."""
        return tuple(np.flatnonzero(self.available_mask[:, t]) for t in range(self.t_max))

    @property
    def max_depth(self) -> int:
        return int(self.depths.max())

    def available(self, t: int) -> np.ndarray:
        """Topology ids in G_t."""
        return self.topology_ids[self.available_indices[t]]

    def depth(self, g: int) -> int:
        return int(self.depths[self.index[g]])

    def lf1_value(self, g: int, t: int) -> float:
        return float(self.lf1[self.index[g], t])

    def to_indices(self, genes: Sequence[int]) -> np.ndarray:
        try:
            return np.array([self.index[int(g)] for g in genes], dtype=np.int64)
        except KeyError as exc:
            raise ValidationError(f"unknown topology id {exc.args[0]}") from None

    def to_ids(self, rows) -> tuple:
        return tuple(int(g) for g in self.topology_ids[np.asarray(rows, dtype=np.int64)])

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.t_max == other.t_max
            and self.reference_id == other.reference_id
            and self.name == other.name
            and np.array_equal(self.topology_ids, other.topology_ids)
            and np.array_equal(self.depths, other.depths)
            and np.array_equal(self.lf1, other.lf1, equal_nan=True)
        )

    __hash__ = None


def validate_instance(instance: Instance) -> list:
    """Return human-readable invariant violations (empty when valid)."""
    problems = []
    if instance.t_max < 1:
        problems.append(f"t_max must be >= 1, got {instance.t_max}")
    if instance.lf1.shape != (instance.n_topologies, instance.t_max):
        problems.append(f"lf1 table shape {instance.lf1.shape} does not match topologies x t_max")
        return problems
    ids = instance.topology_ids
    if len(np.unique(ids)) != len(ids):
        problems.append("duplicate topology ids")
    if np.any(ids < 0):
        problems.append("negative topology ids")
    if instance.reference_id not in set(ids.tolist()):
        problems.append(f"reference topology {instance.reference_id} is not in the topology table")
        return problems
    ref = instance.index[instance.reference_id]
    for g, d in zip(ids.tolist(), instance.depths.tolist()):
        if d < 0:
            problems.append(f"topology {g} has negative depth {d}")
        elif g == instance.reference_id and d != 0:
            problems.append(f"reference topology {g} has depth {d}, expected 0")
        elif g != instance.reference_id and d == 0:
            problems.append(f"non-reference topology {g} has depth 0")
    for t in range(instance.t_max):
        if np.isnan(instance.lf1[ref, t]):
            problems.append(f"reference topology unavailable at t={t}")
    with np.errstate(invalid="ignore"):
        bad = instance.available_mask & ~((instance.lf1 > 0) & np.isfinite(instance.lf1))
    for i, t in zip(*np.nonzero(bad)):
        problems.append(f"topology {int(ids[i])} at t={t} has invalid lf1 {instance.lf1[i, t]}")
    return problems


def _check(instance: Instance) -> Instance:
    problems = validate_instance(instance)
    if problems:
        raise ValidationError("; ".join(problems))
    return instance


def load_instance(directory) -> Instance:
    directory = Path(directory)
    with open(directory / MANIFEST, encoding="utf-8") as fh:
        manifest = json.load(fh)
    try:
        t_max = int(manifest["t_max"])
        reference_id = int(manifest["reference_id"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed manifest: {exc}") from None
    name = str(manifest.get("name", directory.name))

    topologies = {}
    with open(directory / TOPOLOGIES, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["topology_id", "depth"]:
            raise ValidationError(f"{TOPOLOGIES}: unexpected header {header}")
        for row in reader:
            if not row:
                continue
            g, d = int(row[0]), int(row[1])
            if g in topologies:
                raise ValidationError(f"{TOPOLOGIES}: duplicate topology {g}")
            topologies[g] = d

    with open(directory / LF1, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["topology_id", "t", "lf1"]:
            raise ValidationError(f"{LF1}: unexpected header {header}")
        rows = [(int(r[0]), int(r[1]), float(r[2])) for r in reader if r]

    return _check(Instance.from_rows(t_max, reference_id, topologies, rows, name))


def store_instance(instance: Instance, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"t_max": instance.t_max, "reference_id": instance.reference_id, "name": instance.name}
    with open(directory / MANIFEST, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    with open(directory / TOPOLOGIES, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("topology_id,depth\n")
        fh.writelines(f"{g},{d}\n" for g, d in zip(instance.topology_ids.tolist(), instance.depths.tolist()))
    rows, cols = np.nonzero(instance.available_mask)
    ids = instance.topology_ids[rows].tolist()
    values = instance.lf1[rows, cols].tolist()
    with open(directory / LF1, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("topology_id,t,lf1\n")
        # repr() of a float is the shortest string that parses back exactly
        fh.writelines(f"{g},{t},{v!r}\n" for g, t, v in zip(ids, cols.tolist(), values))


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of the synthetic instance generator.

    ``step_counts`` (optional) fixes |G_t| per step, reference included; the
    available sets are then nested by a random priority so that topologies
    available at a sparse step are available everywhere.  Otherwise each
    non-reference topology is dropped independently per step with
    ``availability_drop_rate``.  ``reference_profile`` (optional) pins the
    reference row and shifts all other rows by the same daily shape.
    """

    t_max: int
    count_per_depth: Mapping[int, int]
    availability_drop_rate: float = 0.1
    lf1_base_range: tuple = (70.0, 130.0)
    lf1_noise_range: tuple = (-15.0, 15.0)
    seed: int = 0
    step_counts: Sequence[int] | None = None
    reference_profile: Sequence[float] | None = None
    decimals: int = 2
    name: str = "synthetic"

    def __post_init__(self):
        if not self.count_per_depth:
            raise ValidationError("count_per_depth is empty")
        counts = {int(d): int(c) for d, c in dict(self.count_per_depth).items()}
        counts[0] = 1
        object.__setattr__(self, "count_per_depth", dict(sorted(counts.items())))


def generate_instance(config: GeneratorConfig) -> Instance:
    """Draw a synthetic instance; a pure function of ``config``."""
    t_max = config.t_max
    counts = config.count_per_depth
    if t_max < 1:
        raise ValidationError(f"t_max must be >= 1, got {t_max}")
    if any(d < 0 or c < 0 for d, c in counts.items()):
        raise ValidationError("depths and counts must be non-negative")
    if not 0.0 <= config.availability_drop_rate < 1.0:
        raise ValidationError("availability_drop_rate must be in [0, 1)")
    lo, hi = config.lf1_base_range
    nlo, nhi = config.lf1_noise_range
    if not (lo <= hi and nlo <= nhi):
        raise ValidationError("empty lf1 range")

    depths = np.concatenate([np.full(c, d, dtype=np.int64) for d, c in counts.items()])
    n = len(depths)
    rng = np.random.default_rng(config.seed)
    base = rng.uniform(lo, hi, size=n)
    noise = rng.uniform(nlo, nhi, size=(n, t_max))
    lf1 = base[:, None] + noise
    if config.reference_profile is not None:
        profile = np.asarray(config.reference_profile, dtype=np.float64)
        if profile.shape != (t_max,):
            raise ValidationError("reference_profile must have t_max entries")
        lf1 += profile - profile.mean()
        lf1[0] = profile
    lf1 = np.maximum(np.round(lf1, config.decimals), 10.0 ** -config.decimals)

    if config.step_counts is not None:
        steps = np.asarray(config.step_counts, dtype=np.int64)
        if steps.shape != (t_max,) or np.any(steps < 1) or np.any(steps > n):
            raise ValidationError("step_counts must give 1..n_topologies per step")
        rank = rng.permutation(n - 1)
        keep = rank[:, None] < (steps[None, :] - 1)
    else:
        keep = rng.random((n - 1, t_max)) >= config.availability_drop_rate
    lf1[1:][~keep] = np.nan
    return Instance(t_max, np.arange(n), depths, lf1, 0, config.name)


def case_study_config(seed: int = 0, **overrides) -> GeneratorConfig:
    """Synthetic stand-in at the scale of the published case study.

    Per-step availability follows the published counts (39,180 / ~19,600) and
    the depth mix follows the published depth distribution, rescaled to the
    39,179 non-reference topologies that a nested availability layout needs.
    """
    total = sum(c for d, c in CASE_STUDY_DEPTH_COUNTS.items() if d > 0)
    target = max(CASE_STUDY_STEP_COUNTS) - 1
    counts = {d: round(c * target / total) for d, c in CASE_STUDY_DEPTH_COUNTS.items() if d > 0}
    counts[3] += target - sum(counts.values())
    params = dict(
        t_max=24,
        count_per_depth=counts,
        step_counts=CASE_STUDY_STEP_COUNTS,
        reference_profile=CASE_STUDY_REFERENCE_LF1,
        lf1_base_range=(80.0, 150.0),
        lf1_noise_range=(-12.0, 12.0),
        seed=seed,
        decimals=1,
        name="case-study",
    )
    params.update(overrides)
    return GeneratorConfig(**params)


def depth_histogram(instance: Instance) -> dict:
    depths, counts = np.unique(instance.depths, return_counts=True)
    return {int(d): int(c) for d, c in zip(depths, counts)}
