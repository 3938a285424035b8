"""Block combinatorics and per-block loading statistics.

A block is a run of consecutive time steps held in one topology.  A block
configuration partitions the horizon into blocks; a reference assignment
marks a non-adjacent subset of a configuration's blocks as operated in the
reference topology.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .dataset import Instance
from .errors import ValidationError
from .objectives import lf1_tenths


class Block(NamedTuple):
    t_s: int
    t_e: int

    @property
    def length(self) -> int:
        return self.t_e - self.t_s + 1


@dataclass(frozen=True)
class BlockConfiguration:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(Block(*b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks or blocks[0].t_s != 0:
            raise ValidationError("configuration must start at t=0")
        for a, b in zip(blocks, blocks[1:]):
            if b.t_s != a.t_e + 1:
                raise ValidationError(f"blocks {a} and {b} are not consecutive")
        if any(b.t_s > b.t_e for b in blocks):
            raise ValidationError("empty block in configuration")

    @classmethod
    def from_cuts(cls, t_max: int, cuts) -> "BlockConfiguration":
        """Configuration whose blocks start at 0 and at every switch time in ``cuts``."""
        starts = [0, *sorted(int(c) for c in cuts)]
        ends = [s - 1 for s in starts[1:]] + [t_max - 1]
        return cls(tuple(Block(s, e) for s, e in zip(starts, ends)))

    @property
    def switches(self) -> int:
        return len(self.blocks) - 1

    @property
    def t_max(self) -> int:
        return self.blocks[-1].t_e + 1

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]


@dataclass(frozen=True)
class ReferenceAssignment:
    ref_blocks: tuple

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.ref_blocks))
        if any(b - a == 1 for a, b in zip(idx, idx[1:])):
            raise ValidationError(f"reference blocks {idx} contain adjacent indices")
        object.__setattr__(self, "ref_blocks", idx)

    def non_ref_steps(self, config: BlockConfiguration) -> int:
        return config.t_max - sum(config[i].length for i in self.ref_blocks)

    def __contains__(self, i):
        return i in self.ref_blocks


@dataclass
class BlockStats:
    block: Block
    ref_lf1: float
    best_nonref_lf1: dict


def n_blocks(t_max: int) -> int:
    return t_max * (t_max + 1) // 2


def block_index(t_s, t_e, t_max: int):
    """Position of block (t_s, t_e) in :func:`enumerate_blocks` order (vectorizes)."""
    return t_s * t_max - t_s * (t_s - 1) // 2 + (t_e - t_s)


def enumerate_blocks(t_max: int) -> list:
    if t_max < 1:
        raise ValidationError("t_max must be >= 1")
    return [Block(s, e) for s in range(t_max) for e in range(s, t_max)]


def configuration_cuts(t_max: int, l: int) -> np.ndarray:
    """All sorted switch-time tuples with exactly ``l`` switches, lexicographic."""
    if not 0 <= l <= t_max - 1:
        raise ValidationError(f"l must be in 0..{t_max - 1}, got {l}")
    combos = list(combinations(range(1, t_max), l))
    return np.array(combos, dtype=np.int64).reshape(len(combos), l)


def enumerate_configurations(t_max: int, l: int) -> list:
    return [BlockConfiguration.from_cuts(t_max, c) for c in configuration_cuts(t_max, l)]


@lru_cache(maxsize=None)
def independent_subsets(n: int) -> tuple:
    """Subsets of range(n) without two consecutive indices, lexicographic."""
    out = []

    def grow(prefix, nxt):
        out.append(tuple(prefix))
        for i in range(nxt, n):
            grow(prefix + [i], i + 2)

    grow([], 0)
    return tuple(out)


def enumerate_reference_assignments(config) -> list:
    n = len(config)
    return [ReferenceAssignment(s) for s in independent_subsets(n)]


def fibonacci(k: int) -> int:
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def _block_max(instance: Instance, block: Block) -> np.ndarray:
    """Max-over-block lf1 per topology; +inf where not available throughout."""
    window = instance.lf1[:, block.t_s:block.t_e + 1]
    return np.where(np.isnan(window), np.inf, window).max(axis=1)


def compute_block_stats(instance: Instance, block: Block, d_max: int) -> BlockStats:
    """Reference loading and best constant non-reference loading per depth bound."""
    block = Block(*block)
    values = _block_max(instance, block)
    ref = instance.ref_index
    ref_lf1 = float(values[ref])
    nonref = np.ones(instance.n_topologies, dtype=bool)
    nonref[ref] = False
    best = {}
    for d in range(d_max + 1):
        sel = nonref & (instance.depths <= d)
        best[d] = float(values[sel].min()) if sel.any() else float("inf")
    return BlockStats(block, ref_lf1, best)


def admissible_topologies(instance: Instance, block: Block, d: int, threshold: float) -> list:
    """Non-reference ids available over the block with depth <= d and block max <= threshold."""
    values = _block_max(instance, Block(*block))
    sel = (instance.depths <= d) & (values <= threshold) & np.isfinite(values)
    sel[instance.ref_index] = False
    return [int(g) for g in instance.topology_ids[sel]]


class BlockTable:
    """Precomputed per-block loading data shared by the exact solver.

    For each exact depth ``k >= 1`` the candidates of every block (non-reference
    topologies available throughout it) are stored in one flat array, grouped by
    block and sorted by their unrounded block maximum (ties by id).  ``keys``
    holds ``block * stride + tenths`` so that counting candidates with rounded
    maximum ``<= v`` is a single ``searchsorted``.
    """

    def __init__(self, instance: Instance, d_max: int | None = None):
        self.instance = instance
        t_max = instance.t_max
        self.t_max = t_max
        self.d_max = instance.max_depth if d_max is None else d_max
        nb = n_blocks(t_max)
        self.n_blocks = nb
        blocks = enumerate_blocks(t_max)
        self.ts = np.array([b.t_s for b in blocks], dtype=np.int64)
        self.te = np.array([b.t_e for b in blocks], dtype=np.int64)

        ref = instance.ref_index
        raw = np.where(instance.available_mask, instance.lf1, np.inf)
        tenths = lf1_tenths(raw)
        big = np.iinfo(np.int64).max
        finite_t = tenths[tenths < big]
        self.stride = int(finite_t.max()) + 2 if finite_t.size else 2

        self.ref_u = np.empty(nb)
        self.ref_r = np.empty(nb, dtype=np.int64)
        D = self.d_max
        self.best_u = np.full((D + 1, nb), np.inf)
        self.best_r = np.full((D + 1, nb), big, dtype=np.int64)
        self.exmin_r = np.full((D + 1, nb), big, dtype=np.int64)

        depth_rows = {k: np.flatnonzero((instance.depths == k) & (np.arange(instance.n_topologies) != ref))
                      for k in range(1, D + 1)}
        parts = {k: ([], [], [], []) for k in range(1, D + 1)}
        for t_s in range(t_max):
            run_u = np.maximum.accumulate(raw[:, t_s:], axis=1)
            run_r = np.maximum.accumulate(tenths[:, t_s:], axis=1)
            for off in range(t_max - t_s):
                b = block_index(t_s, t_s + off, t_max)
                self.ref_u[b] = run_u[ref, off]
                self.ref_r[b] = run_r[ref, off]
                for k, rows in depth_rows.items():
                    u = run_u[rows, off]
                    ok = np.isfinite(u)
                    r_rows, u = rows[ok], u[ok]
                    order = np.argsort(u, kind="stable")
                    r_rows = r_rows[order]
                    parts[k][0].append(np.full(len(r_rows), b, dtype=np.int64))
                    parts[k][1].append(run_r[r_rows, off])
                    parts[k][2].append(r_rows)
                    parts[k][3].append(u[order])
                    if len(r_rows):
                        self.exmin_r[k, b] = run_r[r_rows[0], off]
                        self.best_u[k, b] = u[order[0]]
        self.keys = {}
        self.loads = {}
        self.rows = {}
        self.start = {}
        self.end = {}
        block_ids = np.arange(nb, dtype=np.int64)
        for k in range(1, D + 1):
            blk = np.concatenate(parts[k][0]) if parts[k][0] else np.zeros(0, dtype=np.int64)
            val = np.concatenate(parts[k][1]) if parts[k][1] else np.zeros(0, dtype=np.int64)
            rows = np.concatenate(parts[k][2]) if parts[k][2] else np.zeros(0, dtype=np.int64)
            loads = np.concatenate(parts[k][3]) if parts[k][3] else np.zeros(0)
            order = np.argsort(blk, kind="stable")
            keys = blk[order] * self.stride + val[order]
            self.keys[k] = keys
            self.loads[k] = loads[order]
            self.rows[k] = rows[order].astype(np.int32)
            self.start[k] = np.searchsorted(keys, block_ids * self.stride, "left")
            self.end[k] = np.searchsorted(keys, (block_ids + 1) * self.stride, "left")
        # best over depth <= d is the running minimum of the exact-depth minima
        for d in range(1, D + 1):
            self.best_u[d] = np.minimum(self.best_u[d - 1], self.best_u[d])
            self.best_r[d] = np.minimum(self.best_r[d - 1], self.exmin_r[d])

    def count(self, blocks, d: int, v) -> np.ndarray:
        """Candidates per block with depth <= d and rounded block max <= v (tenths)."""
        blocks = np.asarray(blocks, dtype=np.int64)
        v = np.minimum(np.asarray(v, dtype=np.int64), self.stride - 1)
        out = np.zeros(np.broadcast(blocks, v).shape, dtype=np.int64)
        if d < 1:
            return out
        q = blocks * self.stride + v
        for k in range(1, min(d, self.d_max) + 1):
            out += np.searchsorted(self.keys[k], q, "right") - self.start[k][blocks]
        return out

    def first_equal_load(self, blocks, d: int, v: int) -> np.ndarray:
        """Smallest unrounded block max among candidates with depth <= d and
        tenths == v, per block (+inf if none)."""
        blocks = np.asarray(blocks, dtype=np.int64)
        out = np.full(blocks.shape, np.inf)
        if d < 1 or v >= self.stride:
            return out
        q = blocks * self.stride + v
        for k in range(1, min(d, self.d_max) + 1):
            keys = self.keys[k]
            if len(keys) == 0:
                continue
            pos = np.minimum(np.searchsorted(keys, q, "left"), len(keys) - 1)
            hit = keys[pos] == q
            out = np.minimum(out, np.where(hit, self.loads[k][pos], np.inf))
        return out

    def candidates(self, b: int, d: int, v: int) -> np.ndarray:
        """Row indices of candidates of block ``b`` with depth <= d and tenths <= v."""
        if d < 1:
            return np.zeros(0, dtype=np.int64)
        v = min(int(v), self.stride - 1)
        chunks = []
        for k in range(1, min(d, self.d_max) + 1):
            hi = np.searchsorted(self.keys[k], b * self.stride + v, "right")
            chunks.append(self.rows[k][self.start[k][b]:hi])
        return np.concatenate(chunks).astype(np.int64)

    def slice_exact(self, b: int, k: int, v: int, equal: bool, limit: int = 3) -> np.ndarray:
        """Up to ``limit`` best-loaded depth-``k`` candidates of block ``b`` with
        tenths == v (``equal``) or tenths < v."""
        if not 1 <= k <= self.d_max:
            return np.zeros(0, dtype=np.int64)
        keys = self.keys[k]
        base = b * self.stride
        v = min(int(v), self.stride - 1)
        lo_v = np.searchsorted(keys, base + v, "left")
        if equal:
            hi_v = np.searchsorted(keys, base + v, "right")
            return self.rows[k][lo_v:min(hi_v, lo_v + limit)].astype(np.int64)
        lo = self.start[k][b]
        return self.rows[k][lo:min(lo_v, lo + limit)].astype(np.int64)

    def block(self, b: int) -> Block:
        return Block(int(self.ts[b]), int(self.te[b]))

    def block_max(self, b: int, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        return self.instance.lf1[rows, self.ts[b]:self.te[b] + 1].max(axis=1)
