"""Exact Pareto fronts via the block algorithm.

Every strategy with ``l`` switches is a choice of one topology per block of a
configuration with ``l + 1`` blocks, and its objectives only depend on which
blocks run the reference topology and on per-block loading maxima.  So instead
of enumerating strategies we enumerate (depth bound, configuration, reference
assignment) triples, whose number is polynomial in the horizon for fixed
bounds, and derive objective points and strategy counts from per-block data.

Dominance is evaluated on lf1 rounded to one decimal, so that loadings that
differ by less than 0.05 percentage points are treated as equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .blocks import (
    Block,
    BlockConfiguration,
    BlockTable,
    ReferenceAssignment,
    admissible_topologies,
    block_index,
    configuration_cuts,
    fibonacci,
    independent_subsets,
)
from .dataset import Instance
from .errors import InfeasibleError, ValidationError
from .objectives import ObjectiveVector, lf1_tenths, rank_fronts

_BIG = np.iinfo(np.int64).max
# primes below 2**31: residue products stay inside int64
_PRIMES = (2147483647, 2147483629, 2147483587, 2147483579, 2147483563,
           2147483549, 2147483543, 2147483497)


@dataclass(frozen=True)
class ConfigRecord:
    d: int
    config: BlockConfiguration
    ref: ReferenceAssignment
    switches: int
    non_ref: int
    lf1: float


@dataclass(frozen=True)
class ExactFrontEntry:
    front_rank: int
    depth: int
    switches: int
    non_ref: int
    lf1: float
    lf1_rounded: float
    strategy_count: int
    representative: tuple

    @property
    def point(self) -> ObjectiveVector:
        """Objective point with rounded lf1."""
        return ObjectiveVector(self.lf1_rounded, self.depth, self.switches, self.non_ref)


@dataclass
class ExactResult:
    fronts: list
    eval_count: int
    status: str = "ok"
    strict_adjacency: bool = False
    lf1_bounds: tuple = (math.inf, -math.inf)
    bounds: tuple = field(default=(0, 0, 0))

    def front_points(self, k: int) -> set:
        return {e.point for e in self.fronts[k - 1]} if k <= len(self.fronts) else set()

    def entries(self) -> list:
        return [e for front in self.fronts for e in front]


def count_evaluations(d_max: int, l_max: int, t_max: int) -> int:
    """Number of (d, M, R) evaluations performed for the given bounds."""
    if d_max < 0 or not 0 <= l_max <= t_max - 1:
        raise ValidationError("bounds out of range")
    return (d_max + 1) * sum(math.comb(t_max - 1, l) * fibonacci(l + 3) for l in range(l_max + 1))


@lru_cache(maxsize=8)
def _enumerate_pairs(t_max: int, s_max: int):
    """All (configuration, reference assignment) pairs in canonical order.

    Returns padded ``blocks`` (pair x slot block index, -1 = unused), ``is_ref``,
    switch count ``l``, non-reference steps ``n`` and per-``l`` cut arrays.
    """
    width = s_max + 1
    blocks, is_ref, ls, ns, cut_list = [], [], [], [], []
    for l in range(s_max + 1):
        cuts = configuration_cuts(t_max, l)
        c = len(cuts)
        starts = np.hstack([np.zeros((c, 1), dtype=np.int64), cuts])
        ends = np.hstack([cuts - 1, np.full((c, 1), t_max - 1, dtype=np.int64)])
        bid = block_index(starts, ends, t_max)
        lengths = ends - starts + 1
        subsets = independent_subsets(l + 1)
        mask = np.zeros((len(subsets), l + 1), dtype=bool)
        for i, s in enumerate(subsets):
            mask[i, list(s)] = True
        k = len(subsets)
        b = np.repeat(bid, k, axis=0)
        r = np.tile(mask, (c, 1))
        pad = width - (l + 1)
        blocks.append(np.hstack([b, np.full((c * k, pad), -1, dtype=np.int64)]))
        is_ref.append(np.hstack([r, np.zeros((c * k, pad), dtype=bool)]))
        ls.append(np.full(c * k, l, dtype=np.int64))
        ns.append(t_max - (np.repeat(lengths, k, axis=0) * r).sum(axis=1))
        cut_list.append(np.repeat(cuts, k, axis=0))
    out = (np.vstack(blocks), np.vstack(is_ref), np.concatenate(ls), np.concatenate(ns), tuple(cut_list))
    for a in out[:4]:
        a.setflags(write=False)
    return out


class ConfigRecords:
    """Columnar store of the (d, M, R) records produced by the block algorithm.

    Iterating yields :class:`ConfigRecord` objects; solvers use the arrays.
    ``lf1`` has shape ``(d_max + 1, n_pairs)``.
    """

    def __init__(self, t_max, d_max, s_max, blocks, is_ref, l, n, cuts, lf1):
        self.t_max, self.d_max, self.s_max = t_max, d_max, s_max
        self.blocks, self.is_ref, self.l, self.n = blocks, is_ref, l, n
        self._cuts = cuts
        self.lf1 = lf1

    @property
    def n_pairs(self) -> int:
        return len(self.l)

    @property
    def eval_count(self) -> int:
        return self.lf1.size

    def __len__(self):
        return self.eval_count

    def columns(self):
        """Flat ``(d, l, n, lf1)`` arrays, depth-major."""
        D = self.d_max + 1
        d = np.repeat(np.arange(D), self.n_pairs)
        return d, np.tile(self.l, D), np.tile(self.n, D), self.lf1.reshape(-1)

    def config(self, p: int) -> BlockConfiguration:
        l = int(self.l[p])
        offset = int(np.searchsorted(self.l, l, "left"))
        return BlockConfiguration.from_cuts(self.t_max, self._cuts[l][p - offset])

    def record(self, d: int, p: int) -> ConfigRecord:
        config = self.config(p)
        ref = ReferenceAssignment(tuple(np.flatnonzero(self.is_ref[p]).tolist()))
        return ConfigRecord(d, config, ref, int(self.l[p]), int(self.n[p]), float(self.lf1[d, p]))

    def __iter__(self):
        for d in range(self.d_max + 1):
            for p in range(self.n_pairs):
                yield self.record(d, p)

    def feasible_lf1_range(self) -> tuple:
        finite = self.lf1[np.isfinite(self.lf1)]
        return float(finite.min()), float(finite.max())


def _check_bounds(instance: Instance, d_max: int, s_max: int):
    if not 0 <= d_max <= instance.max_depth:
        raise ValidationError(f"d_max must be in 0..{instance.max_depth}, got {d_max}")
    if not 0 <= s_max <= instance.t_max - 1:
        raise ValidationError(f"s_max must be in 0..{instance.t_max - 1}, got {s_max}")


def run_block_algorithm(instance: Instance, d_max: int, s_max: int, table: BlockTable | None = None) -> ConfigRecords:
    """Best achievable lf1 for every (d, M, R) within the bounds."""
    _check_bounds(instance, d_max, s_max)
    table = table or BlockTable(instance, d_max)
    blocks, is_ref, l, n, cuts = _enumerate_pairs(instance.t_max, s_max)
    valid = blocks >= 0
    safe = np.where(valid, blocks, 0)
    ref_vals = np.where(is_ref, table.ref_u[safe], -np.inf)
    lf1 = np.empty((d_max + 1, len(l)))
    for d in range(d_max + 1):
        vals = np.where(is_ref, ref_vals, table.best_u[d][safe])
        lf1[d] = np.where(valid, vals, -np.inf).max(axis=1)
    return ConfigRecords(instance.t_max, d_max, s_max, blocks, is_ref, l, n, cuts, lf1)


def _record_columns(records):
    if isinstance(records, ConfigRecords):
        return records.columns()
    rows = []
    for r in records:
        if hasattr(r, "switches"):
            rows.append((r.d, r.switches, r.non_ref, r.lf1))
        else:
            rows.append(tuple(r))
    if not rows:
        return (np.zeros(0, dtype=np.int64),) * 3 + (np.zeros(0),)
    d, l, n, lf1 = zip(*rows)
    return (np.asarray(d, dtype=np.int64), np.asarray(l, dtype=np.int64),
            np.asarray(n, dtype=np.int64), np.asarray(lf1, dtype=np.float64))


def filter_nondominated(records, d_max: int, s_max: int, t_max: int) -> set:
    """Nondominated (d, l, n, lf1) tuples by neighbour propagation on a dense tensor.

    Cells are visited in increasing (d, l, n) order; a cell survives when its
    rounded lf1 beats the rounded minimum of its three lower neighbours,
    otherwise it inherits that minimum so later cells see it.
    """
    d, l, n, lf1 = _record_columns(records)
    if len(d) and (d.min() < 0 or d.max() > d_max or l.min() < 0 or l.max() > s_max
                   or n.min() < 0 or n.max() > t_max):
        raise ValidationError("record outside the tensor bounds")
    # index 0 along every axis is the -1 padding
    tensor = np.full((d_max + 2, s_max + 2, t_max + 2), np.inf)
    np.minimum.at(tensor, (d + 1, l + 1, n + 1), lf1)
    survivors = set()
    for di in range(1, d_max + 2):
        for li in range(1, s_max + 2):
            for ni in range(1, t_max + 2):
                own = tensor[di, li, ni]
                nb = min(tensor[di - 1, li, ni], tensor[di, li - 1, ni], tensor[di, li, ni - 1])
                if own < np.inf and _tenths(own) < _tenths(nb):
                    survivors.add((di - 1, li - 1, ni - 1, float(own)))
                else:
                    tensor[di, li, ni] = nb
    return survivors


def _tenths(x: float) -> int:
    return int(lf1_tenths(x))


def chain_count(sets) -> int:
    """Sequences picking one element per set with no equal neighbours.

    Elements are grouped by their membership pattern across the sets; the
    number of valid continuations only depends on that pattern.
    """
    sets = [np.asarray(s, dtype=np.int64) for s in sets]
    m = len(sets)
    if m == 0:
        return 1
    if any(len(s) == 0 for s in sets):
        return 0
    if m == 1:
        return len(sets[0])
    allrows = np.concatenate(sets)
    uniq, inv = np.unique(allrows, return_inverse=True)
    masks = np.zeros(len(uniq), dtype=np.int64)
    pos = 0
    for i, s in enumerate(sets):
        np.bitwise_or.at(masks, inv[pos:pos + len(s)], 1 << i)
        pos += len(s)
    pattern, cnt = np.unique(masks, return_counts=True)
    pattern = pattern.tolist()
    cnt = [int(c) for c in cnt]
    ways = [1 if p & 1 else 0 for p in pattern]
    total = sum(c * w for c, w in zip(cnt, ways))
    for i in range(1, m):
        ways = [(total - w) if (p >> i) & 1 else 0 for p, w in zip(pattern, ways)]
        total = sum(c * w for c, w in zip(cnt, ways))
    return total


def _record_slots(record: ConfigRecord):
    refs = set(record.ref.ref_blocks)
    return [(block, i in refs) for i, block in enumerate(record.config)]


def count_strategies(instance: Instance, record: ConfigRecord, threshold: float | None = None,
                     strict_adjacency: bool = False) -> int:
    """Strategies realizing ``record`` with every non-reference block at or below ``threshold``.

    Loose mode is the plain product of admissible-set sizes; strict mode also
    forbids the same topology in time-adjacent non-reference blocks.
    """
    if not np.isfinite(record.lf1):
        raise ValidationError("record has no feasible strategy (lf1 is infinite)")
    threshold = record.lf1 if threshold is None else threshold
    total = 1
    chain = []
    for block, is_ref in _record_slots(record):
        if is_ref:
            total *= chain_count(chain) if strict_adjacency else math.prod(len(c) for c in chain)
            chain = []
            continue
        chain.append(admissible_topologies(instance, block, record.d, threshold))
    total *= chain_count(chain) if strict_adjacency else math.prod(len(c) for c in chain)
    return total


def materialize_representative(instance: Instance, record: ConfigRecord) -> tuple:
    """One concrete strategy for ``record``: best topology per block, ties by id.

    A non-reference block that would repeat its predecessor's topology takes
    its next-best admissible topology instead.
    """
    if not np.isfinite(record.lf1):
        raise InfeasibleError("record has no feasible strategy")
    genes = []
    prev = None
    for block, is_ref in _record_slots(record):
        if is_ref:
            prev = instance.reference_id
            genes.extend([prev] * block.length)
            continue
        ids = admissible_topologies(instance, block, record.d, record.lf1)
        rows = instance.to_indices(ids)
        loads = instance.lf1[rows, block.t_s:block.t_e + 1].max(axis=1)
        order = sorted(range(len(ids)), key=lambda i: (loads[i], ids[i]))
        choice = next((ids[i] for i in order if ids[i] != prev), None)
        if choice is None:
            raise InfeasibleError(f"no admissible topology for block {tuple(block)} differs from {prev}")
        genes.extend([choice] * block.length)
        prev = choice
    return tuple(genes)


def _crt_sum(terms, modulus_bits: int) -> int:
    """Exact sum of signed row products, via residues modulo several primes.

    ``terms`` is a list of ``(sign, factors)`` with ``factors`` an int64 matrix
    of non-negative entries below 2**31; the result must be non-negative and
    below ``2**modulus_bits``.
    """
    k = max(1, -(-(modulus_bits + 1) // 30))
    if k > len(_PRIMES):
        raise OverflowError("count too large for the residue system")
    residues = []
    for p in _PRIMES[:k]:
        acc = 0
        for sign, factors in terms:
            if factors.shape[0] == 0:
                continue
            prod = np.ones(factors.shape[0], dtype=np.int64)
            for j in range(factors.shape[1]):
                prod = (prod * (factors[:, j] % p)) % p
            acc = (acc + sign * int(prod.sum() % p)) % p
        residues.append(acc)
    # Garner / plain CRT reconstruction
    total, modulus = 0, 1
    for p, r in zip(_PRIMES[:k], residues):
        t = ((r - total) * pow(modulus, -1, p)) % p
        total += modulus * t
        modulus *= p
    return total


class _FrontSolver:
    """Realized objective points of strategies within (d_max, s_max) bounds.

    A point is (exact depth, exact switches, non-reference steps, rounded lf1)
    of at least one strategy whose consecutive blocks differ, which is the
    same set an exhaustive enumeration produces.
    """

    def __init__(self, instance: Instance, d_max: int, s_max: int, table: BlockTable | None = None):
        _check_bounds(instance, d_max, s_max)
        self.instance = instance
        self.d_max, self.s_max = d_max, s_max
        self.table = table = table or BlockTable(instance, d_max)
        self.records = run_block_algorithm(instance, d_max, s_max, table)
        blocks, is_ref, l, n, _ = _enumerate_pairs(instance.t_max, s_max)
        self.l, self.n = l, n
        self.valid = blocks >= 0
        self.blocks = np.where(self.valid, blocks, 0)
        self.is_ref = is_ref
        self.nonref = self.valid & ~is_ref
        self.n_nonref = self.nonref.sum(axis=1)
        self.has_adj = (self.nonref[:, 1:] & self.nonref[:, :-1]).any(axis=1)
        self.ref_slot = np.where(is_ref, table.ref_r[self.blocks], -1)
        self.ref_max = self.ref_slot.max(axis=1)
        self.ref_row = instance.ref_index
        vals = [np.asarray(table.ref_r)]
        for k in range(1, table.d_max + 1):
            vals.append(table.keys[k] % table.stride)
        self.grid = np.unique(np.concatenate(vals))
        self._lb = {}
        key = l * (instance.t_max + 1) + n
        order = np.argsort(key, kind="stable")
        cut = np.flatnonzero(np.diff(key[order])) + 1
        self.groups = {int(key[g[0]]): g for g in np.split(order, cut)}

    # -- lower bounds --------------------------------------------------
    def lower_bound(self, d: int) -> np.ndarray:
        """Rounded lf1 below which no strategy of exact depth ``d`` exists, per pair."""
        if d not in self._lb:
            self._lb[d] = self._lower_bound(d)
        return self._lb[d]

    def _lower_bound(self, d: int) -> np.ndarray:
        t = self.table
        if d == 0:
            return np.where(self.n_nonref == 0, self.ref_max, _BIG)
        best = np.where(self.nonref, t.best_r[d][self.blocks], -1)
        lb = np.maximum(best.max(axis=1), self.ref_max)
        ex = np.where(self.nonref, t.exmin_r[d][self.blocks], _BIG).min(axis=1)
        return np.where(self.n_nonref > 0, np.maximum(lb, ex), _BIG)

    # -- realizability ---------------------------------------------------
    def realizable(self, idx: np.ndarray, d: int, v: int, any_only: bool = False) -> np.ndarray:
        """Per pair: some strict strategy has exact depth ``d`` and rounded lf1 ``v``.

        With ``any_only`` the scan stops at the first hit (the result is then
        only meaningful through ``.any()``).
        """
        t = self.table
        nr = self.nonref[idx]
        refv = (self.ref_slot[idx] == v).any(axis=1)
        ok = self.ref_max[idx] <= v
        if d == 0:
            return ok & (self.n_nonref[idx] == 0) & refv
        b = self.blocks[idx]
        c = t.count(b, d, v)
        c_d = t.count(b, d - 1, v)
        c_v = t.count(b, d, v - 1)
        c_dv = t.count(b, d - 1, v - 1)
        ok &= np.where(nr, c > 0, True).all(axis=1)
        e1 = nr & (c - c_d > 0)
        e2 = nr & (c - c_v > 0)
        e12 = nr & (c - c_d - c_v + c_dv > 0)
        s1, s2, s12 = e1.sum(axis=1), e2.sum(axis=1), (e1 & e2).sum(axis=1)
        apart = (s1 >= 1) & (s2 >= 1) & ~((s1 == 1) & (s2 == 1) & (s12 == 1))
        feasible = ok & (e12.any(axis=1) | apart | (refv & (s1 >= 1)))
        # with >= 3 candidates per block an adjacent clash can always be repaired
        tight = feasible & self.has_adj[idx] & (np.where(nr, c, _BIG) < 3).any(axis=1)
        if any_only and (feasible & ~tight).any():
            return feasible & ~tight
        for i in np.flatnonzero(tight):
            if self.realize(int(idx[i]), d, v) is None:
                feasible[i] = False
            elif any_only:
                return feasible
        return feasible

    def realize(self, p: int, d: int, v: int):
        """Min-lf1 strategy of pair ``p`` with exact depth ``d`` and rounded lf1 ``v``.

        Only the three best-loaded candidates per (depth class, hits-v) category
        are needed: any solution can be rewritten into them without raising its
        maximum, because a block only has to avoid its two neighbours.
        Returns ``(lf1, rows per slot)`` or None.
        """
        t = self.table
        slots = []
        for j in np.flatnonzero(self.valid[p]):
            b = int(self.blocks[p, j])
            if self.is_ref[p, j]:
                r = int(t.ref_r[b])
                if r > v:
                    return None
                slots.append([(self.ref_row, d == 0, r == v, float(t.ref_u[b]))])
                continue
            cands = {}
            for k in range(1, d + 1):
                for equal in (True, False):
                    for row in t.slice_exact(b, k, v, equal).tolist():
                        cands[row] = (k == d, equal)
            if not cands:
                return None
            rows = list(cands)
            loads = t.block_max(b, rows)
            slots.append([(row, *cands[row], float(u)) for row, u in zip(rows, loads)])

        states = {(False, False, -1): (-math.inf, None)}
        history = []
        for cands in slots:
            nxt = {}
            for (fd, fv, last), (cost, _) in states.items():
                for row, cd, cv, u in cands:
                    if row == last:
                        continue
                    key = (fd or cd, fv or cv, row)
                    c = max(cost, u)
                    if key not in nxt or c < nxt[key][0]:
                        nxt[key] = (c, (fd, fv, last))
            history.append(nxt)
            states = nxt
        finals = [(c, key) for key, (c, _) in states.items() if key[0] and key[1]]
        if not finals:
            return None
        cost, key = min(finals, key=lambda x: x[0])
        rows = []
        for layer in reversed(history):
            rows.append(key[2])
            key = layer[key][1]
        return cost, rows[::-1]

    # -- counting --------------------------------------------------------
    def _factors(self, idx, d: int, v: int) -> np.ndarray:
        b = self.blocks[idx]
        nonref = np.where(self.nonref[idx], self.table.count(b, d, v), 1)
        ref = np.where(self.is_ref[idx], (self.ref_slot[idx] <= v).astype(np.int64), 1)
        return nonref * ref

    def count_loose(self, idx, d: int, v: int) -> int:
        terms = []
        for dd, vv, sign in ((d, v, 1), (d - 1, v, -1), (d, v - 1, -1), (d - 1, v - 1, 1)):
            if dd < 0:
                continue
            f = self._factors(idx, dd, vv)
            if dd == 0:
                # only the all-reference strategy has depth 0
                f = f[self.n_nonref[idx] == 0]
            terms.append((sign, f))
        maxc = max([int(f.max()) for _, f in terms if f.size] + [1])
        bits = (self.s_max + 1) * maxc.bit_length() + max(1, len(idx)).bit_length() + 3
        return _crt_sum(terms, bits)

    def _strict_n(self, p: int, d: int, v: int) -> int:
        if d < 0:
            return 0
        t = self.table
        total, chain = 1, []
        for j in np.flatnonzero(self.valid[p]):
            b = int(self.blocks[p, j])
            if self.is_ref[p, j]:
                if t.ref_r[b] > v:
                    return 0
                total *= chain_count(chain)
                chain = []
            else:
                chain.append(t.candidates(b, d, v))
        return total * chain_count(chain)

    def count_strict(self, idx, d: int, v: int) -> int:
        simple = idx[~self.has_adj[idx]]
        total = self.count_loose(simple, d, v) if len(simple) else 0
        for p in idx[self.has_adj[idx]].tolist():
            total += (self._strict_n(p, d, v) - self._strict_n(p, d - 1, v)
                      - self._strict_n(p, d, v - 1) + self._strict_n(p, d - 1, v - 1))
        return total

    # -- fronts ----------------------------------------------------------
    def candidate_points(self, k_max: int) -> list:
        """Up to ``k_max`` smallest realized rounded values per (d, l, n)."""
        groups = list(self.groups.values())
        points = []
        for d in range(self.d_max + 1):
            lb = self.lower_bound(d)
            for g in groups:
                lg = lb[g]
                srt = np.argsort(lg, kind="stable")
                g_sorted, l_sorted = g[srt], lg[srt]
                if l_sorted[0] >= _BIG:
                    continue
                found = []
                for v in self.grid[np.searchsorted(self.grid, l_sorted[0]):].tolist():
                    m = np.searchsorted(l_sorted, v, "right")
                    if self.realizable(g_sorted[:m], d, v, any_only=True).any():
                        found.append(v)
                        if len(found) == k_max:
                            break
                l0, n0 = int(self.l[g[0]]), int(self.n[g[0]])
                points.extend((d, l0, n0, v) for v in found)
        return points

    def pairs_for(self, d: int, l: int, n: int, v: int) -> np.ndarray:
        g = self.groups.get(l * (self.instance.t_max + 1) + n, np.zeros(0, dtype=np.int64))
        return g[self.lower_bound(d)[g] <= v]

    def representative(self, idx, d: int, v: int):
        """Lowest-lf1 strategy over the given pairs; canonical order breaks ties."""
        lb = self.min_load_bound(idx, d, v)
        order = np.argsort(lb, kind="stable")
        best = None
        for i in order.tolist():
            if best is not None and lb[i] >= best[0]:
                break
            found = self.realize(int(idx[i]), d, v)
            if found is not None and (best is None or found[0] < best[0]):
                best = (found[0], int(idx[i]), found[1])
        return best

    def min_load_bound(self, idx, d: int, v: int) -> np.ndarray:
        """Per pair, a lower bound on the unrounded lf1 of its (d, v) strategies.

        Every block contributes at least its best admissible load, and the
        block attaining the maximum must round to ``v``.
        """
        t = self.table
        b = self.blocks[idx]
        nr, rf = self.nonref[idx], self.is_ref[idx]
        floor = np.where(rf, t.ref_u[b], np.where(nr, t.best_u[min(d, t.d_max)][b], -np.inf)).max(axis=1)
        eq_ref = np.where(rf & (t.ref_r[b] == v), t.ref_u[b], np.inf)
        eq_nr = np.where(nr, t.first_equal_load(b, d, v), np.inf)
        hit = np.minimum(eq_ref, eq_nr).min(axis=1)
        return np.maximum(floor, hit)

    def strategy(self, p: int, rows) -> tuple:
        genes = []
        for j, row in zip(np.flatnonzero(self.valid[p]), rows):
            b = int(self.blocks[p, j])
            length = int(self.table.te[b] - self.table.ts[b] + 1)
            genes.extend([int(self.instance.topology_ids[row])] * length)
        return tuple(genes)


def exact_fronts(instance: Instance, d_max: int, s_max: int, k_max: int = 1,
                 strict_adjacency: bool = False, table: BlockTable | None = None) -> ExactResult:
    """Dominance fronts 1..k_max of all strategies within the depth and switch bounds.

    Each entry carries the number of strategies mapping to its rounded point
    (loose: plain Cartesian products; strict: distinct strategies) and
    one representative with the lowest unrounded lf1.
    """
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    solver = _FrontSolver(instance, d_max, s_max, table)
    records = solver.records
    fronts_pts = rank_fronts(solver.candidate_points(k_max), k_max)
    fronts = []
    for rank, pts in enumerate(fronts_pts, start=1):
        entries = []
        for d, l, n, v in sorted(pts):
            idx = solver.pairs_for(d, l, n, v)
            if strict_adjacency:
                count = solver.count_strict(idx, d, v)
            else:
                count = solver.count_loose(idx, d, v)
            best = solver.representative(idx, d, v)
            lf1, p, rows = best
            entries.append(ExactFrontEntry(rank, d, l, n, lf1, v / 10, count, solver.strategy(p, rows)))
        entries.sort(key=lambda e: (e.depth, e.switches, e.non_ref, e.lf1_rounded))
        fronts.append(entries)
    status = "ok" if fronts else "infeasible"
    lf1_range = records.feasible_lf1_range() if np.isfinite(records.lf1).any() else (math.inf, -math.inf)
    return ExactResult(fronts, records.eval_count, status, strict_adjacency, lf1_range,
                       (d_max, s_max, instance.t_max))
