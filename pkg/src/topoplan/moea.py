"""NSGA-III search over directly encoded topology strategies.

A chromosome is the strategy itself: gene ``t`` is the topology at step ``t``
(stored internally as a row index into the instance).  Crossover and mutation
only ever place a topology at a step where it is available, so every
individual is feasible by construction.  The depth and switch bounds shared
with the exact solver are handled by constraint-domination: in-bounds
individuals always rank ahead of out-of-bounds ones.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations

import numpy as np

from .dataset import Instance
from .errors import InitializationError, ValidationError
from .objectives import evaluate_indices


@dataclass(frozen=True)
class MoeaConfig:
    l_bar: int = 30
    d_bar: int = 30
    d_max: int = 3
    s_max: int = 5
    p_m: float = 0.1
    p_c: float | None = None  # defaults to 1 - p_m
    k_crossover: int = 2
    n_reference_directions: int = 100
    generations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.p_c is None:
            object.__setattr__(self, "p_c", 1.0 - self.p_m)
        if self.l_bar < 0 or self.d_bar < 0:
            raise ValidationError("l_bar and d_bar must be non-negative")
        if not (0.0 <= self.p_m <= 1.0 and 0.0 <= self.p_c <= 1.0):
            raise ValidationError("p_m and p_c must be probabilities")
        if self.k_crossover < 1:
            raise ValidationError("k_crossover must be >= 1")
        if self.generations < 0:
            raise ValidationError("generations must be >= 0")
        if self.d_max < 0 or self.s_max < 0:
            raise ValidationError("bounds must be non-negative")

    def population_size(self, t_max: int) -> int:
        return t_max * self.l_bar + self.d_max * self.d_bar + 1


# Named configurations: mutation rate x population scale.
SCALES = {"S": 30, "M": 45, "L": 60}
MUTATION_RATES = {"05": 0.05, "10": 0.10, "15": 0.15, "20": 0.20}


def named_config(name: str, **overrides) -> MoeaConfig:
    """``pm10-L`` style configuration: p_m = 0.10, l_bar = d_bar = 60."""
    try:
        pm, scale = name.split("-")
        p_m = MUTATION_RATES[pm.removeprefix("pm")]
        size = SCALES[scale]
    except (ValueError, KeyError):
        raise ValidationError(f"unknown configuration {name!r}") from None
    if not pm.startswith("pm"):
        raise ValidationError(f"unknown configuration {name!r}")
    return MoeaConfig(l_bar=size, d_bar=size, p_m=p_m, **overrides)


@dataclass
class Population:
    """Strategies as row-index matrix plus their cached objective matrix."""

    instance: Instance
    rows: np.ndarray
    objectives: np.ndarray

    @classmethod
    def from_rows(cls, instance: Instance, rows) -> "Population":
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, instance.t_max)
        return cls(instance, rows, evaluate_indices(instance, rows))

    def __len__(self):
        return len(self.rows)

    def strategies(self) -> list:
        ids = self.instance.topology_ids
        return [tuple(int(g) for g in ids[r]) for r in self.rows]

    def subset(self, idx) -> "Population":
        return Population(self.instance, self.rows[idx], self.objectives[idx])

    def feasible(self) -> np.ndarray:
        """Per member: every gene available at its step."""
        return self.instance.available_mask[self.rows, np.arange(self.instance.t_max)].all(axis=1)


# ---------------------------------------------------------------------------
# Initialization

class _BlockSampler:
    """Uniform draws from the topologies available throughout a block."""

    def __init__(self, instance: Instance):
        self.instance = instance
        gaps = (~instance.available_mask).astype(np.int32)
        self._cum = np.hstack([np.zeros((instance.n_topologies, 1), dtype=np.int32), np.cumsum(gaps, axis=1)])
        self._cache = {}

    def members(self, t_s: int, t_e: int, d_cap: int | None) -> np.ndarray:
        key = (t_s, t_e, d_cap)
        if key not in self._cache:
            ok = self._cum[:, t_e + 1] == self._cum[:, t_s]
            if d_cap is not None:
                ok &= self.instance.depths <= d_cap
            self._cache[key] = np.flatnonzero(ok).astype(np.int32)
        return self._cache[key]

    def strategy(self, cuts, rng, d_cap=None):
        """One strategy with blocks split at ``cuts``; None if a block has no choice."""
        t_max = self.instance.t_max
        starts = [0, *cuts]
        ends = [c - 1 for c in cuts] + [t_max - 1]
        genes = np.empty(t_max, dtype=np.int64)
        prev = -1
        for s, e in zip(starts, ends):
            pool = self.members(s, e, d_cap)
            n = len(pool) - (1 if prev >= 0 and _contains(pool, prev) else 0)
            if n <= 0:
                return None
            pick = int(rng.integers(n))
            if n < len(pool) and pick >= int(np.searchsorted(pool, prev)):
                pick += 1  # skip over the previous block's topology
            g = int(pool[pick])
            genes[s:e + 1] = g
            prev = g
        return genes


def _contains(sorted_arr, x) -> bool:
    i = int(np.searchsorted(sorted_arr, x))
    return i < len(sorted_arr) and sorted_arr[i] == x


def _random_cuts(t_max: int, l: int, rng) -> list:
    if l == 0:
        return []
    return sorted(int(c) for c in rng.choice(np.arange(1, t_max), size=l, replace=False))


def init_population(instance: Instance, config: MoeaConfig, rng=None) -> Population:
    """Structure-guided initial population.

    ``l_bar`` strategies for every exact switch count 0..t_max-1, ``d_bar``
    strategies with exact maximum depth d for every d in 1..d_max (switch
    count drawn within s_max), plus the all-reference strategy.
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    t_max = instance.t_max
    if config.d_max > instance.max_depth:
        raise ValidationError(f"d_max={config.d_max} exceeds the instance depth {instance.max_depth}")
    sampler = _BlockSampler(instance)
    members = []

    for l in range(t_max):
        budget = 100 * max(config.l_bar, 1)
        got = 0
        while got < config.l_bar:
            if budget == 0:
                raise InitializationError(f"switch stratum l={l}: resample budget exhausted")
            budget -= 1
            genes = sampler.strategy(_random_cuts(t_max, l, rng), rng)
            if genes is not None:
                members.append(genes)
                got += 1

    s_cap = min(config.s_max, t_max - 1)
    for d in range(1, config.d_max + 1):
        if not np.any(instance.depths == d):
            if config.d_bar:
                raise InitializationError(f"depth stratum d={d}: no topology of that depth")
            continue
        budget = 100 * max(config.d_bar, 1)
        got = 0
        while got < config.d_bar:
            if budget == 0:
                raise InitializationError(f"depth stratum d={d}: resample budget exhausted")
            budget -= 1
            l = int(rng.integers(s_cap + 1))
            genes = sampler.strategy(_random_cuts(t_max, l, rng), rng, d_cap=d)
            if genes is not None and instance.depths[genes].max() == d:
                members.append(genes)
                got += 1

    members.append(np.full(t_max, instance.ref_index, dtype=np.int64))
    return Population.from_rows(instance, np.vstack(members))


# ---------------------------------------------------------------------------
# Variation

def _crossover_rows(a: np.ndarray, b: np.ndarray, k: int, rng):
    length = a.shape[-1]
    if not 1 <= k < length:
        raise ValidationError(f"k must be in 1..{length - 1}, got {k}")
    cuts = rng.choice(np.arange(1, length), size=k, replace=False)
    flip = np.zeros(length, dtype=np.int64)
    flip[cuts] = 1
    from_b = (np.cumsum(flip) % 2).astype(bool)
    return np.where(from_b, b, a), np.where(from_b, a, b)


def crossover_kpoint(a, b, k: int, rng) -> tuple:
    """k-point crossover: offspring alternate parent segments between k distinct cuts."""
    if len(a) != len(b):
        raise ValidationError("parents differ in length")
    x, y = _crossover_rows(np.asarray(a), np.asarray(b), k, rng)
    return tuple(x.tolist()), tuple(y.tolist())


def _mutate_rows(instance: Instance, rows: np.ndarray, p_m: float, rng):
    """Random reset in place on a copy; returns (rows, reset mask)."""
    rows = rows.copy()
    mask = rng.random(rows.shape) < p_m
    for t in range(instance.t_max):
        hit = np.flatnonzero(mask[:, t])
        if len(hit):
            pool = instance.available_indices[t]
            rows[hit, t] = pool[rng.integers(len(pool), size=len(hit))]
    return rows, mask


def mutate_random_reset(instance: Instance, s, p_m: float, rng) -> tuple:
    """Each gene is, with probability ``p_m``, redrawn uniformly from G_t."""
    rows = instance.to_indices(s)[None, :]
    out, _ = _mutate_rows(instance, rows, p_m, rng)
    return instance.to_ids(out[0])


# ---------------------------------------------------------------------------
# Reference directions

def _das_dennis(h: int, dim: int) -> np.ndarray:
    pts = []
    for bars in combinations(range(h + dim - 1), dim - 1):
        edges = (-1, *bars, h + dim - 1)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(dim)])
    return np.asarray(pts, dtype=np.float64) / h


def _project_simplex(x: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    n, dim = x.shape
    u = -np.sort(-x, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, dim + 1)
    cond = u - css / ind > 0
    rho = dim - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho] / (rho + 1)
    return np.maximum(x - theta[:, None], 0.0)


def _riesz(x: np.ndarray, s: float):
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    inv = dist ** -s
    energy = inv.sum() / 2
    grad = -s * ((inv / dist ** 2)[:, :, None] * diff).sum(axis=1)
    return energy, grad


@lru_cache(maxsize=16)
def _reference_directions(n: int, dim: int, seed: int) -> np.ndarray:
    if dim == 1:
        return np.ones((n, 1))
    h = 1
    while math.comb(h + dim, dim - 1) <= n:
        h += 1
    x = _das_dennis(h, dim)
    if len(x) < n:
        rng = np.random.default_rng(seed)
        x = np.vstack([x, rng.dirichlet(np.ones(dim), size=n - len(x))])
    if n == 1:
        return np.full((1, dim), 1.0 / dim)
    s = 2.0 * dim
    energy, grad = _riesz(x, s)
    step = 1e-3
    for _ in range(1000):
        g = grad / (np.abs(grad).max() + 1e-300)
        trial = _project_simplex(x - step * g)
        e_new, g_new = _riesz(trial, s)
        if not e_new < energy:
            step /= 2
            if step < 1e-12:
                break
            continue
        gain = (energy - e_new) / energy
        x, energy, grad = trial, e_new, g_new
        step *= 1.2
        if gain < 1e-8:
            break
    x = x / x.sum(axis=1, keepdims=True)
    x.setflags(write=False)
    return x


def generate_reference_directions(n: int, dim: int = 4, seed: int = 0) -> np.ndarray:
    """``n`` well-spread points on the unit simplex by Riesz s-energy descent.

    Starts from the densest simplex lattice that fits, tops it up with seeded
    random points, then lowers the s-energy (s = 2 dim) by projected gradient
    steps until the relative decrease drops below 1e-8 or 1000 iterations.
    """
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    if n < dim:
        raise ValidationError(f"need at least dim={dim} directions, got {n}")
    return _reference_directions(int(n), int(dim), int(seed)).copy()


# ---------------------------------------------------------------------------
# Selection

def bound_violation(objectives: np.ndarray, d_max: int, s_max: int) -> np.ndarray:
    return (np.maximum(objectives[:, 1] - d_max, 0) + np.maximum(objectives[:, 2] - s_max, 0))


def _dominance_matrix(f: np.ndarray) -> np.ndarray:
    """``D[i, j]``: member i dominates member j."""
    n = len(f)
    out = np.zeros((n, n), dtype=bool)
    chunk = max(1, 2_000_000 // max(n, 1))
    for lo in range(0, n, chunk):
        p = f[lo:lo + chunk]
        le = (p[:, None, :] <= f[None, :, :]).all(axis=2)
        lt = (p[:, None, :] < f[None, :, :]).any(axis=2)
        out[lo:lo + chunk] = le & lt
    return out


def constrained_ranks(objectives: np.ndarray, violation: np.ndarray | None = None, stop_at=None) -> np.ndarray:
    """1-based front rank under constraint-domination.

    In-bounds members are sorted by Pareto dominance; out-of-bounds members
    follow, one front per distinct violation level.  With ``stop_at`` sorting
    stops once that many members are ranked; the rest get a large rank.
    """
    f = np.asarray(objectives, dtype=np.float64)
    n = len(f)
    viol = np.zeros(n) if violation is None else np.asarray(violation, dtype=np.float64)
    ranks = np.full(n, np.iinfo(np.int64).max // 2, dtype=np.int64)
    ok = np.flatnonzero(viol <= 0)
    rank = 0
    placed = 0
    if len(ok):
        dom = _dominance_matrix(f[ok])
        count = dom.sum(axis=0)
        alive = np.ones(len(ok), dtype=bool)
        while alive.any() and (stop_at is None or placed < stop_at):
            rank += 1
            front = np.flatnonzero(alive & (count == 0))
            ranks[ok[front]] = rank
            alive[front] = False
            placed += len(front)
            count = count - dom[front].sum(axis=0)
    bad = np.flatnonzero(viol > 0)
    for level in np.unique(viol[bad]):
        if stop_at is not None and placed >= stop_at:
            break
        rank += 1
        members = bad[viol[bad] == level]
        ranks[members] = rank
        placed += len(members)
    return ranks


def _normalize(f: np.ndarray, ideal: np.ndarray) -> np.ndarray:
    fp = f - ideal
    dim = f.shape[1]
    weights = np.full((dim, dim), 1e-6) + np.eye(dim) * (1 - 1e-6)
    asf = (fp[None, :, :] / weights[:, None, :]).max(axis=2)
    extreme = fp[asf.argmin(axis=1)]
    intercepts = None
    try:
        b = np.linalg.solve(extreme, np.ones(dim))
        with np.errstate(divide="ignore"):
            a = 1.0 / b
        if np.all(np.isfinite(a)) and np.all(a > 1e-10):
            intercepts = a
    except np.linalg.LinAlgError:
        pass
    if intercepts is None:
        intercepts = fp.max(axis=0)
    intercepts = np.where(intercepts > 1e-10, intercepts, 1.0)
    return fp / intercepts


def _associate(fn: np.ndarray, dirs: np.ndarray):
    unit = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    proj = fn @ unit.T
    dist2 = np.maximum((fn ** 2).sum(axis=1)[:, None] - proj ** 2, 0.0)
    nearest = dist2.argmin(axis=1)
    return nearest, np.sqrt(dist2[np.arange(len(fn)), nearest])


def _select_indices(f: np.ndarray, viol: np.ndarray, target: int, dirs: np.ndarray, rng):
    n = len(f)
    if target <= 0:
        raise ValidationError("target_size must be positive")
    if target >= n:
        return np.arange(n), constrained_ranks(f, viol)
    ranks = constrained_ranks(f, viol, stop_at=target)
    order = np.argsort(ranks, kind="stable")
    sorted_ranks = ranks[order]
    # last front that is admitted (possibly in part)
    last = sorted_ranks[target - 1]
    chosen = order[sorted_ranks < last]
    split = order[sorted_ranks == last]
    k = target - len(chosen)
    if k == len(split):
        return np.concatenate([chosen, split]), ranks
    pool = np.concatenate([chosen, split])
    fn = _normalize(f[pool], f[pool].min(axis=0))
    nearest, dist = _associate(fn, dirs)
    niche = np.bincount(nearest[:len(chosen)], minlength=len(dirs)).astype(np.int64)
    cand_dir = nearest[len(chosen):]
    cand_dist = dist[len(chosen):]
    taken = np.zeros(len(split), dtype=bool)
    active = np.ones(len(dirs), dtype=bool)
    picks = []
    while len(picks) < k:
        counts = np.where(active, niche, np.iinfo(np.int64).max)
        lowest = np.flatnonzero(counts == counts.min())
        j = int(rng.choice(lowest))
        members = np.flatnonzero((cand_dir == j) & ~taken)
        if len(members) == 0:
            active[j] = False
            continue
        if niche[j] == 0:
            m = int(members[np.argmin(cand_dist[members])])
        else:
            m = int(rng.choice(members))
        taken[m] = True
        picks.append(m)
        niche[j] += 1
    return np.concatenate([chosen, split[np.array(picks, dtype=np.int64)]]), ranks


def nsga3_select(candidates: Population, target_size: int, dirs, rng, d_max: int | None = None,
                 s_max: int | None = None) -> Population:
    """Environmental selection: whole fronts while they fit, niching on the split front."""
    f = candidates.objectives
    viol = np.zeros(len(f)) if d_max is None else bound_violation(f, d_max, s_max if s_max is not None else np.inf)
    idx, _ = _select_indices(f, viol, target_size, np.asarray(dirs, dtype=np.float64), rng)
    return candidates.subset(np.sort(idx))


# ---------------------------------------------------------------------------
# Main loop

@dataclass
class RunTrace:
    """Per-generation in-bounds nondominated points (entry 0 is the initial
    population) plus the final population of one or more seeds."""

    fronts: list
    final_rows: np.ndarray
    final_objectives: np.ndarray
    seeds: tuple = ()
    config: MoeaConfig | None = None

    def __len__(self):
        return len(self.fronts)


def _front_points(objectives: np.ndarray, d_max: int, s_max: int) -> np.ndarray:
    ok = bound_violation(objectives, d_max, s_max) <= 0
    pts = np.unique(objectives[ok], axis=0)
    if len(pts) == 0:
        return pts.reshape(0, 4)
    dom = _dominance_matrix(pts)
    return pts[~dom.any(axis=0)]


def _tournament(ranks: np.ndarray, n: int, rng) -> np.ndarray:
    a = rng.integers(len(ranks), size=n)
    b = rng.integers(len(ranks), size=n)
    coin = rng.random(n) < 0.5
    pick_a = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & coin)
    return np.where(pick_a, a, b)


def run_moea(instance: Instance, config: MoeaConfig, on_generation=None) -> RunTrace:
    """One seeded run; every random draw comes from ``config.seed``."""
    t_max = instance.t_max
    if config.k_crossover >= t_max and config.p_c > 0 and t_max > 1:
        raise ValidationError(f"k_crossover must be below t_max={t_max}")
    rng = np.random.default_rng(config.seed)
    dirs = generate_reference_directions(config.n_reference_directions, 4)
    pop = init_population(instance, config, rng)
    size = len(pop)
    fronts = [_front_points(pop.objectives, config.d_max, config.s_max)]
    ranks = constrained_ranks(pop.objectives, bound_violation(pop.objectives, config.d_max, config.s_max))
    for gen in range(config.generations):
        parents = pop.rows[_tournament(ranks, size + size % 2, rng)]
        a, b = parents[0::2], parents[1::2]
        kids_a, kids_b = a.copy(), b.copy()
        if t_max > 1:
            cross = np.flatnonzero(rng.random(len(a)) < config.p_c)
            for i in cross.tolist():
                kids_a[i], kids_b[i] = _crossover_rows(a[i], b[i], config.k_crossover, rng)
        kids = np.vstack([kids_a, kids_b])[:size]
        kids, _ = _mutate_rows(instance, kids, config.p_m, rng)
        merged = Population(instance, np.vstack([pop.rows, kids]),
                            np.vstack([pop.objectives, evaluate_indices(instance, kids)]))
        viol = bound_violation(merged.objectives, config.d_max, config.s_max)
        idx, all_ranks = _select_indices(merged.objectives, viol, size, dirs, rng)
        idx = np.sort(idx)
        pop = merged.subset(idx)
        ranks = all_ranks[idx]
        fronts.append(_front_points(pop.objectives, config.d_max, config.s_max))
        if on_generation is not None:
            on_generation(gen + 1, pop)
    return RunTrace(fronts, pop.rows, pop.objectives, (config.seed,), config)


def combine_seeds(traces: list) -> list:
    """Per generation, the unique nondominated points over all seeds."""
    if not traces:
        raise ValidationError("no traces to combine")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValidationError(f"traces have different generation counts: {sorted(lengths)}")
    out = []
    for r in range(lengths.pop()):
        pts = np.vstack([t.fronts[r] for t in traces]).reshape(-1, 4)
        if len(pts) == 0:
            out.append(pts)
            continue
        pts = np.unique(pts, axis=0)
        out.append(pts[~_dominance_matrix(pts).any(axis=0)])
    return out


def merge_traces(traces: list) -> RunTrace:
    """Single trace holding the combined fronts and all final populations."""
    fronts = combine_seeds(traces)
    rows = np.vstack([t.final_rows for t in traces])
    objs = np.vstack([t.final_objectives for t in traces])
    seeds = tuple(s for t in traces for s in t.seeds)
    return RunTrace(fronts, rows, objs, seeds, traces[0].config)


def worker_count(requested: int | None = None) -> int:
    """Workers allowed by ``TOPOPLAN_THREADS`` (0 or unset = all CPUs)."""
    env = os.environ.get("TOPOPLAN_THREADS", "0")
    try:
        cap = int(env)
    except ValueError:
        raise ValidationError(f"TOPOPLAN_THREADS must be an integer, got {env!r}") from None
    cap = cap if cap > 0 else (os.cpu_count() or 1)
    return max(1, min(cap, requested or cap))


def _run_one(args):
    instance, config = args
    return run_moea(instance, config)


def run_seeds(instance: Instance, config: MoeaConfig, seeds, workers: int | None = None) -> list:
    """Independent runs, one per seed, in seed order; parallel across processes."""
    jobs = [(instance, replace(config, seed=int(s))) for s in seeds]
    n = min(worker_count(workers), len(jobs))
    if n <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_one, jobs))


def representatives(trace: RunTrace, points: np.ndarray) -> list:
    """A final-population member (as row indices) for each given objective point."""
    out = []
    for p in np.asarray(points).reshape(-1, 4):
        hit = np.flatnonzero((trace.final_objectives == p).all(axis=1))
        out.append(trace.final_rows[hit[0]] if len(hit) else None)
    return out
