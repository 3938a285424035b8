import itertools

import numpy as np
import pytest

from topoplan.dataset import GeneratorConfig, Instance, generate_instance
from topoplan.errors import InitializationError, ValidationError
from topoplan.moea import (
    MoeaConfig,
    Population,
    combine_seeds,
    constrained_ranks,
    crossover_kpoint,
    generate_reference_directions,
    init_population,
    merge_traces,
    mutate_random_reset,
    named_config,
    nsga3_select,
    run_moea,
    run_seeds,
    worker_count,
)
from topoplan.objectives import dominates, evaluate, rank_fronts

from conftest import small_instance


@pytest.fixture(scope="module")
def day():
    return generate_instance(GeneratorConfig(t_max=24, count_per_depth={1: 6, 2: 8, 3: 8}, seed=11))


def test_config_coupling_and_size():
    cfg = MoeaConfig(p_m=0.15)
    assert cfg.p_c == pytest.approx(0.85)
    assert cfg.population_size(24) == 811


@pytest.mark.parametrize("name, size, p_m", [("pm10-L", 1621, 0.10), ("pm05-S", 811, 0.05), ("pm20-M", 1216, 0.2)])
def test_named_configs(name, size, p_m):
    cfg = named_config(name)
    assert cfg.population_size(24) == size
    assert cfg.p_m == p_m and cfg.p_c == pytest.approx(1 - p_m)


@pytest.mark.parametrize("name", ["pm11-S", "pm10-X", "foo", "10-S"])
def test_named_config_unknown(name):
    with pytest.raises(ValidationError):
        named_config(name)


def test_config_validation():
    with pytest.raises(ValidationError):
        MoeaConfig(p_m=1.5)
    with pytest.raises(ValidationError):
        MoeaConfig(k_crossover=0)


@pytest.mark.parametrize("scale, size", [(30, 811), (45, 1216), (60, 1621)])
def test_init_population_scale_sizes(day, scale, size):
    pop = init_population(day, MoeaConfig(l_bar=scale, d_bar=scale, seed=2))
    assert len(pop) == size
    assert pop.feasible().all()


def test_init_population_strata(day):
    cfg = MoeaConfig(l_bar=3, d_bar=4, d_max=3, s_max=5, seed=0)
    pop = init_population(day, cfg)
    switches = pop.objectives[:, 2]
    depths = pop.objectives[:, 1]
    for l in range(day.t_max):
        assert (switches[l * 3:(l + 1) * 3] == l).all()
    base = day.t_max * 3
    for d in range(1, 4):
        block = slice(base + (d - 1) * 4, base + d * 4)
        assert (depths[block] == d).all()
        assert (switches[block] <= 5).all()
    assert pop.strategies()[-1] == (day.reference_id,) * day.t_max


def test_init_population_tiny():
    inst = generate_instance(GeneratorConfig(t_max=2, count_per_depth={1: 2}, seed=0, availability_drop_rate=0))
    pop = init_population(inst, MoeaConfig(l_bar=1, d_bar=1, d_max=1, s_max=1))
    assert len(pop) == 4 and pop.feasible().all()


def test_init_population_deterministic(day):
    cfg = MoeaConfig(l_bar=2, d_bar=2, seed=9)
    assert np.array_equal(init_population(day, cfg).rows, init_population(day, cfg).rows)


def test_init_population_missing_depth():
    inst = generate_instance(GeneratorConfig(t_max=4, count_per_depth={1: 3}, seed=0))
    with pytest.raises(ValidationError):
        init_population(inst, MoeaConfig(l_bar=1, d_bar=1, d_max=2))


def test_init_population_budget_exhausted():
    # only the reference exists at t=2,3, so no strategy switches at both t=2 and t=3
    lf1 = np.full((2, 4), 90.0)
    lf1[1, 2:] = np.nan
    inst = Instance(4, [0, 1], [0, 1], lf1, 0)
    with pytest.raises(InitializationError, match="l=3"):
        init_population(inst, MoeaConfig(l_bar=1, d_bar=1, d_max=1))


def test_crossover_examples():
    rng = np.random.default_rng(0)
    a = (1, 2, 3, 4, 5)
    assert crossover_kpoint(a, a, 2, rng) == (a, a)
    x, y = crossover_kpoint((0,) * 5, (1,) * 5, 4, rng)
    assert x == (0, 1, 0, 1, 0) and y == (1, 0, 1, 0, 1)


def test_crossover_preserves_genes_and_feasibility(seed1):
    rng = np.random.default_rng(1)
    pool = [seed1.available(t).tolist() for t in range(seed1.t_max)]
    for _ in range(10_000 // 10):
        a = tuple(int(rng.choice(p)) for p in pool)
        b = tuple(int(rng.choice(p)) for p in pool)
        x, y = crossover_kpoint(a, b, 2, rng)
        for t in range(seed1.t_max):
            assert {x[t], y[t]} == {a[t], b[t]}
            assert x[t] in pool[t] and y[t] in pool[t]


def test_crossover_rejects_bad_k():
    with pytest.raises(ValidationError):
        crossover_kpoint((1, 2), (2, 1), 2, np.random.default_rng(0))


def test_mutation_examples(seed1):
    rng = np.random.default_rng(0)
    s = tuple(int(seed1.available(t)[0]) for t in range(seed1.t_max))
    assert mutate_random_reset(seed1, s, 0.0, rng) == s
    single = Instance(3, [0], [0], [[90.0, 91.0, 92.0]], 0)
    assert mutate_random_reset(single, (0, 0, 0), 1.0, rng) == (0, 0, 0)


def test_mutation_feasible_and_uniform(seed1):
    rng = np.random.default_rng(4)
    s = (seed1.reference_id,) * seed1.t_max
    seen = {t: set() for t in range(seed1.t_max)}
    for _ in range(2000):
        out = mutate_random_reset(seed1, s, 1.0, rng)
        for t, g in enumerate(out):
            assert g in seed1.available(t)
            seen[t].add(g)
    for t in range(seed1.t_max):
        assert seen[t] == set(seed1.available(t).tolist())


def test_reference_directions_on_simplex():
    dirs = generate_reference_directions(100, 4)
    assert dirs.shape == (100, 4)
    assert (dirs >= 0).all()
    assert np.abs(dirs.sum(axis=1) - 1).max() < 1e-9


def test_reference_directions_vertices():
    dirs = generate_reference_directions(4, 4)
    for vertex in np.eye(4):
        assert np.abs(dirs - vertex).max(axis=1).min() < 0.05


def min_pairwise(x):
    d = np.linalg.norm(x[:, None] - x[None], axis=2)
    return d[np.triu_indices(len(x), 1)].min()


def test_reference_directions_spread_beats_random():
    dirs = generate_reference_directions(30, 4)
    rng = np.random.default_rng(0)
    best_random = max(min_pairwise(rng.dirichlet(np.ones(4), size=30)) for _ in range(20))
    assert min_pairwise(dirs) > best_random


def test_reference_directions_dim1_and_errors():
    assert (generate_reference_directions(5, 1) == 1.0).all()
    with pytest.raises(ValidationError):
        generate_reference_directions(3, 4)


def test_reference_directions_deterministic():
    assert np.array_equal(generate_reference_directions(37, 4, seed=3), generate_reference_directions(37, 4, seed=3))


def test_constrained_ranks_bounds():
    f = np.array([[90, 1, 1, 2], [80, 3, 6, 4], [70, 4, 7, 5], [95, 0, 0, 0]], dtype=float)
    viol = np.array([0, 1, 3, 0])
    ranks = constrained_ranks(f, viol)
    assert ranks.tolist() == [1, 2, 3, 1]


def test_constrained_ranks_vs_rank_fronts():
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = rng.integers(0, 5, size=(40, 4)).astype(float)
        ranks = constrained_ranks(f)
        fronts = rank_fronts([tuple(r) for r in f], 100)
        for i, row in enumerate(f):
            assert tuple(row) in fronts[ranks[i] - 1]


def population(inst, objs):
    objs = np.asarray(objs, dtype=float)
    rows = np.zeros((len(objs), inst.t_max), dtype=np.int64)
    return Population(inst, rows, objs)


def test_nsga3_identity_when_sizes_match(seed1):
    objs = [[80, 0, 1, 2], [70, 1, 0, 3], [60, 2, 2, 0]]
    out = nsga3_select(population(seed1, objs), 3, generate_reference_directions(10, 4), np.random.default_rng(0))
    assert sorted(map(tuple, out.objectives)) == sorted(map(tuple, np.array(objs, dtype=float)))


def test_nsga3_keeps_dominating_member(seed1):
    rng = np.random.default_rng(0)
    dirs = generate_reference_directions(20, 4)
    for _ in range(20):
        objs = rng.uniform(1, 2, size=(30, 4))
        objs[7] = 0.5
        out = nsga3_select(population(seed1, objs), 10, dirs, rng)
        assert any((o == 0.5).all() for o in out.objectives)


def test_nsga3_first_front_when_fits(seed1):
    rng = np.random.default_rng(5)
    dirs = generate_reference_directions(20, 4)
    for _ in range(30):
        objs = rng.integers(0, 6, size=(40, 4)).astype(float)
        pop = population(seed1, objs)
        pop.rows[:, 0] = np.arange(40)  # tag members
        ranks = constrained_ranks(objs)
        target = int(rng.integers(max(int((ranks == 1).sum()), 1), 40))
        out = nsga3_select(pop, target, dirs, rng)
        kept = set(out.rows[:, 0].tolist())
        dropped = set(range(40)) - kept
        assert len(out) == target
        assert set(np.flatnonzero(ranks == 1).tolist()) <= kept
        if dropped:
            assert max(ranks[list(kept)]) <= min(ranks[list(dropped)])


def test_nsga3_rejects_nonpositive_target(seed1):
    with pytest.raises(ValidationError):
        nsga3_select(population(seed1, [[1, 0, 0, 0]]), 0, generate_reference_directions(4, 4),
                     np.random.default_rng(0))


def small_config(**kw):
    base = dict(l_bar=3, d_bar=3, d_max=2, s_max=3, p_m=0.1, generations=30, n_reference_directions=20, seed=0)
    base.update(kw)
    return MoeaConfig(**base)


def test_run_zero_generations(seed1):
    cfg = small_config(generations=0, d_max=1)
    trace = run_moea(seed1, cfg)
    assert len(trace.fronts) == 1
    init = init_population(seed1, cfg)
    assert np.array_equal(trace.final_rows, init.rows)


def test_run_deterministic(seed1):
    a, b = run_moea(seed1, small_config()), run_moea(seed1, small_config())
    assert all(np.array_equal(x, y) for x, y in zip(a.fronts, b.fronts))
    assert np.array_equal(a.final_rows, b.final_rows)


def test_run_feasible_and_bounded(seed1):
    cfg = small_config(generations=200, p_m=0.2)
    size = cfg.population_size(seed1.t_max)

    def check(gen, pop):
        assert len(pop) == size
        assert pop.feasible().all()

    trace = run_moea(seed1, cfg, on_generation=check)
    assert len(trace.fronts) == 201
    final = trace.fronts[-1]
    assert (final[:, 1] <= 2).all() and (final[:, 2] <= 3).all()
    for rows, obj in zip(trace.final_rows, trace.final_objectives):
        assert tuple(evaluate(seed1, seed1.to_ids(rows))) == tuple(obj)


def test_selection_only_elitism(seed1):
    cfg = small_config(p_m=0.0, p_c=0.0, generations=20)
    trace = run_moea(seed1, cfg)
    for prev, cur in zip(trace.fronts, trace.fronts[1:]):
        for p in prev:
            assert any((q <= p).all() for q in cur)


def test_combine_seeds_properties(seed1):
    traces = run_seeds(seed1, small_config(generations=10), range(3), workers=1)
    single = combine_seeds(traces[:1])
    assert all(np.array_equal(x, y) for x, y in zip(single, traces[0].fronts))
    twice = combine_seeds([traces[0], traces[0]])
    assert all(np.array_equal(x, y) for x, y in zip(twice, single))
    combined = combine_seeds(traces)
    for r, front in enumerate(combined):
        assert len(front) >= 1
        for t in traces:
            for p in t.fronts[r]:
                assert any((q <= p).all() for q in front)
    merged = merge_traces(traces)
    assert merged.seeds == (0, 1, 2)
    assert len(merged.final_rows) == 3 * len(traces[0].final_rows)


def test_combined_front_covers_seed_front_size():
    inst = small_instance(77, t_max=6)
    cfg = small_config(d_max=min(2, inst.max_depth), s_max=3, generations=15)
    traces = run_seeds(inst, cfg, range(15), workers=1)
    combined = combine_seeds(traces)
    assert len(combined[-1]) >= 1
    union = {tuple(p) for t in traces for p in t.fronts[-1]}
    assert {tuple(p) for p in combined[-1]} <= union


def test_combine_seeds_mismatch(seed1):
    a = run_moea(seed1, small_config(generations=2))
    b = run_moea(seed1, small_config(generations=3))
    with pytest.raises(ValidationError):
        combine_seeds([a, b])
    with pytest.raises(ValidationError):
        combine_seeds([])


def test_parallel_matches_serial(seed1):
    cfg = small_config(generations=5)
    serial = run_seeds(seed1, cfg, [0, 1], workers=1)
    parallel = run_seeds(seed1, cfg, [0, 1], workers=2)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.final_rows, b.final_rows)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("TOPOPLAN_THREADS", "2")
    assert worker_count() == 2
    assert worker_count(1) == 1
    monkeypatch.setenv("TOPOPLAN_THREADS", "x")
    with pytest.raises(ValidationError):
        worker_count()
