"""Solve a small synthetic instance exactly and confirm it against
exhaustive enumeration of every strategy."""
import numpy as np

from topoplan.dataset import GeneratorConfig, generate_instance
from topoplan.exact import exact_fronts
from topoplan.objectives import evaluate
from topoplan.oracle import check_equivalence, strategy_space_size

inst = generate_instance(GeneratorConfig(t_max=5, count_per_depth={1: 2, 2: 3}, seed=3))
print(f"{inst.n_topologies} topologies, {strategy_space_size(inst):,} strategies in total")

D_MAX, S_MAX = 2, 3
res = exact_fronts(inst, D_MAX, S_MAX, k_max=3, strict_adjacency=True)
print(f"evaluated {res.eval_count} (d, M, R) combinations")

for k, front in enumerate(res.fronts, start=1):
    print(f"\nfront {k}: {len(front)} points")
    for e in front[:6]:
        print(f"  lf1={e.lf1_rounded:6.1f} depth={e.depth} switches={e.switches} "
              f"non_ref={e.non_ref:2d} strategies={e.strategy_count:4d} e.g. {e.representative}")

# each representative really has the objectives its entry claims
for e in res.entries():
    v = evaluate(inst, e.representative)
    assert (v.depth, v.switches, v.non_ref) == (e.depth, e.switches, e.non_ref)
    assert np.isclose(v.lf1, e.lf1)

report = check_equivalence(inst, D_MAX, S_MAX, k_max=3)
print("\nbrute force:", report.message)
