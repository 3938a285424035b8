"""Why the exact method is tractable: counting blocks, configurations and
reference assignments for a day of 24 hourly steps."""
import math

from topoplan.blocks import enumerate_blocks, enumerate_configurations, enumerate_reference_assignments, fibonacci
from topoplan.exact import count_evaluations

T = 24

# every run of consecutive hours is a block; there are only a few hundred
blocks = enumerate_blocks(T)
print(f"{len(blocks)} blocks for t_max={T}")

# a configuration with l switches cuts the day at l of the 23 inner boundaries
for l in range(6):
    n_conf = math.comb(T - 1, l)
    # reference blocks may not touch, so each configuration admits F(l+3) assignments
    print(f"l={l}: {n_conf:>6} configurations x {fibonacci(l + 3):>2} reference assignments")

# spot check against direct enumeration on a shorter horizon
configs = enumerate_configurations(8, 3)
assert len(configs) == math.comb(7, 3)
assert all(len(enumerate_reference_assignments(m)) == fibonacci(6) for m in configs)

# four depth bounds (0..3) times the sum above
print("evaluations for d_max=3, s_max=5:", f"{count_evaluations(3, 5, T):,}")
# versus all strategies over 39,180 topologies per hour
print(f"strategies without bounds: about 10^{24 * math.log10(39180):.0f}")
