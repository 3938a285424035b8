import numpy as np
import pytest

from topoplan.dataset import CASE_STUDY_REFERENCE_LF1, GeneratorConfig, Instance, generate_instance


def small_instance(seed, t_max=None, max_per_step=6, decimals=None, drop=None):
    """Seeded oracle-scale instance: t_max <= 6, at most ``max_per_step`` topologies per step."""
    rng = np.random.default_rng(seed)
    t_max = int(rng.integers(1, 7)) if t_max is None else t_max
    c1 = int(rng.integers(1, 4))
    c2 = int(rng.integers(0, max_per_step - c1))
    cfg = GeneratorConfig(
        t_max=t_max,
        count_per_depth={1: c1, 2: c2},
        seed=seed,
        availability_drop_rate=float(rng.uniform(0, 0.5)) if drop is None else drop,
        decimals=int(rng.integers(0, 3)) if decimals is None else decimals,
        lf1_base_range=(80.0, 120.0),
        lf1_noise_range=(-6.0, 6.0),
    )
    return generate_instance(cfg)


@pytest.fixture
def seed1():
    return generate_instance(GeneratorConfig(t_max=4, count_per_depth={1: 2, 2: 3}, seed=1))


@pytest.fixture
def case_day():
    """Reference topology only, loaded with the published reference profile."""
    lf1 = np.array([CASE_STUDY_REFERENCE_LF1])
    return Instance(24, [0], [0], lf1, 0, "case-day")
