import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psovariants import Bounds, RandomStream, SwarmConfig
from psovariants.initialization import partitioned_init, uniform_init


def bins(x, config):
    """Subinterval index (0-based) of every coordinate."""
    delta = config.bounds.width / config.D
    idx = np.floor((x - config.bounds.lower) / delta).astype(int)
    return np.clip(idx, 0, config.D - 1)


def test_two_particles_split_the_halves():
    config = SwarmConfig(Bounds.box(0, 10, 1), D=2)
    for seed in range(50):
        x = np.sort(partitioned_init(config, RandomStream(seed))[:, 0])
        assert 0 <= x[0] <= 5 <= x[1] <= 10


def test_single_particle_spans_the_box():
    config = SwarmConfig(Bounds.box(-3, 7, 1), D=1)
    draws = np.array([partitioned_init(config, RandomStream(s))[0, 0] for s in range(400)])
    assert draws.min() >= -3 and draws.max() <= 7
    assert draws.min() < -2 and draws.max() > 6


def test_unit_bins_are_all_distinct():
    config = SwarmConfig(Bounds.box(0, 4, 2), D=4)
    for seed in range(1000):
        x = partitioned_init(config, RandomStream(seed))
        for i in range(2):
            assert sorted(np.floor(x[:, i]).astype(int)) == [0, 1, 2, 3]


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    d=st.integers(1, 5),
    D=st.integers(1, 40),
    lower=st.floats(-1e3, 1e3),
    width=st.floats(1e-3, 1e3),
)
def test_partition_coverage_and_feasibility(seed, d, D, lower, width):
    config = SwarmConfig(Bounds.box(lower, lower + width, d), D=D)
    x = partitioned_init(config, RandomStream(seed))
    assert x.shape == (D, d)
    assert config.bounds.contains(x)
    b = bins(x, config)
    for i in range(d):
        assert sorted(b[:, i]) == list(range(D))


def test_permutation_drawn_per_dimension():
    config = SwarmConfig(Bounds.box(0, 1, 6), D=10)
    b = bins(partitioned_init(config, RandomStream(4)), config)
    assert len({tuple(col) for col in b.T}) > 1


def test_uniform_tight_box():
    eps = 1e-9
    config = SwarmConfig(Bounds.box(0, eps, 3), D=20)
    x = uniform_init(config, RandomStream(1))
    assert np.all((x >= 0) & (x <= eps))


def test_uniform_mean_within_three_standard_errors():
    config = SwarmConfig(Bounds.box(-2, 6, 3), D=100_000)
    x = uniform_init(config, RandomStream(2024))
    se = 8.0 / np.sqrt(12.0) / np.sqrt(config.D)
    assert np.all(np.abs(x.mean(axis=0) - 2.0) < 3 * se)


@pytest.mark.parametrize("init", [uniform_init, partitioned_init])
def test_same_seed_same_positions(init):
    config = SwarmConfig(Bounds.box(-5, 5, 4), D=9)
    a = init(config, RandomStream(31))
    b = init(config, RandomStream(31))
    assert a.tobytes() == b.tobytes()
