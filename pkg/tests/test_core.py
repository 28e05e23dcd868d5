import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psovariants import Bounds, ConfigurationError, NonFiniteObjectiveError, RandomStream, SwarmConfig, SwarmState, run
from psovariants.core import ClassicStrategy, psoc_step, update_bests
from psovariants.fuzzy import FuzzyStrategy
from psovariants.objectives import griewank, rosenbrock, sphere


def make_state(x, v=None, l=None, f_l=None, b=None, f_b=np.inf, seed=0):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    state = SwarmState.from_positions(x, RandomStream(seed))
    if v is not None:
        state.v = np.atleast_2d(np.asarray(v, dtype=float))
    if l is not None:
        state.l = np.atleast_2d(np.asarray(l, dtype=float))
    if f_l is not None:
        state.f_l = np.asarray(f_l, dtype=float)
    if b is not None:
        state.b = np.asarray(b, dtype=float)
    state.f_b = f_b
    return state


# --- update_bests -------------------------------------------------------------


def test_no_improvement_keeps_personal_best():
    state = make_state([[1.0]], l=[[2.0]], f_l=[3.0], b=[2.0], f_b=3.0)
    update_bests(state, [5.0])
    assert state.l[0, 0] == 2.0 and state.f_l[0] == 3.0
    assert state.b[0] == 2.0 and state.f_b == 3.0


def test_strict_improvement_cascades_to_global_best():
    state = make_state([[1.0]], l=[[2.0]], f_l=[3.0], b=[4.0], f_b=2.0)
    update_bests(state, [1.0])
    assert state.l[0, 0] == 1.0 and state.f_l[0] == 1.0
    assert state.b[0] == 1.0 and state.f_b == 1.0


def test_equal_value_is_not_an_improvement():
    state = make_state([[1.0]], l=[[2.0]], f_l=[3.0], b=[2.0], f_b=3.0)
    update_bests(state, [3.0])
    assert state.l[0, 0] == 2.0 and state.b[0] == 2.0


@pytest.mark.parametrize("order", [(-1.0, 1.0), (1.0, -1.0)])
def test_simultaneous_optimum_goes_to_lowest_index(order):
    # |x^2 - 1| vanishes at both particles; particle 0 must own the global best.
    def two_minima(x):
        return abs(float(x[0]) ** 2 - 1.0)

    config = SwarmConfig(Bounds.box(-2, 2, 1), D=2, k_max=0, seed=3)
    report = run(config, two_minima, initializer=lambda cfg, rng: np.array([[order[0]], [order[1]]]))
    assert report.best_value == 0.0
    assert report.best_position[0] == order[0]


def test_non_finite_value_names_particle_and_position():
    state = make_state([[0.5, 1.0], [2.0, 3.0]])
    with pytest.raises(NonFiniteObjectiveError) as info:
        update_bests(state, [1.0, np.nan])
    assert info.value.particle == 1
    assert info.value.position.tolist() == [2.0, 3.0]
    assert "particle 1" in str(info.value)


def test_non_finite_objective_aborts_run():
    config = SwarmConfig(Bounds.box(-1, 1, 2), D=3, k_max=5)
    with pytest.raises(NonFiniteObjectiveError):
        run(config, lambda x: np.inf)


# --- psoc_step ----------------------------------------------------------------


def test_stationary_fixed_point():
    config = SwarmConfig(Bounds.box(-10, 10, 2), D=1, k_max=5)
    state = make_state([[1.0, 2.0]], b=[1.0, 2.0], f_b=0.0)
    psoc_step(state, config)
    assert state.v.tolist() == [[0.0, 0.0]]
    assert state.x.tolist() == [[1.0, 2.0]]
    assert state.k == 1


def test_pure_momentum():
    config = SwarmConfig(Bounds.box(-10, 10, 2), D=1, k_max=5, w=1.0, c1=0.0, c2=0.0)
    state = make_state([[0.0, 0.0]], v=[[1.0, 0.0]], l=[[5.0, 5.0]], b=[-3.0, 7.0], f_b=0.0)
    psoc_step(state, config)
    assert state.x.tolist() == [[1.0, 0.0]]


def test_position_clamped_velocity_kept():
    config = SwarmConfig(Bounds.box(-10, 10, 1), D=1, k_max=5, w=1.0, c1=0.0, c2=0.0)
    state = make_state([[9.999]], v=[[50.0]])
    psoc_step(state, config)
    assert state.x[0, 0] == 10.0
    assert state.v[0, 0] == 50.0


def test_r1_r2_scalar_per_particle():
    # With x = 0, l = 1 and b = 0 in every dimension, v = c1 * r1 must be the
    # same in all dimensions if r1 is shared across them.
    config = SwarmConfig(Bounds.box(-10, 10, 4), D=3, k_max=5, w=0.0, c1=1.0, c2=1.0)
    state = make_state(np.zeros((3, 4)), l=np.ones((3, 4)), b=np.zeros(4), f_b=0.0)
    psoc_step(state, config)
    for row in state.v:
        assert np.all(row == row[0])
    assert len(set(state.v[:, 0])) == 3


def test_step_after_budget_is_rejected():
    config = SwarmConfig(Bounds.box(-1, 1, 1), D=1, k_max=1)
    state = make_state([[0.0]], b=[0.0], f_b=0.0)
    psoc_step(state, config)
    with pytest.raises(ConfigurationError):
        psoc_step(state, config)


# --- run ----------------------------------------------------------------------


def test_zero_budget_reports_initial_best():
    config = SwarmConfig(Bounds.box(-5, 5, 2), D=4, k_max=0, seed=9)
    seen = []
    report = run(config, sphere, on_evaluate=lambda k, x, f: seen.append(f))
    assert report.trace.shape == (1,)
    assert report.trace[0] == min(seen[0])


def test_sphere_one_dimension_converges():
    hits = 0
    for seed in range(100):
        config = SwarmConfig(Bounds.box(-5, 5, 1), D=5, k_max=50, seed=seed)
        hits += run(config, sphere).trace[-1] <= 1e-2
    assert hits >= 95


@pytest.mark.parametrize("variant", ["psoc", "psof", "psob"])
def test_same_seed_same_report(variant):
    config = SwarmConfig(Bounds.box(-20, 20, 5), D=12, k_max=30, variant=variant, seed=77)
    a = run(config, griewank, objective_name="griewank")
    b = run(config, griewank, objective_name="griewank")
    assert a == b
    assert a.trace.tobytes() == b.trace.tobytes()
    assert a.best_position.tobytes() == b.best_position.tobytes()


def test_different_seeds_differ():
    a = run(SwarmConfig(Bounds.box(-20, 20, 5), D=10, k_max=10, seed=1), griewank)
    b = run(SwarmConfig(Bounds.box(-20, 20, 5), D=10, k_max=10, seed=2), griewank)
    assert not np.array_equal(a.trace, b.trace)


def test_strategy_variant_mismatch_is_rejected_before_evaluation():
    calls = []

    def objective(x):
        calls.append(1)
        return 0.0

    config = SwarmConfig(Bounds.box(-1, 1, 1), D=2, k_max=3, variant="psob")
    with pytest.raises(ConfigurationError, match="psob"):
        run(config, objective, strategy=ClassicStrategy())
    with pytest.raises(ConfigurationError):
        run(SwarmConfig(Bounds.box(-1, 1, 1), D=2, k_max=3), objective, strategy=FuzzyStrategy())
    assert calls == []


def test_initializer_shape_is_checked():
    config = SwarmConfig(Bounds.box(-1, 1, 2), D=3, k_max=3)
    with pytest.raises(ConfigurationError, match="shape"):
        run(config, sphere, initializer=lambda cfg, rng: np.zeros((2, 2)))


def test_non_vectorized_objective_matches_vectorized():
    config = SwarmConfig(Bounds.box(-10, 10, 3), D=8, k_max=20, seed=5)
    a = run(config, rosenbrock)
    b = run(config, lambda x: rosenbrock(x))
    assert np.array_equal(a.trace, b.trace)


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    variant=st.sampled_from(["psoc", "psof", "psob"]),
    d=st.integers(2, 4),
    D=st.integers(1, 8),
)
def test_trace_is_the_running_minimum_of_all_evaluations(seed, variant, d, D):
    config = SwarmConfig(Bounds.box(-10, 10, d), D=D, k_max=15, variant=variant, seed=seed)
    passes = []

    def record(k, x, f):
        assert config.bounds.contains(x)
        passes.append(f)

    report = run(config, rosenbrock, on_evaluate=record)
    running = np.minimum.accumulate([f.min() for f in passes])
    assert np.array_equal(report.trace, running)
    assert np.all(np.diff(report.trace) <= 0)
    assert rosenbrock(report.best_position) == report.best_value


# --- configuration ------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [dict(D=0), dict(k_max=-1), dict(w=-0.1), dict(c1=np.nan), dict(c2=np.inf), dict(seed=-1), dict(seed=2**64)],
)
def test_invalid_config_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        SwarmConfig(Bounds.box(0, 1, 1), **kwargs)


@pytest.mark.parametrize("lower,upper", [([0.0], [0.0]), ([1.0], [0.0]), ([0.0], [np.inf]), ([0.0, 1.0], [1.0])])
def test_invalid_bounds_rejected(lower, upper):
    with pytest.raises(ConfigurationError):
        Bounds(np.array(lower), np.array(upper))


def test_particles_view_matches_arrays():
    config = SwarmConfig(Bounds.box(-5, 5, 2), D=3, k_max=0)
    state = SwarmState.from_positions(np.arange(6.0).reshape(3, 2), RandomStream(0))
    update_bests(state, sphere(state.x))
    parts = state.particles
    assert len(parts) == config.D
    assert parts[2].x.tolist() == [4.0, 5.0]
    assert parts[0].f_l == 1.0
    assert state.f_b <= min(p.f_l for p in parts)
