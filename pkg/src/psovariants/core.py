"""Variant-agnostic swarm engine.

The engine owns particle bookkeeping, best tracking and the step loop. How the
particles move is delegated to a strategy object (classic, fuzzy or Bayesian);
how they start is delegated to an initializer callable.

One step ``k`` (``1 <= k <= k_max``) is:

1. the strategy moves every particle from ``x(k-1)`` to ``x(k)`` using the
   personal and global bests known so far,
2. the objective is evaluated once per particle at ``x(k)``,
3. personal and global bests are updated from those values.

``trace[k]`` is the global best value after step ``k``; ``trace[0]`` is the best
initial position.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from .metrics import RunReport, accuracy, efficiency
from .rng import RandomStream

# Standard constriction values for the classic variant.
DEFAULT_W = 0.72984
DEFAULT_C = 1.496172


class ConfigurationError(ValueError):
    """Raised when a run is configured inconsistently."""


class NonFiniteObjectiveError(ArithmeticError):
    """Raised when the objective returns NaN or an infinity."""

    def __init__(self, particle: int, position, value: float):
        self.particle = particle
        self.position = np.array(position, dtype=float)
        self.value = value
        super().__init__(
            f"objective returned {value!r} for particle {particle} "
            f"at position {self.position.tolist()}"
        )


class Variant(str, enum.Enum):
    PSOC = "psoc"
    PSOF = "psof"
    PSOB = "psob"


@dataclass(frozen=True)
class Bounds:
    """Axis-aligned search box ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ConfigurationError("lower and upper must be 1-D and of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ConfigurationError("bounds must be finite")
        if np.any(lower >= upper):
            raise ConfigurationError("every lower bound must be below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, lower: float, upper: float, d: int) -> "Bounds":
        return cls(np.full(d, float(lower)), np.full(d, float(upper)))

    @property
    def d(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lower), self.upper)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x)
        return bool(np.all((x >= self.lower) & (x <= self.upper)))

    def __eq__(self, other):
        if not isinstance(other, Bounds):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(
            self.upper, other.upper
        )

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


@dataclass(frozen=True)
class SwarmConfig:
    """All parameters of a single run.

    ``w``, ``c1`` and ``c2`` are only read by the classic strategy; the fuzzy
    strategy infers its own values each step.
    """

    bounds: Bounds
    D: int = 35
    k_max: int = 150
    variant: Variant = Variant.PSOC
    w: float = DEFAULT_W
    c1: float = DEFAULT_C
    c2: float = DEFAULT_C
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if int(self.D) != self.D or self.D < 1:
            raise ConfigurationError(f"swarm size D must be a positive integer, got {self.D}")
        # k_max = 0 is accepted: the run then reports only the initial best.
        if int(self.k_max) != self.k_max or self.k_max < 0:
            raise ConfigurationError(f"k_max must be a nonnegative integer, got {self.k_max}")
        for name in ("w", "c1", "c2"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {value}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def d(self) -> int:
        return self.bounds.d

    def echo(self) -> dict:
        """Plain-data form of the configuration for reports."""
        return {
            "d": self.d,
            "D": int(self.D),
            "k_max": int(self.k_max),
            "variant": self.variant.value,
            "lower": self.bounds.lower.tolist(),
            "upper": self.bounds.upper.tolist(),
            "w": self.w,
            "c1": self.c1,
            "c2": self.c2,
            "seed": int(self.seed),
        }


@dataclass
class ParticleState:
    x: np.ndarray
    v: np.ndarray
    l: np.ndarray
    f_l: float


@dataclass
class SwarmState:
    """Mutable swarm state, stored row-per-particle.

    ``f_x`` caches the objective at the current positions. ``f_b_prev`` is the
    global best value as it stood before the most recent evaluation pass; the
    Bayesian strategy tests its new-global-best condition against it.
    """

    x: np.ndarray
    v: np.ndarray
    l: np.ndarray
    f_l: np.ndarray
    f_x: np.ndarray
    b: np.ndarray
    f_b: float
    rng: RandomStream
    k: int = 0
    f_b_prev: float = np.inf
    extra: dict = field(default_factory=dict)

    @property
    def D(self) -> int:
        return self.x.shape[0]

    @property
    def particles(self) -> list[ParticleState]:
        return [
            ParticleState(self.x[p].copy(), self.v[p].copy(), self.l[p].copy(), float(self.f_l[p]))
            for p in range(self.D)
        ]

    @classmethod
    def from_positions(cls, x, rng: RandomStream) -> "SwarmState":
        """Fresh state at ``x`` with zero velocity and no evaluations yet."""
        x = np.array(x, dtype=float)
        if x.ndim != 2:
            raise ConfigurationError("positions must be a (D, d) array")
        return cls(
            x=x,
            v=np.zeros_like(x),
            l=x.copy(),
            f_l=np.full(x.shape[0], np.inf),
            f_x=np.full(x.shape[0], np.inf),
            b=x[0].copy(),
            f_b=np.inf,
            rng=rng,
        )


def update_bests(state: SwarmState, f_values) -> SwarmState:
    """Fold one evaluation pass into the personal and global bests.

    ``f_values[p]`` must be the objective at ``state.x[p]``. Comparisons are
    strict and the lowest particle index wins ties. The state is updated in
    place and returned.
    """
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape != (state.D,):
        raise ValueError(f"expected {state.D} objective values, got shape {f_values.shape}")
    bad = np.flatnonzero(~np.isfinite(f_values))
    if bad.size:
        p = int(bad[0])
        raise NonFiniteObjectiveError(p, state.x[p], float(f_values[p]))

    state.f_b_prev = state.f_b
    state.f_x = f_values.copy()
    improved = f_values < state.f_l
    state.l[improved] = state.x[improved]
    state.f_l[improved] = f_values[improved]

    best = int(np.argmin(state.f_l))
    if state.f_l[best] < state.f_b:
        state.b = state.l[best].copy()
        state.f_b = float(state.f_l[best])
    return state


def move_particles(state: SwarmState, bounds: Bounds, w, c1, c2) -> SwarmState:
    """Velocity and position update with per-particle scalar r1, r2.

    ``w``, ``c1`` and ``c2`` may be scalars or length-D arrays. Positions are
    clamped to the box; velocities are left as computed.
    """
    u = state.rng.uniform(size=(state.D, 2))
    r1 = u[:, 0:1]
    r2 = u[:, 1:2]
    w = np.reshape(np.asarray(w, dtype=float), (-1, 1))
    c1 = np.reshape(np.asarray(c1, dtype=float), (-1, 1))
    c2 = np.reshape(np.asarray(c2, dtype=float), (-1, 1))
    state.v = w * state.v + c1 * r1 * (state.l - state.x) + c2 * r2 * (state.b - state.x)
    state.x = bounds.clip(state.x + state.v)
    state.k += 1
    return state


def psoc_step(state: SwarmState, config: SwarmConfig) -> SwarmState:
    """One step of the classic update with the constant ``w, c1, c2``."""
    if state.k >= config.k_max:
        raise ConfigurationError(f"step budget exhausted (k={state.k}, k_max={config.k_max})")
    return move_particles(state, config.bounds, config.w, config.c1, config.c2)


class Strategy(Protocol):
    variant: Variant

    def initialize(self, state: SwarmState, config: SwarmConfig) -> None: ...

    def step(self, state: SwarmState, config: SwarmConfig) -> SwarmState: ...


class ClassicStrategy:
    variant = Variant.PSOC

    def initialize(self, state, config):
        pass

    def step(self, state, config):
        return psoc_step(state, config)


def default_strategy(variant) -> Strategy:
    variant = Variant(variant)
    if variant is Variant.PSOC:
        return ClassicStrategy()
    if variant is Variant.PSOF:
        from .fuzzy import FuzzyStrategy

        return FuzzyStrategy()
    from .bayes import BayesStrategy

    return BayesStrategy()


def default_initializer(variant) -> Callable:
    from .initialization import partitioned_init, uniform_init

    return uniform_init if Variant(variant) is Variant.PSOC else partitioned_init


def evaluate(objective: Callable, x: np.ndarray) -> np.ndarray:
    """Objective values for every row of ``x``.

    Objectives flagged with ``vectorized = True`` receive the whole (D, d)
    array at once; others are called row by row.
    """
    if getattr(objective, "vectorized", False):
        return np.asarray(objective(x), dtype=float).reshape(x.shape[0])
    return np.array([float(objective(row)) for row in x])


def run(
    config: SwarmConfig,
    objective: Callable,
    initializer: Optional[Callable] = None,
    strategy: Optional[Strategy] = None,
    *,
    objective_name: Optional[str] = None,
    f_star: float = 0.0,
    efficiency_threshold: Optional[float] = None,
    on_evaluate: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
) -> RunReport:
    """Execute one seeded run and return its report.

    Parameters
    ----------
    config : SwarmConfig
        Run parameters, including the variant and the seed.
    objective : callable
        Maps a length-d position to a float (see :func:`evaluate`).
    initializer : callable, optional
        ``initializer(config, rng) -> (D, d) array``. Defaults to uniform
        sampling for the classic variant and partitioned sampling otherwise.
    strategy : Strategy, optional
        Movement rule; must match ``config.variant``.
    f_star : float
        Known optimum value used for the accuracy indicator.
    efficiency_threshold : float, optional
        Target value for the efficiency indicator.
    on_evaluate : callable, optional
        ``on_evaluate(k, positions, values)`` is called after every evaluation
        pass, including the initial one at ``k = 0``.
    """
    strategy = default_strategy(config.variant) if strategy is None else strategy
    if Variant(getattr(strategy, "variant", None)) is not config.variant:
        raise ConfigurationError(
            f"strategy {type(strategy).__name__} implements "
            f"{Variant(strategy.variant).value}, config asks for {config.variant.value}"
        )
    initializer = default_initializer(config.variant) if initializer is None else initializer

    started = time.perf_counter()
    rng = RandomStream(config.seed)
    x0 = np.asarray(initializer(config, rng), dtype=float)
    if x0.shape != (config.D, config.d):
        raise ConfigurationError(
            f"initializer returned shape {x0.shape}, expected {(config.D, config.d)}"
        )
    state = SwarmState.from_positions(x0, rng)
    f0 = evaluate(objective, state.x)
    if on_evaluate is not None:
        on_evaluate(0, state.x.copy(), f0.copy())
    update_bests(state, f0)
    # The first step compares against the initial best, not against +inf.
    state.f_b_prev = state.f_b
    strategy.initialize(state, config)

    trace = [state.f_b]
    for _ in range(config.k_max):
        strategy.step(state, config)
        f = evaluate(objective, state.x)
        if on_evaluate is not None:
            on_evaluate(state.k, state.x.copy(), f.copy())
        update_bests(state, f)
        trace.append(state.f_b)

    trace = np.array(trace)
    return RunReport(
        trace=trace,
        best_position=state.b.copy(),
        best_value=state.f_b,
        accuracy=accuracy(trace, f_star),
        efficiency=None if efficiency_threshold is None else efficiency(trace, efficiency_threshold),
        efficiency_threshold=efficiency_threshold,
        seed=int(config.seed),
        variant=config.variant.value,
        objective=objective_name or getattr(objective, "__name__", "objective"),
        config=config.echo(),
        wall_time=time.perf_counter() - started,
    )
