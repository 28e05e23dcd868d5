"""Fuzzy-adaptive inertia weight.

A two-input Mamdani system maps the current step ``k`` and a particle's
percentage gap ``alpha`` to the global best onto an inertia weight ``w`` in
[0.6, 1.0]; the acceleration constants follow from ``c1 = c2 = (w + 1)**2 / 2``.

Engine details:

* AND inside a rule is ``min``; an OR of labels inside one antecedent is ``max``.
* Each rule clips its output set at its activation level.
* Clipped sets are composed by pointwise *sum* (not capped at 1).
* ``w`` is the centroid of the composed curve, computed with the midpoint rule
  on the ``grid_points - 1`` cells of a uniform grid over the output range.

Step breakpoints are expressed in twentieths of ``k_max``; distance breakpoints
in percent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .core import ConfigurationError, SwarmConfig, SwarmState, Variant, move_particles

ALPHA_ZERO_TOL = 1e-12
ALPHA_SATURATED = 100.0


def _as_float(v) -> float:
    if v is None:
        return math.inf
    if isinstance(v, str):
        return float(v.strip().lower().replace("+", ""))
    return float(v)


@dataclass(frozen=True)
class Trapezoid:
    """Trapezoidal membership: rises on [a, b], 1 on [b, c], falls on [c, d].

    ``a == b`` or ``c == d`` gives a vertical shoulder; ``c = d = inf`` gives a
    set that stays at 1 for all large inputs.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise ValueError(f"trapezoid breakpoints must be ordered, got {self.as_tuple()}")
        if math.isinf(self.a) or math.isinf(self.b):
            raise ValueError("left breakpoints must be finite")

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return self._membership(x)

    def _membership(self, x):
        if self.b > self.a:
            rise = np.clip((x - self.a) / (self.b - self.a), 0.0, 1.0)
        else:
            rise = (x >= self.a).astype(float)
        if math.isinf(self.c):
            fall = np.ones_like(x)
        elif self.d > self.c:
            fall = np.clip((self.d - x) / (self.d - self.c), 0.0, 1.0)
        else:
            fall = (x <= self.d).astype(float)
        return np.minimum(rise, fall)


class MembershipFamily:
    """Ordered collection of labelled trapezoids over one input universe."""

    def __init__(self, sets: dict):
        if not sets:
            raise ValueError("a membership family needs at least one set")
        self.sets = {
            name: s if isinstance(s, Trapezoid) else Trapezoid(*map(_as_float, s))
            for name, s in sets.items()
        }
        self.labels = tuple(self.sets)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown label {label!r}; known labels: {list(self.labels)}") from None

    def degrees(self, x) -> np.ndarray:
        """Membership degrees, shape ``x.shape + (len(labels),)``."""
        x = np.asarray(x, dtype=float)
        return np.stack([self.sets[name](x) for name in self.labels], axis=-1)

    def to_dict(self) -> dict:
        return {name: list(s.as_tuple()) for name, s in self.sets.items()}

    def __eq__(self, other):
        return isinstance(other, MembershipFamily) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"MembershipFamily({self.to_dict()})"


@dataclass(frozen=True)
class Rule:
    step: str
    distance: tuple
    output: str

    def __post_init__(self):
        dist = (self.distance,) if isinstance(self.distance, str) else tuple(self.distance)
        object.__setattr__(self, "distance", dist)


class RuleBase:
    """Rule list checked against the families it refers to."""

    def __init__(self, rules, step: MembershipFamily, distance: MembershipFamily, output: MembershipFamily):
        self.rules = tuple(r if isinstance(r, Rule) else Rule(*r) for r in rules)
        if not self.rules:
            raise ValueError("rule base is empty")
        self.step_index = np.array([step.index(r.step) for r in self.rules])
        self.output_index = np.array([output.index(r.output) for r in self.rules])
        # boolean mask: which distance labels each rule ORs together
        self.distance_mask = np.zeros((len(self.rules), len(distance.labels)), dtype=bool)
        for j, rule in enumerate(self.rules):
            for label in rule.distance:
                self.distance_mask[j, distance.index(label)] = True
        covered = {(s, dl) for r in self.rules for s in [r.step] for dl in r.distance}
        missing = [(s, dl) for s in step.labels for dl in distance.labels if (s, dl) not in covered]
        if missing:
            raise ValueError(f"rule base leaves label pairs uncovered: {missing}")

    def __len__(self):
        return len(self.rules)

    def activations(self, step_deg: np.ndarray, dist_deg: np.ndarray) -> np.ndarray:
        """Rule firing degrees, shape ``(n, n_rules)``."""
        s = step_deg[:, self.step_index]
        masked = np.where(self.distance_mask[None, :, :], dist_deg[:, None, :], 0.0)
        return np.minimum(s, masked.max(axis=-1))


DEFAULT_STEP_SETS = {
    "VeryShort": (0, 0, 1, 4),
    "Short": (2, 4, 4, 6),
    "Moderate": (5, 7, 14, 17),
    "Long": (14, 17, 17, 18),
    "VeryLong": (17, 18, 20, 20),
}
DEFAULT_DISTANCE_SETS = {
    "Small": (0, 0, 5, 10),
    "Medium": (5, 15, 50, 65),
    "Large": (50, 65, math.inf, math.inf),
}
DEFAULT_OUTPUT_SETS = {
    "Low": (0.6, 0.7, 0.7, 0.8),
    "Intermediate": (0.7, 0.8, 0.8, 0.9),
    "High": (0.8, 0.9, 0.9, 1.0),
}
DEFAULT_RULES = (
    ("VeryShort", ("Small",), "Intermediate"),
    ("VeryShort", ("Medium", "Large"), "High"),
    ("Short", ("Small",), "Low"),
    ("Short", ("Medium", "Large"), "High"),
    ("Moderate", ("Small",), "Low"),
    ("Moderate", ("Medium",), "Intermediate"),
    ("Moderate", ("Large",), "High"),
    ("Long", ("Small",), "Low"),
    ("Long", ("Medium", "Large"), "Intermediate"),
    ("VeryLong", ("Small", "Medium"), "Low"),
    ("VeryLong", ("Large",), "Intermediate"),
)


@dataclass
class FuzzySystem:
    """Complete inference system: three families, a rule base, an output grid."""

    step: MembershipFamily = field(default_factory=lambda: MembershipFamily(DEFAULT_STEP_SETS))
    distance: MembershipFamily = field(default_factory=lambda: MembershipFamily(DEFAULT_DISTANCE_SETS))
    output: MembershipFamily = field(default_factory=lambda: MembershipFamily(DEFAULT_OUTPUT_SETS))
    rules: tuple = DEFAULT_RULES
    output_range: tuple = (0.6, 1.0)
    grid_points: int = 4001
    step_units: float = 20.0

    def __post_init__(self):
        lo, hi = map(float, self.output_range)
        if not lo < hi:
            raise ValueError(f"output range must be increasing, got {self.output_range}")
        if int(self.grid_points) < 2:
            raise ValueError("grid_points must be at least 2")
        self.output_range = (lo, hi)
        self.grid_points = int(self.grid_points)
        self.rule_base = RuleBase(self.rules, self.step, self.distance, self.output)
        self.rules = self.rule_base.rules

    @cached_property
    def grid(self) -> np.ndarray:
        """Cell midpoints of the output grid."""
        return self._mid + self._offsets

    @cached_property
    def _mid(self) -> float:
        return 0.5 * (self.output_range[0] + self.output_range[1])

    @cached_property
    def _offsets(self) -> np.ndarray:
        # offsets from the range midpoint; symmetric by construction, which
        # keeps centroids of symmetric curves free of rounding drift
        lo, hi = self.output_range
        n_cells = self.grid_points - 1
        h = (hi - lo) / n_cells
        return (np.arange(n_cells) - 0.5 * (n_cells - 1)) * h

    @cached_property
    def _output_degrees(self) -> np.ndarray:
        return self.output.degrees(self.grid).T  # (n_labels, n_cells)

    @cached_property
    def _clip_tables(self):
        # Per output label, the grid sums of min(a, mu) and x * min(a, mu) are
        # piecewise linear in a; sorting mu once turns them into prefix sums.
        x = self._offsets
        tables = []
        for mu in self._output_degrees:
            order = np.argsort(mu, kind="stable")
            mu_s, x_s = mu[order], x[order]
            zero = np.zeros(1)
            tables.append(
                (
                    mu_s,
                    np.concatenate([zero, np.cumsum(mu_s)]),
                    np.concatenate([zero, np.cumsum(x_s * mu_s)]),
                    np.concatenate([zero, np.cumsum(x_s)]),
                    # correctly rounded unclipped sums for rules firing at full height
                    (math.fsum(mu), math.fsum(mu * x), float(mu.max())),
                )
            )
        return tables

    def step_degrees(self, k, k_max) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        return self.step.degrees(k * (self.step_units / k_max))

    def activations(self, k, alpha, k_max) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        k = np.broadcast_to(np.asarray(k, dtype=float), alpha.shape)
        return self.rule_base.activations(self.step_degrees(k, k_max), self.distance.degrees(alpha))

    def output_curve(self, k, alpha, k_max) -> np.ndarray:
        """Composed output curve on :attr:`grid`, one row per input pair."""
        act = self.activations(k, alpha, k_max)
        out = self._output_degrees[self.rule_base.output_index]  # (n_rules, n_cells)
        return np.minimum(act[:, :, None], out[None, :, :]).sum(axis=1)

    def centroid_direct(self, k, alpha, k_max) -> np.ndarray:
        """Centroid from the materialized output curve (reference path)."""
        curve = self.output_curve(k, alpha, k_max)
        area = curve.sum(axis=1)
        moment = curve @ self._offsets
        return self._finish(moment, area)

    def infer_w(self, k, alpha, k_max):
        """Inertia weight for each ``(k, alpha)`` pair.

        Scalars in, scalar out; arrays broadcast. ``k`` is a step index in
        ``[0, k_max]`` and ``alpha`` a nonnegative percentage.
        """
        scalar = np.ndim(alpha) == 0 and np.ndim(k) == 0
        act = self.activations(k, alpha, k_max)
        area = np.zeros(act.shape[0])
        moment = np.zeros(act.shape[0])
        tables = self._clip_tables
        n = self.grid.size
        for j, label in enumerate(self.rule_base.output_index):
            mu_s, c_mu, c_xmu, c_x, (full_area, full_moment, peak) = tables[label]
            a = act[:, j]
            below = np.searchsorted(mu_s, a, side="left")
            full = a >= peak
            area += np.where(full, full_area, c_mu[below] + a * (n - below))
            moment += np.where(full, full_moment, c_xmu[below] + a * (c_x[-1] - c_x[below]))
        w = self._finish(moment, area)
        return float(w[0]) if scalar else w

    def _finish(self, moment, area):
        # moments are taken about the range midpoint
        with np.errstate(invalid="ignore", divide="ignore"):
            w = self._mid + moment / area
        return np.where(area > 0, w, self._mid)

    def to_dict(self) -> dict:
        return {
            "step": self.step.to_dict(),
            "distance": self.distance.to_dict(),
            "output": self.output.to_dict(),
            "rules": [
                {"step": r.step, "distance": list(r.distance), "w": r.output} for r in self.rules
            ],
            "output_range": list(self.output_range),
            "grid_points": self.grid_points,
        }


DEFAULT_SYSTEM = FuzzySystem()


def fuzzy_system_from_dict(data: dict) -> FuzzySystem:
    """Build a system from the JSON-style mapping; missing keys keep defaults.

    Keys: ``step``, ``distance``, ``output`` (label -> [a, b, c, d], with
    ``null`` or ``"inf"`` for an open right end), ``rules`` (list of
    ``{"step": label, "distance": [labels], "w": label}``), ``output_range``
    and ``grid_points``.
    """
    allowed = {"step", "distance", "output", "rules", "output_range", "grid_points"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown fuzzy config keys: {sorted(unknown)}")
    kwargs = {}
    for key in ("step", "distance", "output"):
        if key in data:
            kwargs[key] = MembershipFamily(data[key])
    if "rules" in data:
        rules = []
        for entry in data["rules"]:
            try:
                rules.append(Rule(entry["step"], entry["distance"], entry["w"]))
            except (KeyError, TypeError):
                raise ConfigurationError(f"malformed fuzzy rule entry: {entry!r}") from None
        kwargs["rules"] = tuple(rules)
    if "output_range" in data:
        kwargs["output_range"] = tuple(data["output_range"])
    if "grid_points" in data:
        kwargs["grid_points"] = data["grid_points"]
    try:
        return FuzzySystem(**kwargs)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_fuzzy_system(path) -> FuzzySystem:
    with open(Path(path)) as f:
        return fuzzy_system_from_dict(json.load(f))


def percent_distance(f_x, f_b):
    """Percentage gap of ``f_x`` above the global best ``f_b``, floored at 0.

    When ``|f_b|`` is numerically zero the gap is undefined; any worse value
    then saturates at 100 (fully Large).
    """
    f_x = np.asarray(f_x, dtype=float)
    f_b = np.asarray(f_b, dtype=float)
    if not (np.all(np.isfinite(f_x)) and np.all(np.isfinite(f_b))):
        raise ValueError("percent_distance needs finite objective values")
    gap = f_x - f_b
    denom = np.abs(f_b)
    tiny = denom <= ALPHA_ZERO_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(tiny, np.where(gap > 0, ALPHA_SATURATED, 0.0), gap * 100.0 / denom)
    alpha = np.maximum(alpha, 0.0)
    return float(alpha) if alpha.ndim == 0 else alpha


def infer_w(k, alpha, k_max, system: FuzzySystem = DEFAULT_SYSTEM):
    return system.infer_w(k, alpha, k_max)


def accel_from_w(w):
    """Equal acceleration constants consistent with inertia ``w``."""
    c = (np.asarray(w, dtype=float) + 1.0) ** 2 / 2.0
    c = float(c) if c.ndim == 0 else c
    return c, c


class FuzzyStrategy:
    """Classic movement with per-particle ``w, c1, c2`` inferred each step.

    The step index fed to the inference is the current one (0 on the first
    move); each particle's ``alpha`` compares its last evaluated value with the
    current global best.
    """

    variant = Variant.PSOF

    def __init__(self, system: Optional[FuzzySystem] = None, infer: Optional[Callable] = None):
        self.system = DEFAULT_SYSTEM if system is None else system
        self.infer = self.system.infer_w if infer is None else infer

    def initialize(self, state: SwarmState, config: SwarmConfig) -> None:
        pass

    def coefficients(self, state: SwarmState, config: SwarmConfig):
        alpha = percent_distance(state.f_x, state.f_b)
        w = np.broadcast_to(np.asarray(self.infer(state.k, alpha, config.k_max), dtype=float), (state.D,))
        c, _ = accel_from_w(w)
        return w, c, c

    def step(self, state: SwarmState, config: SwarmConfig) -> SwarmState:
        return psof_step(state, config, self)


def psof_step(state: SwarmState, config: SwarmConfig, strategy: Optional[FuzzyStrategy] = None) -> SwarmState:
    if state.k >= config.k_max:
        raise ConfigurationError(f"step budget exhausted (k={state.k}, k_max={config.k_max})")
    strategy = FuzzyStrategy() if strategy is None else strategy
    w, c1, c2 = strategy.coefficients(state, config)
    state.extra["w"] = np.array(w)
    return move_particles(state, config.bounds, w, c1, c2)
