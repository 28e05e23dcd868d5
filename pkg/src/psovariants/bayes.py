"""Bayesian position update.

Each coordinate of each particle carries a normal belief ``N(mu, sigma2)``.
Every step the belief is conditioned on two noisy "measurements", the
personal best (variance ``sigma2_LX``) and the global best (variance
``sigma2_BY``), which is the scalar Kalman update written with the ratios

    delta_LX = sigma2 / sigma2_LX,   delta_BY = sigma2 / sigma2_BY.

The mean is updated at every step. The variance shrinks only at steps where
the particle's previous position improved on the global best; ``h`` counts
those steps. New positions are drawn from the belief and squeezed into the
search box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Bounds, ConfigurationError, SwarmConfig, SwarmState, Variant


@dataclass(frozen=True)
class BayesParams:
    """Measurement variances and the initial belief variance.

    Fields may be scalars or per-dimension arrays.
    """

    sigma2_LX: np.ndarray
    sigma2_BY: np.ndarray
    sigma2_0: np.ndarray

    def __post_init__(self):
        for name in ("sigma2_LX", "sigma2_BY", "sigma2_0"):
            value = np.asarray(getattr(self, name), dtype=float)
            if not (np.all(np.isfinite(value)) and np.all(value > 0)):
                raise ValueError(f"{name} must be strictly positive and finite, got {value}")
            object.__setattr__(self, name, value if value.ndim else float(value))

    def for_dimensions(self, d: int) -> "BayesParams":
        """Broadcast every field to a length-d array."""
        try:
            return BayesParams(*(np.broadcast_to(np.asarray(getattr(self, n), float), (d,)).copy()
                                 for n in ("sigma2_LX", "sigma2_BY", "sigma2_0")))
        except ValueError:
            raise ConfigurationError(f"Bayes parameters do not match d={d}") from None

    def as_dict(self) -> dict:
        return {n: np.asarray(getattr(self, n)).tolist() for n in ("sigma2_LX", "sigma2_BY", "sigma2_0")}


def default_bayes_params(bounds: Bounds, D: int) -> BayesParams:
    """Expert defaults: ``sigma2_0 = sigma2_LX = width / (2D)``, ``sigma2_BY = width / D``.

    The widths enter unsquared.
    """
    width = np.abs(bounds.upper - bounds.lower)
    return BayesParams(sigma2_LX=width / (2 * D), sigma2_BY=width / D, sigma2_0=width / (2 * D))


def bayes_params_from_dict(data: dict, bounds: Bounds, D: int) -> BayesParams:
    """Override the defaults with any of ``sigma2_LX``, ``sigma2_BY``, ``sigma2_0``.

    Each value is a number (all dimensions) or a list with one entry per
    dimension.
    """
    allowed = {"sigma2_LX", "sigma2_BY", "sigma2_0"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown Bayes config keys: {sorted(unknown)}")
    base = default_bayes_params(bounds, D).as_dict()
    base.update(data)
    try:
        return BayesParams(**base).for_dimensions(bounds.d)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_bayes_params(path, bounds: Bounds, D: int) -> BayesParams:
    with open(Path(path)) as f:
        return bayes_params_from_dict(json.load(f), bounds, D)


def delta_coeffs(sigma2, params: BayesParams):
    sigma2 = np.asarray(sigma2, dtype=float)
    return sigma2 / params.sigma2_LX, sigma2 / params.sigma2_BY


def posterior_mean(x_prev, l, b, delta_LX, delta_BY):
    return (x_prev + delta_LX * l + delta_BY * b) / (1.0 + delta_LX + delta_BY)


def posterior_variance(sigma2_prev, delta_LX, delta_BY):
    return sigma2_prev / (1.0 + delta_LX + delta_BY)


def closed_form(params: BayesParams, h):
    """Variance and both deltas after ``h`` shrinking updates, without recursion."""
    s0 = params.sigma2_0
    d_l0 = s0 / params.sigma2_LX
    d_b0 = s0 / params.sigma2_BY
    denom = 1.0 + h * (d_l0 + d_b0)
    return s0 / denom, d_l0 / denom, d_b0 / denom


def min_initial_variance(epsilon: float, h_kmax: int, params: BayesParams):
    """Smallest ``sigma2_0`` that keeps the variance at or above ``epsilon``
    after ``h_kmax`` shrinking updates."""
    inv = 1.0 / np.asarray(params.sigma2_LX) + 1.0 / np.asarray(params.sigma2_BY)
    denom = 1.0 - epsilon * h_kmax * inv
    if np.any(denom <= 0):
        raise ValueError(
            "no initial variance can keep the floor: need "
            "1/sigma2_LX + 1/sigma2_BY < 1/(epsilon * h_kmax)"
        )
    out = epsilon / denom
    return float(out) if np.ndim(out) == 0 else out


def remap_to_bounds(y, mu, sigma2, lower, upper):
    """Squeeze a belief sample ``y`` into ``[lower, upper]``.

    The interval ``[min(lower, mu - 3 sigma), max(upper, mu + 3 sigma)]`` is
    mapped linearly onto the box; samples outside it go to the nearer bound.
    """
    y = np.asarray(y, dtype=float)
    sigma = np.sqrt(sigma2)
    lo_bar = np.minimum(lower, mu - 3.0 * sigma)
    hi_bar = np.maximum(upper, mu + 3.0 * sigma)
    inside = lower + (y - lo_bar) * (upper - lower) / (hi_bar - lo_bar)
    out = np.where(y < lo_bar, lower, np.where(y > hi_bar, upper, inside))
    # guard against one-ulp overshoot of the linear map
    out = np.clip(out, lower, upper)
    return float(out) if out.ndim == 0 else out


def sample_position_bounded(mu, sigma2, lower, upper, rng):
    """Draw from ``N(mu, sigma2)`` and remap the draw into the box."""
    shape = np.broadcast_shapes(np.shape(mu), np.shape(sigma2))
    z = rng.normal(size=shape if shape else None)
    y = np.asarray(mu) + np.sqrt(sigma2) * z
    return remap_to_bounds(y, mu, sigma2, lower, upper)


def velocity_moments(x_prev, l, b, sigma2_prev, params: BayesParams):
    """Mean and variance of the one-step displacement of the belief mean."""
    d_l, d_b = delta_coeffs(sigma2_prev, params)
    s = 1.0 + d_l + d_b
    mu_v = d_l / s * (l - x_prev) + d_b / s * (b - x_prev)
    sigma2_v = (2.0 + d_l + d_b) * sigma2_prev / s
    return mu_v, sigma2_v


def velocity_mean_recursive(prev_mu_V, delta_LX, delta_BY, delta_l, delta_b):
    """Velocity mean as momentum plus best-position shifts.

    ``delta_l`` and ``delta_b`` are the changes of the personal and global
    best over the last step. Agrees with :func:`velocity_moments` when the
    previous step shrank the variance.
    """
    s = 1.0 + delta_LX + delta_BY
    return ((1.0 - delta_LX - delta_BY) * prev_mu_V + delta_LX * delta_l + delta_BY * delta_b) / s


def velocity_mean_distance(prev_mu_V, delta_LX, delta_BY, gap_l, gap_l_prev, gap_b, gap_b_prev):
    """Velocity mean from the change in distance to each best.

    ``gap_l = l(k-1) - x(k-1)`` and ``gap_l_prev = l(k-2) - x(k-2)``, likewise
    for the global best. Same validity condition as
    :func:`velocity_mean_recursive`.
    """
    s = 1.0 + delta_LX + delta_BY
    return (prev_mu_V + delta_LX * (gap_l - gap_l_prev) + delta_BY * (gap_b - gap_b_prev)) / s


@dataclass
class BayesParticleState:
    mu: np.ndarray
    sigma2: np.ndarray
    h: int


@dataclass
class BayesChains:
    """Belief chains for the whole swarm, row per particle."""

    mu: np.ndarray
    sigma2: np.ndarray
    h: np.ndarray

    @classmethod
    def start(cls, x0: np.ndarray, params: BayesParams) -> "BayesChains":
        D, d = x0.shape
        p = params.for_dimensions(d)
        return cls(mu=np.array(x0, dtype=float), sigma2=np.tile(p.sigma2_0, (D, 1)), h=np.zeros(D, dtype=int))

    @property
    def particles(self) -> list[BayesParticleState]:
        return [BayesParticleState(self.mu[p].copy(), self.sigma2[p].copy(), int(self.h[p]))
                for p in range(self.mu.shape[0])]

    def copy(self) -> "BayesChains":
        return BayesChains(self.mu.copy(), self.sigma2.copy(), self.h.copy())


def psob_step(state: SwarmState, chains: BayesChains, params: BayesParams, config: SwarmConfig):
    """Advance every particle one Bayesian step; updates both arguments in place.

    The new-global-best test compares each particle's last evaluated value
    with the global best as it stood before that evaluation pass. The belief
    means, not the (remapped) sampled positions, carry over between steps.
    """
    if state.k >= config.k_max:
        raise ConfigurationError(f"step budget exhausted (k={state.k}, k_max={config.k_max})")
    bounds = config.bounds
    new_best = state.f_x < state.f_b_prev
    d_l, d_b = delta_coeffs(chains.sigma2, params)
    chains.mu = posterior_mean(chains.mu, state.l, state.b, d_l, d_b)
    chains.sigma2 = np.where(new_best[:, None], posterior_variance(chains.sigma2, d_l, d_b), chains.sigma2)
    chains.h = chains.h + new_best
    x_new = sample_position_bounded(chains.mu, chains.sigma2, bounds.lower, bounds.upper, state.rng)
    state.v = x_new - state.x
    state.x = x_new
    state.k += 1
    return state, chains


class BayesStrategy:
    variant = Variant.PSOB

    def __init__(self, params: Optional[BayesParams] = None):
        self.params = params
        self.chains: Optional[BayesChains] = None
        self._active: Optional[BayesParams] = None

    def initialize(self, state: SwarmState, config: SwarmConfig) -> None:
        params = default_bayes_params(config.bounds, config.D) if self.params is None else self.params
        self._active = params.for_dimensions(config.d)
        self.chains = BayesChains.start(state.x, self._active)
        state.extra["bayes"] = self.chains

    def step(self, state: SwarmState, config: SwarmConfig) -> SwarmState:
        if self.chains is None:
            raise ConfigurationError("BayesStrategy.step called before initialize")
        state, self.chains = psob_step(state, self.chains, self._active, config)
        state.extra["bayes"] = self.chains
        return state
