"""Test objectives and a name registry.

The benchmark functions accept a single position of shape (d,) or a batch of
shape (n, d) and reduce over the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Bounds


def vectorized(func):
    func.vectorized = True
    return func


def _positions(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        raise ValueError("position must have at least one coordinate")
    return x


@vectorized
def rosenbrock(x):
    """``sum_i (1 - x_i)**2 + 100 (x_{i+1} - x_i**2)**2``; zero at all ones."""
    x = _positions(x)
    if x.shape[-1] < 2:
        raise ValueError(f"rosenbrock needs d >= 2, got d={x.shape[-1]}")
    head, tail = x[..., :-1], x[..., 1:]
    out = np.sum((1.0 - head) ** 2 + 100.0 * (tail - head**2) ** 2, axis=-1)
    return float(out) if out.ndim == 0 else out


@vectorized
def griewank(x):
    """``1 + sum x_i**2 / 4000 - prod cos(x_i / sqrt(i))`` with 1-based ``i``."""
    x = _positions(x)
    i = np.arange(1, x.shape[-1] + 1)
    out = 1.0 + np.sum(x**2, axis=-1) / 4000.0 - np.prod(np.cos(x / np.sqrt(i)), axis=-1)
    return float(out) if out.ndim == 0 else out


@vectorized
def sphere(x):
    x = _positions(x)
    out = np.sum(x**2, axis=-1)
    return float(out) if out.ndim == 0 else out


def power_loss(V, delta, g, N=None) -> float:
    """Total line loss ``1/2 sum_ij g_ij (V_i^2 + V_j^2 - 2 V_i V_j cos(delta_i - delta_j))``.

    The double sum runs over all ordered bus pairs; ``g`` is the N x N line
    conductance matrix.
    """
    V = np.asarray(V, dtype=float)
    delta = np.asarray(delta, dtype=float)
    g = np.asarray(g, dtype=float)
    N = V.size if N is None else int(N)
    if V.shape != (N,) or delta.shape != (N,) or g.shape != (N, N):
        raise ValueError(
            f"power_loss shapes disagree: N={N}, V{V.shape}, delta{delta.shape}, g{g.shape}"
        )
    terms = V[:, None] ** 2 + V[None, :] ** 2 - 2.0 * np.outer(V, V) * np.cos(delta[:, None] - delta[None, :])
    return 0.5 * float(np.sum(g * terms))


def load_conductance(path) -> np.ndarray:
    """Read a square conductance matrix from a whitespace-separated text file.

    One row per line; ``#`` starts a comment.
    """
    g = np.loadtxt(path, dtype=float, ndmin=2)
    if g.shape[0] != g.shape[1]:
        raise ValueError(f"conductance matrix must be square, got shape {g.shape}")
    return g


def power_loss_objective(g) -> Callable:
    """Objective over ``x = (V_1..V_N, delta_1..delta_N)`` for a fixed grid."""
    g = np.asarray(g, dtype=float)
    N = g.shape[0]

    def objective(x):
        x = np.asarray(x, dtype=float)
        return power_loss(x[:N], x[N:], g, N)

    objective.__name__ = "power_loss"
    return objective


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    func: Callable
    lower: float
    upper: float
    f_star: float = 0.0
    min_d: int = 1

    def bounds(self, d: int) -> Bounds:
        if d < self.min_d:
            raise ValueError(f"{self.name} needs d >= {self.min_d}, got d={d}")
        return Bounds.box(self.lower, self.upper, d)


REGISTRY = {
    "rosenbrock": ObjectiveSpec("rosenbrock", rosenbrock, -10.0, 10.0, 0.0, min_d=2),
    "griewank": ObjectiveSpec("griewank", griewank, -20.0, 20.0, 0.0),
    "sphere": ObjectiveSpec("sphere", sphere, -5.0, 5.0, 0.0),
}


def get_objective(name: str) -> ObjectiveSpec:
    try:
        return REGISTRY[name.lower()]
    except KeyError:
        raise KeyError(f"unknown objective {name!r}; available: {', '.join(sorted(REGISTRY))}") from None


def register(spec: ObjectiveSpec) -> None:
    REGISTRY[spec.name.lower()] = spec
