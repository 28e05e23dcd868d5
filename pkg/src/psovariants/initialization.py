"""Initial swarm positions.

Both initializers return a (D, d) array; velocities and personal bests are set
up by the engine.
"""

from __future__ import annotations

import numpy as np


def partitioned_init(config, rng) -> np.ndarray:
    """Stratified start: one particle per subinterval in every dimension.

    Each dimension's range is cut into D equal subintervals. For every
    dimension a fresh random permutation assigns particles to subintervals,
    and each particle draws uniformly inside its own.
    """
    lower = config.bounds.lower
    width = config.bounds.width
    D, d = config.D, config.d
    x = np.empty((D, d))
    for i in range(d):
        slot = rng.permutation(D)
        u = rng.uniform(size=D)
        x[:, i] = lower[i] + (slot + u) * (width[i] / D)
    return config.bounds.clip(x)


def uniform_init(config, rng) -> np.ndarray:
    """Independent uniform coordinates over the whole box."""
    u = rng.uniform(size=(config.D, config.d))
    return config.bounds.lower + u * config.bounds.width
