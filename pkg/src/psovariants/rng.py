"""Seeded random stream shared by every swarm variant.

All randomness in a run comes from one :class:`RandomStream`. It wraps numpy's
Philox4x32-10 bit generator, a counter-based generator whose output for a given
key is fixed by its published algorithm and does not depend on the platform.
Uniform doubles use numpy's 53-bit conversion; normal variates use the
Box-Muller transform on two uniforms so that the normal path does not depend on
numpy's ziggurat tables either.
"""

from __future__ import annotations

import numpy as np


class RandomStream:
    """Deterministic source of uniforms, permutations and normals.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed. Two streams with the same seed produce the same
        sequence of values for the same sequence of calls.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.Philox(key=seed))

    def uniform(self, low=0.0, high=1.0, size=None):
        """Uniform draws on ``[low, high)``."""
        u = self._gen.random(size)
        return low + (high - low) * u

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of ``0..n-1``."""
        return self._gen.permutation(n)

    def normal(self, mean=0.0, std=1.0, size=None):
        """Normal draws via Box-Muller, consuming two uniforms per value."""
        shape = () if size is None else (size if isinstance(size, tuple) else (size,))
        u = self._gen.random(shape + (2,))
        # 1 - u lies in (0, 1], so the log is finite
        radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))
        z = radius * np.cos(2.0 * np.pi * u[..., 1])
        out = mean + std * z
        return float(out) if size is None and np.ndim(out) == 0 else out

    def __repr__(self):
        return f"RandomStream(seed={self.seed})"
