"""Shared low-level random primitives (no internal dependencies)."""

from __future__ import annotations

import numpy as np


def complex_gaussian(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """m x n matrix of standard complex Gaussians (E|g|^2 = 1).

    Built from uniforms in polar (Box-Muller) form, so the stream of draws
    is pinned to the generator's uniform output and stays reproducible
    across library versions.
    """
    u1 = rng.random((m, n))
    u2 = rng.random((m, n))
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)


def haar_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vector in C^d (a normalized complex Gaussian vector)."""
    v = complex_gaussian(d, 1, rng).reshape(-1)
    return v / np.linalg.norm(v)
