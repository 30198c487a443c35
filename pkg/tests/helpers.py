"""Shared test utilities; oracle-side randomness deliberately avoids the library samplers."""

import numpy as np

from repint.sampling import RngStream


def gen(stream: int = 0, seed: int = 20_260_810) -> np.random.Generator:
    return RngStream(seed, stream).generator()


def random_complex(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    M = random_complex(rng, d, d)
    return (M + M.conj().T) / 2


def wishart_density(rng: np.random.Generator, d: int, k: int | None = None) -> np.ndarray:
    """Random mixed state via the Wishart route (independent of the library samplers)."""
    G = random_complex(rng, d, k or d)
    W = G @ G.conj().T
    return W / np.trace(W).real
