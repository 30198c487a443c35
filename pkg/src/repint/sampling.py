"""Seeded random generation: Ginibre matrices, Haar unitaries, random channels and states.

Reproducibility contract: every sampler takes an explicit generator, and
:class:`RngStream` builds counter-based generators from (seed, stream_id)
pairs, so independent substreams can run in parallel and any draw can be
replayed bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from ._random import complex_gaussian
from .channels import DensityMatrix, StinespringChannel, kraus_from_stinespring
from .config import FIXED_POINT_DEFAULT, TOL_DEFAULT, FixedPointConfig, ToleranceConfig
from .errors import ConfigError, MaxIterationsExceeded, NumericalError, ValidationError
from .linalg import hermitian_eig, partial_trace_env, qr_unitary
from .spectral import invariant_state

__all__ = [
    "DiracAt",
    "EnsembleSpec",
    "FixedSpectrumHaarBasis",
    "InducedPure",
    "RngStream",
    "asymptotic_eigenvalue_rows",
    "eigenvalue_batch",
    "env_mean",
    "estimate_env_mean",
    "ginibre",
    "haar_unitary",
    "induced_density",
    "induced_eigenvalue_rows",
    "random_channel",
    "random_env_density",
    "sample_asymptotic",
]


@dataclass(frozen=True)
class RngStream:
    """Reproducible substream address: (seed, stream_id).

    Identical pairs reproduce identical sample sequences bit for bit;
    distinct stream_ids give statistically independent streams, suitable for
    embarrassingly parallel sampling.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))


def ginibre(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """m x n matrix of independent standard complex Gaussian entries."""
    if m < 1 or n < 1:
        raise ConfigError("Ginibre dimensions must be >= 1")
    return complex_gaussian(m, n, rng)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary: phase-fixed QR of a Ginibre matrix."""
    Q, _ = qr_unitary(ginibre(n, n, rng))
    return Q


def induced_density(d: int, d_prime: int, rng: np.random.Generator,
                    tol: ToleranceConfig = TOL_DEFAULT) -> DensityMatrix:
    """Partial trace of a Haar-uniform pure state on a d x d_prime product space.

    Realized literally as conjugating the product basis state e_1|f_1 by a
    Haar unitary and tracing out the d_prime-dimensional factor.
    """
    U = haar_unitary(d * d_prime, rng)
    psi = U[:, 0]
    return DensityMatrix.from_matrix(
        partial_trace_env(np.outer(psi, psi.conj()), d, d_prime), tol
    )


# ---------------------------------------------------------------------------
# Environment-state laws.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiracAt:
    """Deterministic law: always the given state."""

    beta: DensityMatrix

    @property
    def dim(self) -> int:
        return self.beta.dim

    def sample(self, rng: np.random.Generator) -> DensityMatrix:
        return self.beta

    def mean_matrix(self) -> np.ndarray:
        return self.beta.matrix


@dataclass(frozen=True)
class FixedSpectrumHaarBasis:
    """Fixed eigenvalue vector, Haar-random eigenbasis: V diag(b) V^*."""

    spectrum: tuple

    def __post_init__(self):
        b = np.asarray(self.spectrum, dtype=float)
        if b.ndim != 1 or b.size < 1 or (b < -1e-12).any() or abs(b.sum() - 1.0) > 1e-9:
            raise ConfigError(f"invalid spectrum {self.spectrum}")
        object.__setattr__(self, "spectrum", tuple(float(x) for x in b))

    @property
    def dim(self) -> int:
        return len(self.spectrum)

    def sample(self, rng: np.random.Generator) -> DensityMatrix:
        V = haar_unitary(self.dim, rng)
        return DensityMatrix((V * np.asarray(self.spectrum)) @ V.conj().T)

    def mean_matrix(self) -> np.ndarray:
        # Haar conjugation twirls any fixed spectrum to the maximally mixed state.
        return np.eye(self.dim, dtype=complex) / self.dim


@dataclass(frozen=True)
class InducedPure:
    """Partial trace of a Haar pure state over an ancilla of dimension ancilla_dim."""

    dim: int
    ancilla_dim: int

    def __post_init__(self):
        if self.dim < 1 or self.ancilla_dim < 1:
            raise ConfigError("InducedPure dimensions must be >= 1")

    def sample(self, rng: np.random.Generator) -> DensityMatrix:
        return induced_density(self.dim, self.ancilla_dim, rng)

    def mean_matrix(self) -> np.ndarray:
        # Unitary invariance of the construction forces the mean to be maximally mixed.
        return np.eye(self.dim, dtype=complex) / self.dim


def random_env_density(d_prime: int, rng: np.random.Generator, law) -> DensityMatrix:
    """One sample from an environment-state law of the declared dimension."""
    if law.dim != d_prime:
        raise ConfigError(f"law dimension {law.dim} does not match d_prime={d_prime}")
    return law.sample(rng)


def env_mean(law) -> np.ndarray | None:
    """Exact mean state of a law, when it provides one."""
    fn = getattr(law, "mean_matrix", None)
    return None if fn is None else fn()


def estimate_env_mean(law, rng: np.random.Generator, n_samples: int = 100_000) -> tuple[np.ndarray, float]:
    """Monte Carlo mean of a law, with a scalar standard-error estimate."""
    acc = np.zeros((law.dim, law.dim), dtype=complex)
    sq = 0.0
    for _ in range(n_samples):
        m = law.sample(rng).matrix
        acc += m
        sq += float(np.linalg.norm(m) ** 2)
    mean = acc / n_samples
    var = max(sq / n_samples - float(np.linalg.norm(mean) ** 2), 0.0)
    return mean, sqrt(var / n_samples)


# ---------------------------------------------------------------------------
# Random channels and the asymptotic ensemble.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleSpec:
    """System dimension d and non-increasing environment spectrum b (summing to 1)."""

    d: int
    b: tuple

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("system dimension must be >= 1")
        arr = np.asarray(self.b, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ConfigError("b must be a nonempty vector")
        if (arr < -1e-15).any():
            raise ConfigError("b entries must be non-negative")
        if (np.diff(arr) > 1e-15).any():
            raise ConfigError("b must be sorted non-increasing")
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ConfigError(f"b must sum to 1, got {arr.sum()!r}")
        object.__setattr__(self, "b", tuple(float(x) for x in arr))

    @property
    def d_prime(self) -> int:
        return len(self.b)


def random_channel(spec: EnsembleSpec, rng: np.random.Generator,
                   tol: ToleranceConfig = TOL_DEFAULT) -> StinespringChannel:
    """Haar-random interaction unitary with the fixed environment state diag(b).

    The eigenbasis of the environment state is irrelevant for the induced
    ensemble (Haar invariance absorbs any rotation), so the canonical
    diagonal representative is used.
    """
    beta = DensityMatrix(np.diag(np.asarray(spec.b, dtype=complex)))
    U = haar_unitary(spec.d * spec.d_prime, rng)
    return StinespringChannel.build(U, beta, spec.d, tol)


def sample_asymptotic(
    spec: EnsembleSpec,
    rng: np.random.Generator,
    cfg: FixedPointConfig = FIXED_POINT_DEFAULT,
    retry_cap: int = 5,
    tol: ToleranceConfig = TOL_DEFAULT,
) -> tuple[DensityMatrix, int]:
    """One draw from the asymptotic induced ensemble: the invariant state of a random channel.

    Channels without a numerically reachable unique invariant state occur
    with probability zero; if the fixed-point search still fails, a fresh
    unitary is drawn (up to retry_cap times) and the retry count is
    returned alongside the sample.
    """
    retries = 0
    while True:
        ch = kraus_from_stinespring(random_channel(spec, rng, tol), tol)
        try:
            state, _ = invariant_state(ch, cfg, tol=tol)
            return state, retries
        except MaxIterationsExceeded:
            retries += 1
            if retries > retry_cap:
                raise NumericalError(
                    f"invariant-state search failed {retry_cap + 1} times in a row; "
                    "tolerance settings are likely too tight"
                ) from None


def _ascending_spectrum(state: DensityMatrix, tol: ToleranceConfig) -> np.ndarray:
    vals = hermitian_eig(state.matrix, tol).eigenvalues
    if vals[0] < -tol.psd:
        raise ValidationError(f"state has negative eigenvalue {vals[0]}")
    return np.clip(vals, 0.0, None)


def eigenvalue_batch(samples, tol: ToleranceConfig = TOL_DEFAULT) -> list[np.ndarray]:
    """Ascending eigenvalue vector of each state in a batch.

    Eigenvalues are clipped at zero after a PSD check, so rows are exactly
    non-negative; each vector sums to 1 up to the trace tolerance.
    """
    samples = list(samples)
    if not samples:
        raise ValidationError("eigenvalue_batch needs at least one sample")
    return [_ascending_spectrum(s, tol) for s in samples]


# ---------------------------------------------------------------------------
# Batch row generation (one RNG stream per row, so results are independent
# of how rows are distributed over workers).
# ---------------------------------------------------------------------------


def asymptotic_eigenvalue_rows(
    spec: EnsembleSpec,
    seed: int,
    start: int,
    count: int,
    cfg: FixedPointConfig = FIXED_POINT_DEFAULT,
    tol: ToleranceConfig = TOL_DEFAULT,
) -> tuple[list[np.ndarray], int]:
    """Eigenvalue rows start..start+count-1 of an asymptotic-ensemble batch."""
    rows = []
    retries = 0
    for i in range(start, start + count):
        state, r = sample_asymptotic(spec, RngStream(seed, i).generator(), cfg, tol=tol)
        retries += r
        rows.append(_ascending_spectrum(state, tol))
    return rows, retries


def induced_eigenvalue_rows(
    d: int,
    d_prime: int,
    seed: int,
    start: int,
    count: int,
    tol: ToleranceConfig = TOL_DEFAULT,
) -> tuple[list[np.ndarray], int]:
    """Eigenvalue rows start..start+count-1 of an induced-ensemble batch."""
    rows = []
    for i in range(start, start + count):
        state = induced_density(d, d_prime, RngStream(seed, i).generator(), tol)
        rows.append(_ascending_spectrum(state, tol))
    return rows, 0
