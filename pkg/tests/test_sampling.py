import random as stdlib_random
from math import sqrt

import numpy as np
import pytest
from scipy.stats import ks_2samp

from repint.channels import DensityMatrix, StinespringChannel, kraus_from_stinespring
from repint.errors import ConfigError, ValidationError
from repint.linalg import frobenius, trace_norm
from repint.sampling import (
    DiracAt,
    EnsembleSpec,
    FixedSpectrumHaarBasis,
    InducedPure,
    RngStream,
    asymptotic_eigenvalue_rows,
    eigenvalue_batch,
    env_mean,
    estimate_env_mean,
    ginibre,
    haar_unitary,
    induced_density,
    random_channel,
    random_env_density,
    sample_asymptotic,
)
from repint.spectral import invariant_state

from helpers import gen


class TestRngStream:
    def test_bitwise_replay(self):
        a = ginibre(3, 3, RngStream(99, 5).generator())
        b = ginibre(3, 3, RngStream(99, 5).generator())
        assert np.array_equal(a, b)

    def test_streams_are_distinct(self):
        a = ginibre(3, 3, RngStream(99, 0).generator())
        b = ginibre(3, 3, RngStream(99, 1).generator())
        assert not np.allclose(a, b)

    def test_seeds_are_distinct(self):
        a = ginibre(3, 3, RngStream(1).generator())
        b = ginibre(3, 3, RngStream(2).generator())
        assert not np.allclose(a, b)


class TestGinibre:
    def test_moments(self):
        n = 10_000
        g = ginibre(n, 1, gen(70)).reshape(-1)
        assert abs(g.mean()) <= 4 / sqrt(n)
        assert abs(np.mean(np.abs(g) ** 2) - 1.0) <= 0.05

    def test_real_imag_parts_balanced(self):
        g = ginibre(100, 100, gen(71)).reshape(-1)
        assert abs(np.var(g.real) - 0.5) <= 0.02
        assert abs(np.var(g.imag) - 0.5) <= 0.02

    def test_rejects_bad_shape(self):
        with pytest.raises(ConfigError):
            ginibre(0, 2, gen(72))


class TestHaarUnitary:
    @pytest.mark.parametrize("n", [1, 2, 4, 6])
    def test_unitarity(self, n):
        rng = gen(73)
        for _ in range(20):
            U = haar_unitary(n, rng)
            assert frobenius(U.conj().T @ U - np.eye(n)) <= 1e-12

    def test_scalar_case_uniform_phase(self):
        rng = gen(74)
        samples = np.array([haar_unitary(1, rng)[0, 0] for _ in range(4_000)])
        assert np.allclose(np.abs(samples), 1.0)
        assert abs(samples.mean()) <= 4 / sqrt(4_000)

    def test_second_moment(self):
        n, count = 2, 4_000
        rng = gen(75)
        mods = np.array([np.abs(haar_unitary(n, rng)) ** 2 for _ in range(count)])
        mean = mods.mean(axis=0)
        se = mods.std(axis=0, ddof=1) / sqrt(count)
        assert (np.abs(mean - 1 / n) <= 3 * se).all()

    def test_left_invariance_of_moments(self):
        n, count = 3, 4_000
        rng = gen(76)
        V = haar_unitary(n, rng)
        mods = np.array([np.abs(V @ haar_unitary(n, rng)) ** 2 for _ in range(count)])
        mean = mods.mean(axis=0)
        se = mods.std(axis=0, ddof=1) / sqrt(count)
        assert (np.abs(mean - 1 / n) <= 3 * se).all()


class TestInducedDensity:
    def test_dimension_one_system(self):
        assert np.allclose(induced_density(1, 3, gen(77)).matrix, [[1.0]])

    def test_trivial_environment_gives_pure_state(self):
        rho = induced_density(3, 1, gen(78))
        vals = np.linalg.eigvalsh(rho.matrix)
        assert abs(vals[-1] - 1.0) <= 1e-12 and np.abs(vals[:-1]).max() <= 1e-12

    def test_mean_is_maximally_mixed(self):
        rng = gen(79)
        acc = np.zeros((2, 2), dtype=complex)
        count = 10_000
        for _ in range(count):
            acc += induced_density(2, 2, rng).matrix
        assert np.abs(acc / count - np.eye(2) / 2).max() <= 0.02


class TestEnvLaws:
    def test_dirac(self):
        beta = DensityMatrix.maximally_mixed(3)
        law = DiracAt(beta)
        assert random_env_density(3, gen(80), law) is beta
        assert np.array_equal(env_mean(law), beta.matrix)

    def test_fixed_spectrum_preserves_eigenvalues(self):
        law = FixedSpectrumHaarBasis((0.6, 0.3, 0.1))
        sample = random_env_density(3, gen(81), law)
        vals = np.sort(np.linalg.eigvalsh(sample.matrix))[::-1]
        assert np.allclose(vals, [0.6, 0.3, 0.1], atol=1e-12)
        assert np.allclose(env_mean(law), np.eye(3) / 3)

    def test_induced_pure_mean(self):
        law = InducedPure(2, 2)
        assert np.allclose(env_mean(law), np.eye(2) / 2)
        mean, se = estimate_env_mean(law, gen(82), n_samples=4_000)
        assert np.abs(mean - np.eye(2) / 2).max() <= 5 * max(se, 1e-3)

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            random_env_density(2, gen(83), DiracAt(DensityMatrix.maximally_mixed(3)))

    def test_invalid_spectrum(self):
        with pytest.raises(ConfigError):
            FixedSpectrumHaarBasis((0.5, 0.2))


class TestEnsembleSpec:
    def test_valid(self):
        spec = EnsembleSpec(2, (0.75, 0.25))
        assert spec.d_prime == 2

    def test_rejects_increasing(self):
        with pytest.raises(ConfigError):
            EnsembleSpec(2, (0.25, 0.75))

    def test_rejects_bad_sum(self):
        with pytest.raises(ConfigError):
            EnsembleSpec(2, (0.7, 0.2))

    def test_rejects_negative(self):
        with pytest.raises(ConfigError):
            EnsembleSpec(2, (1.5, -0.5))


class TestRandomChannel:
    def test_uniform_spectrum_gives_chaotic_invariant_state(self):
        spec = EnsembleSpec(2, (0.5, 0.5))
        for i in range(5):
            ch = kraus_from_stinespring(random_channel(spec, gen(840 + i)))
            state, _ = invariant_state(ch)
            assert trace_norm(state.matrix - np.eye(2) / 2) <= 1e-10

    def test_pure_spectrum_gives_two_operators(self):
        ch = kraus_from_stinespring(random_channel(EnsembleSpec(2, (1.0, 0.0)), gen(85)))
        assert len(ch.operators) == 2

    def test_deterministic_in_seed(self):
        spec = EnsembleSpec(2, (0.75, 0.25))
        a = random_channel(spec, RngStream(5).generator())
        b = random_channel(spec, RngStream(5).generator())
        assert np.array_equal(a.U, b.U)
        assert np.array_equal(a.beta.matrix, b.beta.matrix)


class TestSampleAsymptotic:
    def test_uniform_b_is_dirac_at_chaotic_state(self):
        spec = EnsembleSpec(3, (1 / 3, 1 / 3, 1 / 3))
        for i in range(3):
            state, retries = sample_asymptotic(spec, gen(860 + i))
            assert trace_norm(state.matrix - np.eye(3) / 3) <= 1e-10
            assert retries == 0

    def test_dimension_one(self):
        state, _ = sample_asymptotic(EnsembleSpec(1, (1.0,)), gen(87))
        assert np.allclose(state.matrix, [[1.0]])

    def test_mean_is_maximally_mixed(self):
        spec = EnsembleSpec(2, (1.0, 0.0))
        rows, retries = asymptotic_eigenvalue_rows(spec, 88, 0, 10_000)
        assert retries == 0
        acc = np.zeros((2, 2))
        for i in range(0, 10_000, 10):  # entrywise mean needs the full matrices
            state, _ = sample_asymptotic(spec, RngStream(88, i).generator())
            acc += state.matrix.real
        assert np.abs(acc / 1_000 - np.eye(2) / 2).max() <= 0.05


class TestEigenvalueBatch:
    def test_maximally_mixed(self):
        rows = eigenvalue_batch([DensityMatrix.maximally_mixed(4)])
        assert np.allclose(rows[0], 0.25)

    def test_pure_states(self):
        rows = eigenvalue_batch([DensityMatrix.pure([0.0, 1.0, 0.0])])
        assert np.allclose(rows[0], [0.0, 0.0, 1.0])
        assert (rows[0] >= 0.0).all()

    def test_rows_sum_to_one(self):
        rng = gen(89)
        samples = [induced_density(3, 3, rng) for _ in range(50)]
        for row in eigenvalue_batch(samples):
            assert abs(row.sum() - 1.0) <= 1e-10
            assert (np.diff(row) >= 0).all()

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            eigenvalue_batch([])

    def test_max_eigenvalue_matches_independent_oracle(self):
        # library route
        count = 4_000
        rng = gen(90)
        lib = np.array([np.linalg.eigvalsh(induced_density(2, 2, rng).matrix)[-1] for _ in range(count)])
        # stdlib-random Wishart oracle
        prng = stdlib_random.Random(90)
        oracle = np.empty(count)
        for i in range(count):
            G = np.array([[complex(prng.gauss(0, 1), prng.gauss(0, 1)) for _ in range(2)] for _ in range(2)])
            W = G @ G.conj().T
            oracle[i] = np.linalg.eigvalsh(W / np.trace(W).real)[-1]
        se = sqrt(lib.var(ddof=1) / count + oracle.var(ddof=1) / count)
        assert abs(lib.mean() - oracle.mean()) <= 3 * se


class TestDistributionInvariances:
    def _lambda_max_batch(self, seed_base, count=1_000):
        spec = EnsembleSpec(2, (1.0, 0.0))
        out = np.empty(count)
        for i in range(count):
            state, _ = sample_asymptotic(spec, RngStream(seed_base, i).generator())
            out[i] = np.linalg.eigvalsh(state.matrix)[-1]
        return out

    def test_unitary_invariance_at_eigenvalue_level(self):
        a = self._lambda_max_batch(91)
        V = haar_unitary(2, gen(92))
        spec = EnsembleSpec(2, (1.0, 0.0))
        b = np.empty(1_000)
        for i in range(1_000):
            state, _ = sample_asymptotic(spec, RngStream(93, i).generator())
            rotated = V @ state.matrix @ V.conj().T
            b[i] = np.linalg.eigvalsh(rotated)[-1]
        assert ks_2samp(a, b).pvalue > 0.01

    def test_environment_eigenbasis_irrelevant(self):
        a = self._lambda_max_batch(94)
        W = haar_unitary(2, gen(95))
        beta = DensityMatrix(W @ np.diag([1.0, 0.0]).astype(complex) @ W.conj().T)
        b = np.empty(1_000)
        for i in range(1_000):
            rng = RngStream(96, i).generator()
            ch = kraus_from_stinespring(StinespringChannel.build(haar_unitary(4, rng), beta, 2))
            state, _ = invariant_state(ch)
            b[i] = np.linalg.eigvalsh(state.matrix)[-1]
        assert ks_2samp(a, b).pvalue > 0.01
