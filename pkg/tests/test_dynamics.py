from math import sqrt

import numpy as np
import pytest

from repint.channels import DensityMatrix, StinespringChannel, kraus_from_stinespring
from repint.dynamics import (
    DRIFT_TOL,
    _drift_guard,
    convergence_diagnostics,
    geometric_checkpoints,
    run_fixed,
    run_iid_unitary,
    run_random_env,
    tilde_unitary_sequence,
    twirl_mean,
)
from repint.errors import DimensionMismatchError, DriftError, ValidationError
from repint.fixtures import SIGMA_0, SIGMA_2, dephasing_pauli_channel
from repint.linalg import frobenius, system_env_tensor, trace_norm
from repint.sampling import (
    DiracAt,
    EnsembleSpec,
    FixedSpectrumHaarBasis,
    RngStream,
    haar_unitary,
    random_channel,
)
from repint.spectral import invariant_state

from helpers import gen, wishart_density


class TestCheckpoints:
    def test_geometric_layout(self):
        assert geometric_checkpoints(10) == (1, 2, 4, 8, 10)
        assert geometric_checkpoints(8) == (1, 2, 4, 8)
        assert geometric_checkpoints(1) == (1,)

    def test_explicit_checkpoints_keep_final_step(self):
        traj = run_fixed(dephasing_pauli_channel(), DensityMatrix.maximally_mixed(2), 7, checkpoints=(3,))
        assert traj.steps == (0, 3, 7)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            run_fixed(dephasing_pauli_channel(), DensityMatrix.maximally_mixed(2), 5, checkpoints=(9,))


class TestRunFixed:
    def test_pauli_closed_form(self):
        traj = run_fixed(dephasing_pauli_channel(), DensityMatrix((SIGMA_0 + SIGMA_2) / 2),
                         20, checkpoints=range(1, 21))
        for n, state in zip(traj.steps, traj.states):
            expected = (SIGMA_0 + (-1) ** n * SIGMA_2) / 2
            assert frobenius(state.matrix - expected) <= 1e-12

    def test_class_c_channel_converges(self):
        ch = kraus_from_stinespring(random_channel(EnsembleSpec(2, (1.0, 0.0)), gen(100)))
        rho_inf, _ = invariant_state(ch)
        traj = run_fixed(ch, DensityMatrix.pure([1.0, 0.0]), 10_000, target=rho_inf)
        assert traj.distances[-1] <= 1e-8
        decreasing_tail = traj.distances[-4:]
        assert all(a >= b - 1e-12 for a, b in zip(decreasing_tail, decreasing_tail[1:]))

    def test_fixed_point_start_stays_constant(self):
        ch = kraus_from_stinespring(random_channel(EnsembleSpec(2, (1.0, 0.0)), gen(101)))
        rho_inf, _ = invariant_state(ch)
        traj = run_fixed(ch, rho_inf, 50)
        for state in traj.states:
            assert trace_norm(state.matrix - rho_inf.matrix) <= 1e-9

    def test_states_pass_invariants_at_checkpoints(self):
        ch = kraus_from_stinespring(random_channel(EnsembleSpec(2, (0.75, 0.25)), gen(102)))
        traj = run_fixed(ch, DensityMatrix.pure([0.0, 1.0]), 64)
        for state, cesaro in zip(traj.states, traj.cesaro):
            state.validate()
            if cesaro is not None:
                cesaro.validate()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            run_fixed(dephasing_pauli_channel(), DensityMatrix.maximally_mixed(3), 5)


class TestRunRandomEnv:
    def test_dirac_law_matches_run_fixed_bitwise(self):
        rng = gen(103)
        beta = DensityMatrix(wishart_density(rng, 2))
        st = StinespringChannel.build(haar_unitary(4, rng), beta, 2)
        ch = kraus_from_stinespring(st)
        rho0 = DensityMatrix.pure([1.0, 0.0])
        a = run_fixed(ch, rho0, 40)
        b = run_random_env(st.U, DiracAt(beta), rho0, 40)
        assert a.steps == b.steps
        for x, y in zip(a.states, b.states):
            assert np.array_equal(x.matrix, y.matrix)
        for x, y in zip(a.cesaro[1:], b.cesaro[1:]):
            assert np.array_equal(x.matrix, y.matrix)

    def test_chaotic_environment_mean_drives_to_chaotic_state(self):
        U = haar_unitary(4, gen(104))
        traj = run_random_env(U, FixedSpectrumHaarBasis((1.0, 0.0)),
                              DensityMatrix.pure([1.0, 0.0]), 2_000,
                              gen(105), checkpoints=(2_000,))
        assert trace_norm(traj.final_cesaro.matrix - np.eye(2) / 2) <= 0.12

    def test_ergodic_mean_tracks_mean_channel_target(self):
        rng = gen(106)
        U = haar_unitary(4, rng)
        law = FixedSpectrumHaarBasis((0.8, 0.2))
        mean_channel = kraus_from_stinespring(
            StinespringChannel.build(U, DensityMatrix.maximally_mixed(2), 2)
        )
        theta, _ = invariant_state(mean_channel)
        traj = run_random_env(U, law, DensityMatrix.pure([1.0, 0.0]), 4_000,
                              gen(107), checkpoints=(500, 4_000), target=theta)
        assert traj.cesaro_distances[-1] <= 0.1

    def test_needs_rng_for_random_law(self):
        with pytest.raises(ValidationError):
            run_random_env(np.eye(4), FixedSpectrumHaarBasis((1.0, 0.0)),
                           DensityMatrix.maximally_mixed(2), 10)

    def test_wrong_unitary_size(self):
        with pytest.raises(DimensionMismatchError):
            run_random_env(np.eye(6), DiracAt(DensityMatrix.maximally_mixed(2)),
                           DensityMatrix.maximally_mixed(2), 10)


class TestRunIidUnitary:
    def test_cesaro_mean_approaches_chaotic_state(self):
        law = DiracAt(DensityMatrix.pure([1.0, 0.0]))
        traj = run_iid_unitary(law, DensityMatrix.pure([1.0, 0.0]), 4_000,
                               gen(108), checkpoints=(4_000,))
        assert trace_norm(traj.final_cesaro.matrix - np.eye(2) / 2) <= 3 / sqrt(4_000)

    def test_trivial_environment_random_unitary_orbit(self):
        law = DiracAt(DensityMatrix.maximally_mixed(1))
        traj = run_iid_unitary(law, DensityMatrix.pure([1.0, 0.0, 0.0]), 4_000,
                               gen(109), checkpoints=(4_000,))
        assert trace_norm(traj.final_cesaro.matrix - np.eye(3) / 3) <= 0.15

    def test_deterministic_periodic_environment_sequence(self):
        states = [DensityMatrix.pure([1.0, 0.0]), DensityMatrix.pure([0.0, 1.0])]
        traj = run_iid_unitary(lambda n, rng: states[n % 2], DensityMatrix.maximally_mixed(2),
                               4_000, gen(110), checkpoints=(4_000,))
        assert trace_norm(traj.final_cesaro.matrix - np.eye(2) / 2) <= 0.1

    def test_environment_dimension_must_stay_fixed(self):
        seq = [DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(3)]
        with pytest.raises(DimensionMismatchError):
            run_iid_unitary(lambda n, rng: seq[n - 1], DensityMatrix.maximally_mixed(2),
                            2, gen(111))

    def test_cesaro_error_shrinks_on_seed_average(self):
        law = DiracAt(DensityMatrix.pure([1.0, 0.0]))
        target = np.eye(2) / 2
        errs_n, errs_2n = [], []
        for i in range(10):
            traj = run_iid_unitary(law, DensityMatrix.pure([1.0, 0.0]), 1_000,
                                   RngStream(112, i).generator(), checkpoints=(500, 1_000))
            by = dict(zip(traj.steps, traj.cesaro))
            errs_n.append(trace_norm(by[500].matrix - target))
            errs_2n.append(trace_norm(by[1_000].matrix - target))
        spread = np.std(errs_2n, ddof=1) / sqrt(10)
        assert np.mean(errs_2n) <= np.mean(errs_n) + 3 * spread


class TestTwirlMean:
    def test_chaotic_inputs_are_exact_fixed_point(self):
        out = twirl_mean([DensityMatrix.maximally_mixed(2)] * 4, gen(113))
        assert trace_norm(out.matrix - np.eye(2) / 2) <= 1e-12

    def test_single_element_keeps_spectrum(self):
        rho = DensityMatrix(wishart_density(gen(114), 2))
        out = twirl_mean([rho], gen(115))
        assert np.allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(rho.matrix), atol=1e-12)

    def test_many_pure_states_average_to_chaotic(self):
        rng = gen(116)
        taus = [DensityMatrix.pure([1.0, 0.0])] * 10_000
        out = twirl_mean(taus, rng)
        assert trace_norm(out.matrix - np.eye(2) / 2) <= 0.1

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            twirl_mean([], gen(117))


class TestTildeUnitarySequence:
    def test_identity_conjugation_is_noop(self):
        rng = gen(118)
        us = [haar_unitary(4, rng) for _ in range(3)]
        tildes = tilde_unitary_sequence(us, [np.eye(2)] * 3)
        for U, T in zip(us, tildes):
            assert frobenius(U - T) <= 1e-14

    def test_single_element(self):
        rng = gen(119)
        U, V = haar_unitary(4, rng), haar_unitary(2, rng)
        tildes = tilde_unitary_sequence([U], [V])
        assert frobenius(tildes[0] - system_env_tensor(V, np.eye(2)) @ U) <= 1e-14

    def test_outputs_are_unitary(self):
        rng = gen(120)
        tildes = tilde_unitary_sequence([haar_unitary(4, rng) for _ in range(5)],
                                        [haar_unitary(2, rng) for _ in range(5)])
        for T in tildes:
            assert frobenius(T.conj().T @ T - np.eye(4)) <= 1e-12

    def test_conjugated_trajectory_identity(self):
        rng = gen(121)
        us = [haar_unitary(4, rng) for _ in range(5)]
        vs = [haar_unitary(2, rng) for _ in range(5)]
        betas = [wishart_density(rng, 2) for _ in range(5)]
        tildes = tilde_unitary_sequence(us, vs)
        rho = wishart_density(rng, 2)
        plain, conj = rho, rho

        def step(U, beta, r):
            sigma = U @ system_env_tensor(r, beta) @ U.conj().T
            return sigma.reshape(2, 2, 2, 2)[0, :, 0, :] + sigma.reshape(2, 2, 2, 2)[1, :, 1, :]

        for n in range(5):
            plain = step(us[n], betas[n], plain)
            conj = step(tildes[n], betas[n], conj)
            assert frobenius(conj - vs[n] @ plain @ vs[n].conj().T) <= 1e-12

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            tilde_unitary_sequence([np.eye(4)], [np.eye(2), np.eye(2)])


class TestDiagnosticsAndGuards:
    def test_constant_trajectory_at_target(self):
        ch = dephasing_pauli_channel()
        rho = DensityMatrix.maximally_mixed(2)
        traj = run_fixed(ch, rho, 16)
        diag = convergence_diagnostics(traj, rho)
        assert all(dist <= 1e-14 for _, dist in diag)

    def test_pauli_distances_alternate_at_one(self):
        traj = run_fixed(dephasing_pauli_channel(), DensityMatrix((SIGMA_0 + SIGMA_2) / 2), 10)
        diag = convergence_diagnostics(traj, DensityMatrix.maximally_mixed(2))
        assert all(dist == pytest.approx(1.0, abs=1e-12) for step, dist in diag if step >= 1)

    def test_final_distance_matches_trajectory_field(self):
        ch = kraus_from_stinespring(random_channel(EnsembleSpec(2, (1.0, 0.0)), gen(122)))
        target, _ = invariant_state(ch)
        traj = run_fixed(ch, DensityMatrix.pure([1.0, 0.0]), 256, target=target)
        diag = convergence_diagnostics(traj, target)
        assert diag[-1][1] == pytest.approx(traj.distances[-1], abs=1e-15)

    def test_drift_guard_renormalizes(self):
        rho = np.diag([0.5, 0.5]) + 1e-12 * np.array([[0, 1], [0, 0]])
        out = _drift_guard(rho, 1000)
        assert abs(np.trace(out) - 1.0) <= 1e-15
        assert frobenius(out - out.conj().T) == 0.0

    def test_drift_guard_aborts_on_large_drift(self):
        rho = np.diag([0.7, 0.7])  # trace drift 0.4 >> tolerance
        assert 0.4 > DRIFT_TOL
        with pytest.raises(DriftError):
            _drift_guard(rho, 2000)

    def test_long_run_stays_normalized(self):
        ch = kraus_from_stinespring(random_channel(EnsembleSpec(2, (0.75, 0.25)), gen(123)))
        traj = run_fixed(ch, DensityMatrix.pure([1.0, 0.0]), 5_000)
        assert abs(np.trace(traj.final_state.matrix) - 1.0) <= 1e-12
