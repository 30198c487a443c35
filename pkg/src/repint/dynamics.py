"""Repeated-interaction dynamics: fixed channels, random environment states, i.i.d. unitaries.

Each runner produces a :class:`Trajectory`: full states are kept only at
geometrically spaced checkpoints (memory stays bounded for long runs) while
the running ergodic average is accumulated every step.  The three schemes
share one evolution loop that re-Hermitizes and renormalizes the running
state every ``DRIFT_PERIOD`` steps, aborting if accumulated rounding drift
ever exceeds ``DRIFT_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    DensityMatrix,
    KrausChannel,
    StinespringChannel,
    apply_kraus,
    kraus_from_stinespring,
)
from .config import TOL_DEFAULT, ToleranceConfig
from .errors import DimensionMismatchError, DriftError, ValidationError
from .linalg import as_square, frobenius, hermitize, partial_trace_env, system_env_tensor, trace_norm
from .sampling import haar_unitary

__all__ = [
    "Trajectory",
    "convergence_diagnostics",
    "geometric_checkpoints",
    "run_fixed",
    "run_iid_unitary",
    "run_random_env",
    "tilde_unitary_sequence",
    "twirl_mean",
]

DRIFT_PERIOD = 1000
DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class Trajectory:
    """States and running ergodic means of a repeated-interaction run.

    ``steps`` are the checkpoint step numbers (0, geometric points, final);
    ``states[i]`` is the state after steps[i] interactions; ``cesaro[i]`` is
    the mean of states 1..steps[i] (None at step 0).  ``distances`` and
    ``cesaro_distances`` hold trace-norm distances to ``target`` when a
    target was declared at run time.
    """

    d: int
    n_steps: int
    steps: tuple
    states: tuple
    cesaro: tuple
    target: DensityMatrix | None = None
    distances: tuple | None = None
    cesaro_distances: tuple | None = None

    @property
    def final_state(self) -> DensityMatrix:
        return self.states[-1]

    @property
    def final_cesaro(self) -> DensityMatrix:
        if self.cesaro[-1] is None:
            raise ValidationError("trajectory has no steps, so no ergodic mean")
        return self.cesaro[-1]


def geometric_checkpoints(n_steps: int) -> tuple:
    """Checkpoints 1, 2, 4, 8, ... plus the final step."""
    pts = []
    k = 1
    while k < n_steps:
        pts.append(k)
        k *= 2
    if n_steps >= 1:
        pts.append(n_steps)
    return tuple(sorted(set(pts)))


def _drift_guard(rho: np.ndarray, step: int) -> np.ndarray:
    drift = frobenius(rho - hermitize(rho)) + abs(np.trace(rho) - 1.0)
    if drift > DRIFT_TOL:
        raise DriftError(
            f"numerical drift {drift:.3e} exceeded {DRIFT_TOL:g} at step {step}; "
            "the running state is no longer trustworthy"
        )
    rho = hermitize(rho)
    return rho / np.trace(rho).real


def _evolve(step_fn, rho0: DensityMatrix, n_steps: int, checkpoints,
            target: DensityMatrix | None, tol: ToleranceConfig) -> Trajectory:
    if n_steps < 1:
        raise ValidationError("n_steps must be >= 1")
    marks = geometric_checkpoints(n_steps) if checkpoints is None else tuple(sorted(set(int(c) for c in checkpoints)))
    if any(c < 1 or c > n_steps for c in marks):
        raise ValidationError(f"checkpoints must lie in 1..{n_steps}")
    if not marks or marks[-1] != n_steps:
        marks = tuple(list(marks) + [n_steps])
    mark_set = set(marks)

    rho = rho0.validate(tol).matrix.astype(complex)
    acc = np.zeros_like(rho)
    steps = [0]
    states = [rho0]
    cesaro: list = [None]
    for n in range(1, n_steps + 1):
        rho = step_fn(n, rho)
        acc += rho
        if n % DRIFT_PERIOD == 0:
            rho = _drift_guard(rho, n)
        if n in mark_set:
            steps.append(n)
            states.append(DensityMatrix.from_matrix(rho, tol))
            cesaro.append(DensityMatrix.from_matrix(acc / n, tol))

    distances = None
    cesaro_distances = None
    if target is not None:
        if target.dim != rho0.dim:
            raise DimensionMismatchError("target dimension does not match the state")
        distances = tuple(trace_norm(s.matrix - target.matrix) for s in states)
        cesaro_distances = tuple(
            None if c is None else trace_norm(c.matrix - target.matrix) for c in cesaro
        )
    return Trajectory(
        d=rho0.dim,
        n_steps=n_steps,
        steps=tuple(steps),
        states=tuple(states),
        cesaro=tuple(cesaro),
        target=target,
        distances=distances,
        cesaro_distances=cesaro_distances,
    )


def run_fixed(ch: KrausChannel, rho0: DensityMatrix, n_steps: int,
              checkpoints=None, target: DensityMatrix | None = None,
              tol: ToleranceConfig = TOL_DEFAULT) -> Trajectory:
    """Iterate a fixed channel: rho_n = ch(rho_{n-1})."""
    if ch.d != rho0.dim:
        raise DimensionMismatchError("channel and state dimensions differ")
    return _evolve(lambda n, rho: apply_kraus(ch, rho), rho0, n_steps, checkpoints, target, tol)


def _stinespring_step(U: np.ndarray, beta: np.ndarray, rho: np.ndarray, d: int, d_prime: int) -> np.ndarray:
    sigma = U @ system_env_tensor(rho, beta) @ U.conj().T
    return partial_trace_env(sigma, d, d_prime)


def run_random_env(U, env_law, rho0: DensityMatrix, n_steps: int,
                   rng: np.random.Generator | None = None, checkpoints=None,
                   target: DensityMatrix | None = None,
                   tol: ToleranceConfig = TOL_DEFAULT) -> Trajectory:
    """Fixed interaction unitary, i.i.d. environment states drawn from env_law.

    With a deterministic (Dirac) law this delegates to :func:`run_fixed` on
    the induced channel, so the two entry points produce bit-identical
    trajectories in that case.
    """
    from .sampling import DiracAt  # local import keeps module dependencies one-way

    U = as_square(U, "U")
    d = rho0.dim
    d_prime = env_law.dim
    if U.shape[0] != d * d_prime:
        raise DimensionMismatchError(
            f"U has size {U.shape[0]}, expected d*d_prime = {d * d_prime}"
        )
    if isinstance(env_law, DiracAt):
        ch = kraus_from_stinespring(StinespringChannel.build(U, env_law.beta, d, tol), tol)
        return run_fixed(ch, rho0, n_steps, checkpoints, target, tol)
    if rng is None:
        raise ValidationError("a random environment law needs an explicit rng")

    def step(n, rho):
        beta = env_law.sample(rng).matrix
        return _stinespring_step(U, beta, rho, d, d_prime)

    return _evolve(step, rho0, n_steps, checkpoints, target, tol)


def _as_env_sequence(env_seq_law):
    """Normalize an environment-state source to a callable (step, rng) -> DensityMatrix.

    Accepts a law object with .sample(rng) (i.i.d. draws) or any callable of
    (step, rng), which covers deterministic and correlated sequences.
    """
    if hasattr(env_seq_law, "sample"):
        return lambda n, rng: env_seq_law.sample(rng)
    if callable(env_seq_law):
        return env_seq_law
    raise ValidationError("environment sequence must expose .sample(rng) or be callable")


def run_iid_unitary(env_seq_law, rho0: DensityMatrix, n_steps: int,
                    rng: np.random.Generator, checkpoints=None,
                    target: DensityMatrix | None = None,
                    tol: ToleranceConfig = TOL_DEFAULT) -> Trajectory:
    """Fresh Haar interaction unitary every step; arbitrary environment sequence.

    Per step, the environment state beta_n is drawn first, then the Haar
    unitary U_n (the two sources are independent).  No i.i.d. or
    independence assumption is needed on the beta_n themselves; the ergodic
    mean of the trajectory converges to the maximally mixed state
    regardless.
    """
    d = rho0.dim
    provider = _as_env_sequence(env_seq_law)
    state = {"d_prime": None}

    def step(n, rho):
        beta = provider(n, rng)
        if state["d_prime"] is None:
            state["d_prime"] = beta.dim
        elif beta.dim != state["d_prime"]:
            raise DimensionMismatchError("environment dimension changed between steps")
        U = haar_unitary(d * beta.dim, rng)
        return _stinespring_step(U, beta.matrix, rho, d, beta.dim)

    return _evolve(step, rho0, n_steps, checkpoints, target, tol)


def twirl_mean(tau_seq, rng: np.random.Generator,
               tol: ToleranceConfig = TOL_DEFAULT) -> DensityMatrix:
    """Average of the given states, each conjugated by an independent Haar unitary."""
    taus = list(tau_seq)
    if not taus:
        raise ValidationError("twirl_mean needs at least one state")
    d = taus[0].dim
    if any(t.dim != d for t in taus):
        raise DimensionMismatchError("all states must share one dimension")
    acc = np.zeros((d, d), dtype=complex)
    for t in taus:
        V = haar_unitary(d, rng)
        acc += V @ t.matrix @ V.conj().T
    return DensityMatrix.from_matrix(acc / len(taus), tol)


def tilde_unitary_sequence(U_seq, V_seq) -> list:
    """Conjugation-compensated interaction unitaries.

    Given system-space unitaries V_n, returns the sequence
    U~_n = (V_n x I) U_n (V_{n-1}^* x I) with V_0 = I, which evolves the
    conjugated trajectory: running the interactions with U~ instead of U
    yields exactly V_n rho_n V_n^* at every step.
    """
    U_seq = [as_square(U, "U") for U in U_seq]
    V_seq = [as_square(V, "V") for V in V_seq]
    if len(U_seq) != len(V_seq):
        raise DimensionMismatchError("sequences must have equal length")
    if not U_seq:
        return []
    d = V_seq[0].shape[0]
    if U_seq[0].shape[0] % d != 0:
        raise DimensionMismatchError("V dimension must divide U dimension")
    d_prime = U_seq[0].shape[0] // d
    eye_env = np.eye(d_prime)
    out = []
    prev = np.eye(d, dtype=complex)
    for U, V in zip(U_seq, V_seq):
        if V.shape[0] != d or U.shape[0] != d * d_prime:
            raise DimensionMismatchError("inconsistent dimensions in sequences")
        out.append(system_env_tensor(V, eye_env) @ U @ system_env_tensor(prev.conj().T, eye_env))
        prev = V
    return out


def convergence_diagnostics(traj: Trajectory, target: DensityMatrix) -> list:
    """Trace-norm distance to a target at every checkpoint: [(step, distance), ...]."""
    if target.dim != traj.d:
        raise DimensionMismatchError("target dimension does not match the trajectory")
    return [
        (step, trace_norm(state.matrix - target.matrix))
        for step, state in zip(traj.steps, traj.states)
    ]
