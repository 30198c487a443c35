"""Spectral structure of channels: peripheral spectrum, invariant states, irreducibility.

The irreducibility machinery is built on kernel statistics of summed squared
commutators (a common-eigenvector test for a matrix pair, lifted to common
invariant subspaces through wedge powers).  A positive statistic certifies
the absence of a common subspace; a vanishing statistic is inconclusive on
its own, so "reducible" verdicts are only issued with an explicitly checked
invariant-subspace witness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from math import sqrt

import numpy as np

from ._random import haar_pure_state
from .channels import DensityMatrix, KrausChannel, apply_kraus, choi_rank, superoperator_of, unvec, vec
from .config import FIXED_POINT_DEFAULT, TOL_DEFAULT, FixedPointConfig, ToleranceConfig
from .errors import DimensionMismatchError, MaxIterationsExceeded
from .linalg import (
    as_square,
    commutator,
    complex_eigenvalues,
    frobenius,
    hermitize,
    smallest_eigenvalue_psd,
    trace_norm,
    wedge_power,
)

__all__ = [
    "FixedPointDiagnostics",
    "IrreducibilityReport",
    "SpectralReport",
    "channel_spectrum",
    "generalized_shemesh",
    "invariant_state",
    "irreducibility_check",
    "one_plus_phi_power_probe",
    "shemesh_common_eigenvector",
    "strict_positivity_probe",
]

IRREDUCIBLE = "Irreducible"
INCONCLUSIVE = "Inconclusive"
REDUCIBLE_WITNESS = "ReducibleWitness"

NOT_STRICTLY_POSITIVE = "NotStrictlyPositive"
LIKELY_STRICTLY_POSITIVE = "LikelyStrictlyPositive"

# Kraus operators below this Frobenius norm are ignored by the structural checks.
OPERATOR_PRUNE = 1e-14


@dataclass(frozen=True)
class SpectralReport:
    """Channel eigenvalues with peripheral classification.

    ``eigenvalues`` holds all d^2 superoperator eigenvalues (descending
    modulus); ``peripheral`` the ones within peripheral tolerance of the
    unit circle; ``spectral_gap`` is one minus the largest modulus after
    removing the eigenvalue identified with the invariant state.
    """

    eigenvalues: np.ndarray
    peripheral: np.ndarray
    spectral_gap: float
    in_class_C: bool
    multiplicity_of_one: int

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "peripheral": [[float(z.real), float(z.imag)] for z in self.peripheral],
            "spectral_gap": float(self.spectral_gap),
            "in_class_C": bool(self.in_class_C),
            "multiplicity_of_one": int(self.multiplicity_of_one),
        }


def channel_spectrum(ch: KrausChannel, tol: ToleranceConfig = TOL_DEFAULT) -> SpectralReport:
    """Eigenvalues of the channel's superoperator, classified.

    A channel is "class C" when 1 is its only peripheral eigenvalue (and is
    simple); exactly those channels have a unique invariant state that plain
    iteration converges to from anywhere.
    """
    vals = complex_eigenvalues(superoperator_of(ch).matrix)
    peripheral = vals[np.abs(vals) >= 1.0 - tol.peripheral]
    mult_one = int(np.count_nonzero(np.abs(vals - 1.0) <= tol.peripheral))
    in_class_c = len(peripheral) == 1 and abs(peripheral[0] - 1.0) <= tol.peripheral
    rest = np.delete(vals, int(np.argmin(np.abs(vals - 1.0))))
    gap = 1.0 if rest.size == 0 else float(1.0 - np.abs(rest).max())
    return SpectralReport(
        eigenvalues=vals,
        peripheral=peripheral,
        spectral_gap=gap,
        in_class_C=bool(in_class_c),
        multiplicity_of_one=mult_one,
    )


@dataclass(frozen=True)
class FixedPointDiagnostics:
    iterations: int
    residual: float
    cesaro_rounds: int


def _polish_state(M: np.ndarray) -> np.ndarray:
    """Project a near-state onto the density matrices: Hermitize, clip, renormalize."""
    vals, vecs = np.linalg.eigh(hermitize(M))
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0.0:
        raise MaxIterationsExceeded("iterate collapsed to the zero matrix")
    return (vecs * (vals / total)) @ vecs.conj().T


def invariant_state(
    ch: KrausChannel,
    cfg: FixedPointConfig = FIXED_POINT_DEFAULT,
    rho0: DensityMatrix | None = None,
    tol: ToleranceConfig = TOL_DEFAULT,
) -> tuple[DensityMatrix, FixedPointDiagnostics]:
    """Invariant state by fixed-point iteration, with an averaging fallback.

    Iterates the channel from rho0 (default: maximally mixed).  If the
    residual stops decreasing over a window (peripheral eigenvalues other
    than 1 make iterates oscillate), the subsequent ``cfg.cesaro_length``
    iterates are averaged, which cancels the oscillating components; plain
    iteration then resumes from the average.  The returned state satisfies
    ``trace_norm(ch(rho) - rho) <= cfg.residual_tol``; on failure a
    MaxIterationsExceeded carrying the best iterate is raised.
    """
    d = ch.d
    if rho0 is not None and rho0.dim != d:
        raise DimensionMismatchError(f"rho0 dimension {rho0.dim} != channel dimension {d}")
    S = superoperator_of(ch).matrix
    start = rho0.matrix if rho0 is not None else np.eye(d, dtype=complex) / d
    v = vec(start.astype(complex))
    # Frobenius-level stop: ||X||_tr <= sqrt(d) ||X||_F, with headroom for the
    # final polishing step.
    frob_tol = cfg.residual_tol / (8.0 * sqrt(d))

    iterations = 0
    cesaro_rounds = 0
    best_v = v
    best_r = np.inf
    window: deque = deque(maxlen=cfg.oscillation_window)

    while iterations < cfg.max_iterations:
        w = S @ v
        r = float(np.linalg.norm(w - v))
        iterations += 1
        v = w
        if r < best_r:
            best_r, best_v = r, v
        window.append(r)
        converged = r <= frob_tol
        if not converged and len(window) == window.maxlen and window[-1] >= window[0] * (1.0 - 1e-12):
            steps = min(cfg.cesaro_length, cfg.max_iterations - iterations)
            if steps > 0:
                acc = np.zeros_like(v)
                for _ in range(steps):
                    v = S @ v
                    acc += v
                iterations += steps
                v = acc / steps
                cesaro_rounds += 1
            window.clear()
            continue
        if converged:
            rho = _polish_state(unvec(v, d))
            residual = trace_norm(apply_kraus(ch, rho) - rho)
            if residual <= cfg.residual_tol:
                return (
                    DensityMatrix.from_matrix(rho, tol),
                    FixedPointDiagnostics(iterations, residual, cesaro_rounds),
                )
            # Trace norm missed despite the Frobenius bound: tighten and go on.
            v = vec(rho)
            frob_tol *= 0.5
            window.clear()

    best = _polish_state(unvec(best_v, d))
    best_residual = trace_norm(apply_kraus(ch, best) - best)
    raise MaxIterationsExceeded(
        f"no invariant state within tolerance after {iterations} iterations "
        f"(best trace-norm residual {best_residual:.3e}); the peripheral "
        "spectrum may contain eigenvalues besides 1",
        best_state=DensityMatrix(best),
        residual=best_residual,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Common-eigenvector / common-invariant-subspace kernel statistics.
# ---------------------------------------------------------------------------


def _kernel_statistic(A: np.ndarray, B: np.ndarray, tol: ToleranceConfig) -> float:
    """Normalized smallest eigenvalue of K = sum_{i,j=1}^{d-1} [A^i,B^j]^* [A^i,B^j]."""
    d = A.shape[0]
    if d == 1:
        return 0.0
    pows_a = [A]
    pows_b = [B]
    for _ in range(d - 2):
        pows_a.append(pows_a[-1] @ A)
        pows_b.append(pows_b[-1] @ B)
    K = np.zeros((d, d), dtype=complex)
    ref = 0.0
    for Ai in pows_a:
        for Bj in pows_b:
            C = commutator(Ai, Bj)
            K += C.conj().T @ C
            ref = max(ref, frobenius(Ai) * frobenius(Bj))
    scale = frobenius(K) / d
    # K built from commutators of a (near-)commuting pair is pure rounding
    # noise; its smallest/largest eigenvalue ratio is then meaningless.
    noise_floor = (d - 1) ** 2 * (100.0 * d * np.finfo(float).eps * ref) ** 2
    if scale <= noise_floor:
        return 0.0
    return smallest_eigenvalue_psd(hermitize(K), tol) / scale


def shemesh_common_eigenvector(A, B, tol: float = TOL_DEFAULT.kernel_relative) -> tuple[bool, float]:
    """Do A and B share an eigenvector?

    Exact criterion up to floating point: the pair shares an eigenvector iff
    the summed squared commutators of their powers have a nontrivial kernel.
    Returns (has_common, statistic); the statistic is the kernel detection
    value, zero (up to rounding) exactly in the shared-eigenvector case.
    """
    A = as_square(A, "A")
    B = as_square(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatchError(f"shape mismatch {A.shape} vs {B.shape}")
    statistic = _kernel_statistic(A, B, TOL_DEFAULT)
    return statistic <= tol, statistic


def generalized_shemesh(A, B, k: int, tol: float = TOL_DEFAULT.kernel_relative) -> tuple[bool, float]:
    """Could A and B share a k-dimensional invariant subspace?

    Applies the common-eigenvector test to the k-th wedge powers.  A
    statistic above tol certifies there is NO common k-dimensional invariant
    subspace; a small statistic only says one may exist (the converse needs
    extra hypotheses), hence the verdict name ``may_share``.
    """
    A = as_square(A, "A")
    B = as_square(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatchError(f"shape mismatch {A.shape} vs {B.shape}")
    d = A.shape[0]
    if not 1 <= k <= d - 1:
        raise DimensionMismatchError(f"subspace dimension k={k} out of range 1..{d - 1}")
    return shemesh_common_eigenvector(wedge_power(A, k), wedge_power(B, k), tol)


@dataclass(frozen=True)
class IrreducibilityReport:
    """Outcome of the common-invariant-subspace analysis of a Kraus family.

    verdict is one of Irreducible / Inconclusive / ReducibleWitness;
    per_dimension_stats maps each candidate subspace dimension k to the best
    (largest) kernel statistic over operator pairs; witness_pair gives the
    indices of the certifying pair when the verdict is Irreducible.
    """

    verdict: str
    per_dimension_stats: dict
    witness_pair: tuple | None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "per_dimension_stats": {str(k): float(v) for k, v in self.per_dimension_stats.items()},
            "witness_pair": list(self.witness_pair) if self.witness_pair is not None else None,
        }


def _orthonormal_columns(V: np.ndarray) -> np.ndarray | None:
    q, r = np.linalg.qr(V)
    if np.abs(np.diagonal(r)).min() < 1e-8 * max(1.0, np.abs(np.diagonal(r)).max()):
        return None  # numerically rank deficient, not a k-dimensional candidate
    return q


def _invariant_under_all(Q: np.ndarray, operators, tol: float) -> bool:
    d = Q.shape[0]
    proj_out = np.eye(d) - Q @ Q.conj().T
    for L in operators:
        if frobenius(proj_out @ (L @ Q)) > tol * max(1.0, frobenius(L)):
            return False
    return True


def _search_common_invariant_subspace(operators, tol: float = 1e-8):
    """Brute-force witness search: spans of eigenvector subsets of the first operator.

    Only invariant subspaces arising as eigenvector spans are found, which is
    enough for generic operators; callers treat a miss as inconclusive.
    """
    first = operators[0]
    d = first.shape[0]
    _, vecs = np.linalg.eig(first)
    for k in range(1, d):
        for cols in combinations(range(d), k):
            Q = _orthonormal_columns(vecs[:, list(cols)])
            if Q is None:
                continue
            if _invariant_under_all(Q, operators, tol):
                return Q
    return None


def irreducibility_check(ch: KrausChannel, tol: float = TOL_DEFAULT.kernel_relative) -> IrreducibilityReport:
    """Certify that the Kraus operators share no nontrivial invariant subspace.

    A single pair with positive kernel statistics at every dimension
    k = 1..d-1 already makes the full lattice intersection trivial, so pairs
    are scanned in index order and the best one is reported.  Channels with
    one (effective) Kraus operator are never irreducible: any eigenvector of
    that operator spans an invariant subspace, which the brute-force search
    exhibits as a witness.  Without a certificate, an explicit witness
    invariant under ALL operators is searched for (practical for d <= 4);
    failing both, the verdict is Inconclusive.
    """
    operators = [L for L in ch.operators if frobenius(L) > OPERATOR_PRUNE]
    d = ch.d
    if d == 1:
        # No nontrivial subspaces exist; trivially irreducible.
        return IrreducibilityReport(verdict=IRREDUCIBLE, per_dimension_stats={}, witness_pair=None)
    if len(operators) < 2:
        # A single operator always has an eigenvector, whose span it preserves.
        verdict = REDUCIBLE_WITNESS if _search_common_invariant_subspace(operators) is not None else INCONCLUSIVE
        return IrreducibilityReport(verdict=verdict, per_dimension_stats={}, witness_pair=None)

    best_pair = None
    best_stats: dict = {}
    best_min = -1.0
    for a, b in combinations(range(len(operators)), 2):
        stats = {}
        for k in range(1, d):
            _, statistic = generalized_shemesh(operators[a], operators[b], k, tol)
            stats[k] = statistic
        worst = min(stats.values())
        if worst > best_min:
            best_min, best_pair, best_stats = worst, (a, b), stats
    if best_min > tol:
        return IrreducibilityReport(verdict=IRREDUCIBLE, per_dimension_stats=best_stats, witness_pair=best_pair)

    if d <= 4 and _search_common_invariant_subspace(operators) is not None:
        return IrreducibilityReport(verdict=REDUCIBLE_WITNESS, per_dimension_stats=best_stats, witness_pair=None)
    return IrreducibilityReport(verdict=INCONCLUSIVE, per_dimension_stats=best_stats, witness_pair=best_pair)


def _min_output_eigenvalue(apply_fn, d: int, num_samples: int, rng: np.random.Generator) -> float:
    worst = np.inf
    for _ in range(num_samples):
        x = haar_pure_state(d, rng)
        out = apply_fn(np.outer(x, x.conj()))
        worst = min(worst, float(np.linalg.eigvalsh(hermitize(out))[0]))
    return worst


def strict_positivity_probe(
    ch: KrausChannel,
    num_samples: int = 512,
    rng: np.random.Generator | None = None,
    tol: float = TOL_DEFAULT.probe,
) -> tuple[str, float]:
    """Probe whether the channel maps every state to a full-rank state.

    A strictly positive channel needs at least 2d-1 Kraus operators (Choi
    rank bound), so a smaller Choi rank settles the verdict immediately; the
    pure-state sweep still runs and reports the smallest output eigenvalue
    encountered.  The positive verdict is evidence from sampling, not a
    proof.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    rank = choi_rank(ch)
    min_eig = _min_output_eigenvalue(lambda X: apply_kraus(ch, X), ch.d, num_samples, rng)
    if rank < 2 * ch.d - 1 or min_eig <= tol:
        return NOT_STRICTLY_POSITIVE, min_eig
    return LIKELY_STRICTLY_POSITIVE, min_eig


def one_plus_phi_power_probe(
    ch: KrausChannel,
    num_samples: int = 512,
    rng: np.random.Generator | None = None,
    tol: float = TOL_DEFAULT.probe,
) -> tuple[bool, float]:
    """Sample-based check that (1 + channel)^(d-1) is positivity improving.

    Strict positivity of that power characterizes irreducibility, so a
    strictly positive minimum over sampled pure states is supporting
    evidence for it (companion to the kernel-statistic certificate, not a
    certificate itself).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    d = ch.d
    S = superoperator_of(ch).matrix
    P = np.linalg.matrix_power(np.eye(d * d) + S, d - 1)
    min_eig = _min_output_eigenvalue(lambda X: unvec(P @ vec(X), d), d, num_samples, rng)
    return min_eig > tol, min_eig
