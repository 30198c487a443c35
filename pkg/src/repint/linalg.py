"""Dense complex linear algebra on small system/environment spaces.

Basis convention, relied on by every tensor, block and partial-trace routine
in this package: the product of a d-dimensional system with a d'-dimensional
environment carries the ordered basis

    e_1|f_1, e_2|f_1, ..., e_d|f_1, e_1|f_2, ..., e_d|f_2, ..., e_d|f_d'

(system index varies fastest).  A (d d') x (d d') matrix is therefore a
d' x d' grid of d x d blocks, with blocks labelled by environment indices,
and tracing out the environment is just summing the diagonal blocks.  In
numpy terms the tensor product of a system operator X with an environment
operator B is ``np.kron(B, X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .config import TOL_DEFAULT, ToleranceConfig
from .errors import DimensionMismatchError, NumericalError, ValidationError

__all__ = [
    "HermitianEigenResult",
    "as_square",
    "commutator",
    "complex_eigenvalues",
    "frobenius",
    "hermitian_eig",
    "hermitize",
    "partial_trace_env",
    "qr_unitary",
    "smallest_eigenvalue_psd",
    "system_env_tensor",
    "trace_norm",
    "wedge_power",
]


def as_square(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex ndarray, rejecting non-finite entries."""
    out = np.asarray(M, dtype=complex)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {out.shape}")
    if not np.isfinite(out).all():
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return out


def frobenius(M) -> float:
    return float(np.linalg.norm(M))


def hermitize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def trace_norm(H) -> float:
    """Trace norm of a numerically Hermitian matrix (sum of |eigenvalues|)."""
    H = as_square(H, "H")
    return float(np.abs(np.linalg.eigvalsh(hermitize(H))).sum())


def system_env_tensor(X, B) -> np.ndarray:
    """Tensor product of system operator X with environment operator B.

    Entry conventions follow the module-level basis ordering: the result
    at row (j-1)d+i, column (j'-1)d+i' equals ``X[i,i'] * B[j,j']``.
    """
    X = as_square(X, "X")
    B = as_square(B, "B")
    return np.kron(B, X)


def partial_trace_env(A, d: int, d_prime: int) -> np.ndarray:
    """Trace out the environment factor of an operator on the product space.

    A is viewed as a d' x d' grid of d x d blocks (environment indices label
    the blocks) and the result is the sum of the diagonal blocks.  This is
    the adjoint of ``X -> system_env_tensor(X, I)`` with respect to the
    Hilbert-Schmidt pairing.
    """
    A = as_square(A, "A")
    if d < 1 or d_prime < 1:
        raise DimensionMismatchError("dimensions must be >= 1")
    if A.shape[0] != d * d_prime:
        raise DimensionMismatchError(
            f"A has size {A.shape[0]}, expected d*d_prime = {d * d_prime}"
        )
    return np.einsum("aiaj->ij", A.reshape(d_prime, d, d_prime, d))


@dataclass(frozen=True)
class HermitianEigenResult:
    """Eigenvalues (real, ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eig(H, tol: ToleranceConfig = TOL_DEFAULT) -> HermitianEigenResult:
    """Full eigendecomposition of a Hermitian matrix.

    Raises ValidationError if the input deviates from Hermiticity beyond
    ``tol.hermiticity`` (relative above unit Frobenius scale).
    """
    H = as_square(H, "H")
    scale = max(1.0, frobenius(H))
    if frobenius(H - H.conj().T) > tol.hermiticity * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")
    try:
        vals, vecs = np.linalg.eigh(hermitize(H))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigensolver did not converge: {exc}") from exc
    return HermitianEigenResult(vals, vecs)


def qr_unitary(G) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization with the phase fixed so diag(R) is real and positive.

    The phase fix makes the factorization unique for nonsingular G, which is
    what turns QR of a Gaussian matrix into a Haar-distributed unitary.
    """
    G = as_square(G, "G")
    try:
        Q, R = np.linalg.qr(G)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"QR factorization failed: {exc}") from exc
    diag = np.diagonal(R).copy()
    mags = np.abs(diag)
    if mags.min() <= G.shape[0] * np.finfo(float).eps * max(mags.max(), 1.0):
        raise NumericalError("input is numerically singular; cannot phase-fix QR")
    phases = diag / mags
    return Q * phases, R * phases.conj()[:, None]


def complex_eigenvalues(M) -> np.ndarray:
    """Eigenvalues of a general square matrix, with multiplicity.

    Sorted by descending modulus, ties broken by descending phase
    (``np.angle``, in (-pi, pi]).
    """
    M = as_square(M, "M")
    try:
        vals = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge: {exc}") from exc
    order = np.lexsort((-np.angle(vals), -np.abs(vals)))
    return vals[order]


def wedge_power(A, k: int) -> np.ndarray:
    """k-th antisymmetric (wedge) power of A.

    Rows and columns are indexed by the strictly increasing k-subsets of
    {1, ..., d} in lexicographic order; entry (alpha, beta) is the minor
    det A[alpha | beta].  Multiplicative: (AB)^{wedge k} = A^{wedge k} B^{wedge k}.
    """
    A = as_square(A, "A")
    d = A.shape[0]
    if not 1 <= k <= d:
        raise DimensionMismatchError(f"wedge order k={k} out of range 1..{d}")
    if k == 1:
        return A.copy()
    subsets = list(combinations(range(d), k))
    n = len(subsets)
    out = np.empty((n, n), dtype=complex)
    for a, rows in enumerate(subsets):
        sub = A[rows, :]
        for b, cols in enumerate(subsets):
            out[a, b] = np.linalg.det(sub[:, cols])
    return out


def commutator(A, B) -> np.ndarray:
    """AB - BA."""
    A = as_square(A, "A")
    B = as_square(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatchError(f"shape mismatch {A.shape} vs {B.shape}")
    return A @ B - B @ A


def smallest_eigenvalue_psd(K, tol: ToleranceConfig = TOL_DEFAULT) -> float:
    """Smallest eigenvalue of a Hermitian PSD matrix, clamped below at 0.

    Used as the kernel-detection statistic for sums of squared commutators;
    rejects inputs that are negative beyond ``tol.psd`` (relative).
    """
    res = hermitian_eig(K, tol)
    smallest = float(res.eigenvalues[0])
    scale = max(1.0, float(np.abs(res.eigenvalues).max(initial=0.0)))
    if smallest < -tol.psd * scale:
        raise ValidationError("matrix is not positive semidefinite within tolerance")
    return max(smallest, 0.0)
