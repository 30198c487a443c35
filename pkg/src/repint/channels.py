"""Quantum channels: states, Stinespring pairs, Kraus lists, superoperators, Choi matrices.

Vectorization convention, fixed package-wide: ``vec`` stacks columns, so the
matrix entry (k, l) lands at vector index (l-1)d + k.  Superoperator columns
and Choi blocks follow the same indexing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod, sqrt

import numpy as np

from .config import TOL_DEFAULT, ToleranceConfig
from .errors import (
    ConfigError,
    DimensionMismatchError,
    OperatorCountError,
    ValidationError,
)
from .linalg import as_square, frobenius, hermitian_eig, hermitize, partial_trace_env, system_env_tensor

__all__ = [
    "DensityMatrix",
    "DualMap",
    "KrausChannel",
    "StinespringChannel",
    "Superoperator",
    "apply_kraus",
    "choi_matrix",
    "choi_rank",
    "compose",
    "compose_superoperators",
    "dual_channel",
    "kraus_from_json",
    "kraus_from_stinespring",
    "kraus_to_json",
    "stinespring_apply",
    "stinespring_from_json",
    "stinespring_to_json",
    "superoperator_of",
    "unvec",
    "vec",
]

# Terms of the Kraus expansion below these thresholds are dropped: weights
# are eigenvalues of a density matrix (scale 1), operators are blocks of a
# unitary (scale <= sqrt(d)).
WEIGHT_THRESHOLD = 1e-14
OPERATOR_ZERO_THRESHOLD = 1e-14


def vec(X: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vec` for a d x d matrix."""
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    The plain constructor trusts its input (fast paths construct states that
    are valid by arithmetic); use :meth:`from_matrix` to validate.
    """

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_square(self.matrix, "state"))
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: ToleranceConfig = TOL_DEFAULT) -> "DensityMatrix":
        m = self.matrix
        if frobenius(m - m.conj().T) > tol.hermiticity * max(1.0, frobenius(m)):
            raise ValidationError("state is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > tol.trace or abs(np.trace(m).imag) > tol.trace:
            raise ValidationError(f"state trace {np.trace(m)} is not 1 within tolerance")
        smallest = float(np.linalg.eigvalsh(hermitize(m))[0])
        if smallest < -tol.psd:
            raise ValidationError(f"state has negative eigenvalue {smallest}")
        return self

    @classmethod
    def from_matrix(cls, M, tol: ToleranceConfig = TOL_DEFAULT) -> "DensityMatrix":
        return cls(M).validate(tol)

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d, dtype=complex) / d)

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValidationError("cannot build a pure state from the zero vector")
        v = v / n
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True)
class StinespringChannel:
    """Channel presented as (U, beta): conjugate by U on system x environment, trace out the environment."""

    d: int
    d_env: int
    U: np.ndarray
    beta: DensityMatrix

    def __post_init__(self):
        object.__setattr__(self, "U", as_square(self.U, "U"))
        self.U.setflags(write=False)

    def validate(self, tol: ToleranceConfig = TOL_DEFAULT) -> "StinespringChannel":
        n = self.d * self.d_env
        if self.U.shape[0] != n:
            raise DimensionMismatchError(
                f"U has size {self.U.shape[0]}, expected d*d_env = {n}"
            )
        if self.beta.dim != self.d_env:
            raise DimensionMismatchError("beta dimension does not match d_env")
        resid = frobenius(self.U.conj().T @ self.U - np.eye(n))
        if resid > tol.unitarity * max(1.0, sqrt(n)):
            raise ValidationError(f"U is not unitary within tolerance (residual {resid:.3e})")
        self.beta.validate(tol)
        return self

    @classmethod
    def build(cls, U, beta: DensityMatrix, d: int, tol: ToleranceConfig = TOL_DEFAULT) -> "StinespringChannel":
        return cls(d=d, d_env=beta.dim, U=U, beta=beta).validate(tol)


@dataclass(frozen=True)
class KrausChannel:
    """Operator-sum form of a channel: X -> sum_i L_i X L_i^*, with sum L_i^* L_i = I."""

    d: int
    operators: tuple

    def __post_init__(self):
        ops = tuple(as_square(L, "Kraus operator") for L in self.operators)
        object.__setattr__(self, "operators", ops)
        for L in ops:
            L.setflags(write=False)

    def validate(self, tol: ToleranceConfig = TOL_DEFAULT) -> "KrausChannel":
        if not self.operators:
            raise ValidationError("channel needs at least one Kraus operator")
        for L in self.operators:
            if L.shape[0] != self.d:
                raise DimensionMismatchError("Kraus operator size does not match d")
        total = sum(L.conj().T @ L for L in self.operators)
        resid = frobenius(total - np.eye(self.d))
        if resid > tol.completeness * max(1.0, sqrt(self.d)):
            raise ValidationError(f"Kraus completeness violated (residual {resid:.3e})")
        return self

    @classmethod
    def from_operators(cls, operators, tol: ToleranceConfig = TOL_DEFAULT) -> "KrausChannel":
        ops = [as_square(L, "Kraus operator") for L in operators]
        if not ops:
            raise ValidationError("channel needs at least one Kraus operator")
        return cls(d=ops[0].shape[0], operators=tuple(ops)).validate(tol)


@dataclass(frozen=True)
class Superoperator:
    """Matrix of a channel acting on column-stacked d x d matrices."""

    d: int
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_square(self.matrix, "superoperator"))
        self.matrix.setflags(write=False)

    def apply(self, X) -> np.ndarray:
        return unvec(self.matrix @ vec(as_square(X, "X")), self.d)


@dataclass(frozen=True)
class DualMap:
    """Heisenberg-picture adjoint of a channel: unital, not trace preserving."""

    d: int
    operators: tuple

    def apply(self, X) -> np.ndarray:
        X = as_square(X, "X")
        return sum(K @ X @ K.conj().T for K in self.operators)


def stinespring_apply(ch: StinespringChannel, rho: DensityMatrix,
                      tol: ToleranceConfig = TOL_DEFAULT) -> DensityMatrix:
    """One interaction: conjugate rho (x) beta by U and trace out the environment."""
    if rho.dim != ch.d:
        raise DimensionMismatchError(f"state dimension {rho.dim} != channel dimension {ch.d}")
    sigma = ch.U @ system_env_tensor(rho.matrix, ch.beta.matrix) @ ch.U.conj().T
    return DensityMatrix.from_matrix(partial_trace_env(sigma, ch.d, ch.d_env), tol)


def kraus_from_stinespring(ch: StinespringChannel,
                           tol: ToleranceConfig = TOL_DEFAULT) -> KrausChannel:
    """Extract Kraus operators from a Stinespring pair.

    Diagonalize beta = sum_j b_j |f_j><f_j|, rotate U into beta's eigenbasis
    on the environment factor, and read off sqrt(b_j) U_ij from the blocks
    of the rotated unitary.  Terms with negligible weight, and operators
    that are numerically zero, are dropped; for a pure beta this leaves
    (at most) d_env operators.
    """
    d, d_env = ch.d, ch.d_env
    eig = hermitian_eig(ch.beta.matrix, tol)
    U_rot = ch.U @ system_env_tensor(np.eye(d), eig.eigenvectors)
    blocks = U_rot.reshape(d_env, d, d_env, d)
    ops = []
    for j, b_j in enumerate(eig.eigenvalues):
        if b_j <= WEIGHT_THRESHOLD:
            continue
        w = sqrt(b_j)
        for i in range(d_env):
            L = w * blocks[i, :, j, :]
            if frobenius(L) > OPERATOR_ZERO_THRESHOLD:
                ops.append(L)
    return KrausChannel.from_operators(ops, tol)


def apply_kraus(ch: KrausChannel, X) -> np.ndarray:
    """Apply the channel to an arbitrary d x d matrix."""
    X = as_square(X, "X")
    if X.shape[0] != ch.d:
        raise DimensionMismatchError(f"matrix dimension {X.shape[0]} != channel dimension {ch.d}")
    out = np.zeros_like(X)
    for L in ch.operators:
        out += L @ X @ L.conj().T
    return out


def dual_channel(ch: KrausChannel, tol: ToleranceConfig = TOL_DEFAULT) -> DualMap:
    """Adjoint map X -> sum_i L_i^* X L_i; unital whenever ch is trace preserving."""
    dual = DualMap(d=ch.d, operators=tuple(L.conj().T for L in ch.operators))
    resid = frobenius(dual.apply(np.eye(ch.d)) - np.eye(ch.d))
    if resid > tol.completeness * max(1.0, sqrt(ch.d)):
        raise ValidationError(f"dual map is not unital (residual {resid:.3e})")
    return dual


def superoperator_of(ch: KrausChannel) -> Superoperator:
    """Matrix representation: column (k,l) is vec of the image of the matrix unit E_kl."""
    S = np.zeros((ch.d ** 2, ch.d ** 2), dtype=complex)
    for L in ch.operators:
        S += np.kron(L.conj(), L)
    return Superoperator(d=ch.d, matrix=S)


def compose(chs, max_operators: int = 4096,
            tol: ToleranceConfig = TOL_DEFAULT) -> KrausChannel:
    """Compose channels applied in list order (chs[0] acts first).

    The result's Kraus operators are all products of one operator per factor,
    rightmost factor from chs[0].  Counts grow multiplicatively; beyond
    ``max_operators`` an OperatorCountError asks for superoperator
    composition instead.
    """
    chs = list(chs)
    if not chs:
        raise ValidationError("compose needs at least one channel")
    d = chs[0].d
    if any(ch.d != d for ch in chs):
        raise DimensionMismatchError("all channels must share the system dimension")
    count = prod(len(ch.operators) for ch in chs)
    if count > max_operators:
        raise OperatorCountError(
            f"composition would produce {count} > {max_operators} Kraus operators; "
            "use superoperator composition instead"
        )
    ops = list(chs[0].operators)
    for ch in chs[1:]:
        ops = [M @ L for M in ch.operators for L in ops]
    return KrausChannel.from_operators(ops, tol)


def compose_superoperators(chs) -> Superoperator:
    """Superoperator of the composition of channels applied in list order."""
    chs = list(chs)
    if not chs:
        raise ValidationError("compose needs at least one channel")
    S = superoperator_of(chs[0]).matrix
    for ch in chs[1:]:
        S = superoperator_of(ch).matrix @ S
    return Superoperator(d=chs[0].d, matrix=S)


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """Choi matrix: block (k,l) holds the image of the matrix unit E_kl.

    Equals sum_i vec(L_i) vec(L_i)^*, hence Hermitian PSD for any
    operator-sum map; its rank is the minimal number of Kraus operators.
    """
    C = np.zeros((ch.d ** 2, ch.d ** 2), dtype=complex)
    for L in ch.operators:
        v = vec(L)
        C += np.outer(v, v.conj())
    return C


def choi_rank(ch: KrausChannel, rank_threshold: float = 1e-12) -> int:
    """Number of Choi eigenvalues above rank_threshold times the largest."""
    vals = np.linalg.eigvalsh(hermitize(choi_matrix(ch)))
    top = float(vals[-1])
    if top <= 0:
        return 0
    return int(np.count_nonzero(vals > rank_threshold * top))


# ---------------------------------------------------------------------------
# JSON serialization.  Matrices are encoded as flat row-major lists of
# [re, im] pairs; field names are part of the wire contract.
# ---------------------------------------------------------------------------


def _matrix_to_pairs(M: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(M).reshape(-1)]


def _pairs_to_matrix(pairs, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape != (rows * cols, 2):
        raise ConfigError(f"{name}: expected {rows * cols} [re, im] pairs, got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def stinespring_to_json(ch: StinespringChannel) -> dict:
    return {
        "d": ch.d,
        "d_env": ch.d_env,
        "U": _matrix_to_pairs(ch.U),
        "beta": _matrix_to_pairs(ch.beta.matrix),
    }


def stinespring_from_json(obj: dict, tol: ToleranceConfig = TOL_DEFAULT) -> StinespringChannel:
    try:
        d = int(obj["d"])
        d_env = int(obj["d_env"])
        U = _pairs_to_matrix(obj["U"], d * d_env, d * d_env, "U")
        beta = _pairs_to_matrix(obj["beta"], d_env, d_env, "beta")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed Stinespring channel object: {exc}") from exc
    try:
        return StinespringChannel.build(U, DensityMatrix.from_matrix(beta, tol), d, tol)
    except (ValidationError, DimensionMismatchError) as exc:
        raise ConfigError(f"invalid Stinespring channel: {exc}") from exc


def kraus_to_json(ch: KrausChannel) -> dict:
    return {"d": ch.d, "operators": [_matrix_to_pairs(L) for L in ch.operators]}


def kraus_from_json(obj: dict, tol: ToleranceConfig = TOL_DEFAULT) -> KrausChannel:
    try:
        d = int(obj["d"])
        ops = [_pairs_to_matrix(p, d, d, "operator") for p in obj["operators"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed Kraus channel object: {exc}") from exc
    try:
        return KrausChannel.from_operators(ops, tol)
    except (ValidationError, DimensionMismatchError) as exc:
        raise ConfigError(f"invalid Kraus channel: {exc}") from exc


def channel_to_json_text(ch) -> str:
    obj = stinespring_to_json(ch) if isinstance(ch, StinespringChannel) else kraus_to_json(ch)
    return json.dumps(obj)


def channel_from_json_text(text: str, tol: ToleranceConfig = TOL_DEFAULT):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"channel file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("channel file must contain a JSON object")
    if "U" in obj:
        return stinespring_from_json(obj, tol)
    if "operators" in obj:
        return kraus_from_json(obj, tol)
    raise ConfigError("channel object needs either a 'U'/'beta' pair or an 'operators' list")
