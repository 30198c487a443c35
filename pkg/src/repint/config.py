"""Tolerance and iteration settings, threaded explicitly through the API.

Nothing in this package reads mutable global state: every operation that
needs a tolerance takes a :class:`ToleranceConfig` (default ``TOL_DEFAULT``)
and every fixed-point search takes a :class:`FixedPointConfig`.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used by validation and classification routines.

    All matrix-residual thresholds are relative above unit scale: a residual
    r on an object of Frobenius norm s passes when ``r <= tol * max(1, s)``.
    """

    hermiticity: float = 1e-10
    reconstruction: float = 1e-10
    kernel_relative: float = 1e-8
    unitarity: float = 1e-10
    psd: float = 1e-10
    trace: float = 1e-10
    completeness: float = 1e-10
    peripheral: float = 1e-6
    probe: float = 1e-8


TOL_DEFAULT = ToleranceConfig()
TOL_STRICT = ToleranceConfig(
    hermiticity=1e-12,
    reconstruction=1e-12,
    kernel_relative=1e-10,
    unitarity=1e-12,
    psd=1e-12,
    trace=1e-12,
    completeness=1e-12,
    peripheral=1e-8,
    probe=1e-10,
)

TOL_PROFILES = {"default": TOL_DEFAULT, "strict": TOL_STRICT}


@dataclass(frozen=True)
class FixedPointConfig:
    """Settings for the invariant-state fixed-point iteration.

    ``residual_tol`` bounds the trace-norm residual of the returned state.
    Oscillation (residual not decreasing across ``oscillation_window``
    consecutive steps) triggers an averaging phase over ``cesaro_length``
    subsequent iterates, which cancels peripheral oscillations.
    """

    residual_tol: float = 1e-10
    max_iterations: int = 100_000
    oscillation_window: int = 16
    cesaro_length: int = 10_000


FIXED_POINT_DEFAULT = FixedPointConfig()
