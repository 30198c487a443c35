"""Small named channels and states used as regression fixtures and CLI shortcuts."""

from __future__ import annotations

from math import sqrt

import numpy as np

from .channels import DensityMatrix, KrausChannel
from .config import TOL_DEFAULT

__all__ = [
    "CHANNEL_FIXTURES",
    "RHO0_PRESETS",
    "SIGMA_0",
    "SIGMA_1",
    "SIGMA_2",
    "SIGMA_3",
    "channel_fixture",
    "dephasing_pauli_channel",
    "depolarizing_channel",
    "identity_channel",
    "initial_state_preset",
    "shift_clock_channel",
]

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)


def dephasing_pauli_channel() -> KrausChannel:
    """Qubit channel with Kraus operators sigma_1/sqrt(2) and sigma_3/sqrt(2).

    Canonical example of an irreducible channel whose peripheral spectrum is
    {1, -1}: iterates oscillate, only ergodic means converge.
    """
    return KrausChannel.from_operators([SIGMA_1 / sqrt(2), SIGMA_3 / sqrt(2)], TOL_DEFAULT)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel.from_operators([np.eye(d, dtype=complex)], TOL_DEFAULT)


def depolarizing_channel(d: int) -> KrausChannel:
    """Channel with all d^2 matrix units as Kraus operators: X -> tr(X) I/d."""
    ops = []
    for k in range(d):
        for l in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[k, l] = 1.0 / sqrt(d)
            ops.append(E)
    return KrausChannel.from_operators(ops, TOL_DEFAULT)


def shift_clock_channel(d: int) -> KrausChannel:
    """Equal mixture of conjugations by the cyclic shift and the clock matrix.

    Generalizes the qubit dephasing fixture: irreducible with peripheral
    spectrum equal to the d-th roots of unity.
    """
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return KrausChannel.from_operators([shift / sqrt(2), clock / sqrt(2)], TOL_DEFAULT)


def plus_y_state() -> DensityMatrix:
    """(I + sigma_2)/2, the +1 eigenstate of sigma_2."""
    return DensityMatrix((SIGMA_0 + SIGMA_2) / 2)


CHANNEL_FIXTURES = {
    "pauli": dephasing_pauli_channel,
    "identity": lambda: identity_channel(2),
    "depolarizing": lambda: depolarizing_channel(2),
}


def channel_fixture(name: str) -> KrausChannel:
    try:
        return CHANNEL_FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown channel fixture {name!r}; choose from {sorted(CHANNEL_FIXTURES)}") from None


RHO0_PRESETS = ("mixed", "pure0", "plus-y")


def initial_state_preset(name: str, d: int) -> DensityMatrix:
    if name == "mixed":
        return DensityMatrix.maximally_mixed(d)
    if name == "pure0":
        e1 = np.zeros(d, dtype=complex)
        e1[0] = 1.0
        return DensityMatrix.pure(e1)
    if name == "plus-y":
        if d != 2:
            raise KeyError("preset 'plus-y' is only defined for d=2")
        return plus_y_state()
    raise KeyError(f"unknown initial state preset {name!r}; choose from {RHO0_PRESETS}")
