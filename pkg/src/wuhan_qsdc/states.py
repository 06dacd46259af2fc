"""Named states used by the protocol: W, xi, the Bell kets and message qubits."""

from __future__ import annotations

import enum
from math import sqrt

import numpy as np

from wuhan_qsdc.statevec import BellOutcome, StateVector

_S2 = 1 / sqrt(2)
_S3 = 1 / sqrt(3)

_W = np.zeros(8, dtype=np.complex128)
_W[[0b100, 0b010, 0b001]] = _S3

_XI = np.zeros(8, dtype=np.complex128)
_XI[[0b000, 0b110, 0b011, 0b101]] = 0.5

_BELL = {
    BellOutcome.PHI_PLUS: {0b00: _S2, 0b11: _S2},
    BellOutcome.PHI_MINUS: {0b00: _S2, 0b11: -_S2},
    BellOutcome.PSI_PLUS: {0b01: _S2, 0b10: _S2},
    BellOutcome.PSI_MINUS: {0b01: _S2, 0b10: -_S2},
}

TRIPLE_ROLES = ("a", "b", "c")


class InitialStateKind(enum.Enum):
    W = "W"
    XI = "Xi"


def w_state() -> StateVector:
    """(|100> + |010> + |001>)/sqrt(3) on roles (a, b, c)."""
    return StateVector(_W.copy(), TRIPLE_ROLES, _trusted=True)


def xi_state() -> StateVector:
    """(|000> + |110> + |011> + |101>)/2 on roles (a, b, c)."""
    return StateVector(_XI.copy(), TRIPLE_ROLES, _trusted=True)


def initial_state(kind: InitialStateKind) -> StateVector:
    return w_state() if kind is InitialStateKind.W else xi_state()


def bell_state(kind: BellOutcome, roles=None) -> StateVector:
    amps = np.zeros(4, dtype=np.complex128)
    for idx, amp in _BELL[kind].items():
        amps[idx] = amp
    return StateVector(amps, roles)


def message_qubit(a: complex, b: complex, role="m") -> StateVector:
    """a|0> + b|1>; the pair is rescaled to unit norm."""
    return StateVector([a, b], None if role is None else (role,), normalize=True)


def encode_message_qubit(bit: int, role="m") -> StateVector:
    """B_x encoding: 1 -> |+>, 0 -> |->."""
    if bit not in (0, 1):
        raise ValueError(f"message bit must be 0 or 1, got {bit!r}")
    return message_qubit(1, 1 if bit else -1, role)


def encode_message(bits) -> list[StateVector]:
    return [encode_message_qubit(int(b)) for b in bits]
