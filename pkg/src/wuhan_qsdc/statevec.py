"""Dense state-vector engine for registers of at most eight qubits.

Basis indices are big-endian in register order: for roles ``(m, a, b, c)``
the ket ``|m a b c>`` sits at index ``8m + 4a + 2b + c``. Every operation
returns a new :class:`StateVector`; inputs are never mutated.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from math import sqrt

import numpy as np

from wuhan_qsdc._backend import BACKEND, kernels

__all__ = [
    "BACKEND",
    "MAX_QUBITS",
    "TOL",
    "BellOutcome",
    "Gate",
    "Sign",
    "StateVector",
    "apply_gate",
    "bell_probabilities",
    "bx_probabilities",
    "bz_probabilities",
    "equal_up_to_global_phase",
    "measure_bell",
    "measure_bx",
    "measure_bz",
    "new_register",
    "qubit_state",
    "reduced_density_matrix",
    "tensor",
    "trial_rng",
]

MAX_QUBITS = 8
TOL = 1e-12

_S = 1 / sqrt(2)
_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "H": np.array([[_S, _S], [_S, -_S]], dtype=np.complex128),
}


class Sign(enum.Enum):
    """Outcome of a B_x measurement."""

    PLUS = "+"
    MINUS = "-"


class BellOutcome(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


# CNOT then H on the first qubit maps the Bell basis onto B_z:
# phi+ -> 00, psi+ -> 01, phi- -> 10, psi- -> 11.
_BELL_FROM_BITS = (
    BellOutcome.PHI_PLUS,
    BellOutcome.PSI_PLUS,
    BellOutcome.PHI_MINUS,
    BellOutcome.PSI_MINUS,
)
_BITS_FROM_BELL = {b: i for i, b in enumerate(_BELL_FROM_BITS)}


class StateVector:
    """Normalized amplitudes of an ``num_qubits``-qubit register.

    ``roles`` optionally labels each position (``"m"``, ``"a"``, ...); labels
    must be unique and are carried through :func:`tensor`.
    """

    __slots__ = ("amplitudes", "num_qubits", "roles")

    def __init__(self, amplitudes, roles=None, *, normalize=False, _trusted=False):
        if _trusted:
            self.amplitudes = amplitudes
            self.num_qubits = amplitudes.shape[0].bit_length() - 1
            self.roles = roles
            return
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or dim != 1 << n:
            raise ValueError(f"amplitude count {dim} is not a power of two >= 2")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
        norm = kernels.norm_sq(amps)
        if normalize:
            if norm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amps /= sqrt(norm)
        elif abs(norm - 1.0) > TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        if roles is not None:
            roles = tuple(roles)
            if len(roles) != n:
                raise ValueError(f"{len(roles)} roles for {n} qubits")
            if len(set(roles)) != n:
                raise ValueError(f"duplicate qubit roles {roles}")
        self.amplitudes = amps
        self.num_qubits = n
        self.roles = roles

    def _derive(self, amps, roles=None):
        return StateVector(amps, self.roles if roles is None else roles, _trusted=True)

    def index(self, qubit) -> int:
        """Resolve a role label or integer position to a qubit position."""
        if isinstance(qubit, str):
            if self.roles is None or qubit not in self.roles:
                raise KeyError(f"no qubit with role {qubit!r}")
            return self.roles.index(qubit)
        q = int(qubit)
        if not 0 <= q < self.num_qubits:
            raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
        return q

    def amplitude(self, bits: str) -> complex:
        """Amplitude of a basis ket written as a bit string, e.g. ``"100"``."""
        if len(bits) != self.num_qubits:
            raise ValueError(f"expected {self.num_qubits} bits, got {bits!r}")
        return complex(self.amplitudes[int(bits, 2)])

    def norm(self) -> float:
        return sqrt(kernels.norm_sq(self.amplitudes))

    def to_json(self) -> str:
        return json.dumps([[float(z.real), float(z.imag)] for z in self.amplitudes])

    @classmethod
    def from_json(cls, text: str, roles=None) -> StateVector:
        pairs = json.loads(text)
        return cls([complex(re, im) for re, im in pairs], roles)

    def __repr__(self):
        terms = [
            f"({z.real:+.4g}{z.imag:+.4g}j)|{i:0{self.num_qubits}b}>"
            for i, z in enumerate(self.amplitudes)
            if abs(z) > 1e-12
        ]
        return f"StateVector({' '.join(terms)}, roles={self.roles})"


@dataclass(frozen=True)
class Gate:
    kind: str
    operands: tuple

    def __post_init__(self):
        if self.kind not in ("X", "Z", "H", "CNOT"):
            raise ValueError(f"unknown gate {self.kind!r}")
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.operands) != arity:
            raise ValueError(f"{self.kind} takes {arity} operand(s)")
        if arity == 2 and self.operands[0] == self.operands[1]:
            raise ValueError("CNOT operands must be distinct")


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial, fixed by (master seed, index)."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.PCG64(seq))


def new_register(num_qubits: int, roles=None) -> StateVector:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"register size must be in 1..{MAX_QUBITS}, got {num_qubits}")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(amps, roles)


def tensor(left: StateVector, right: StateVector) -> StateVector:
    """Kronecker product; ``left``'s qubits come first."""
    n = left.num_qubits + right.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"combined register of {n} qubits exceeds {MAX_QUBITS}")
    if (left.roles is None) != (right.roles is None):
        raise ValueError("cannot tensor a labelled register with an unlabelled one")
    roles = None
    if left.roles is not None:
        roles = left.roles + right.roles
        if len(set(roles)) != n:
            raise ValueError(f"duplicate qubit roles {roles}")
    return StateVector(np.kron(left.amplitudes, right.amplitudes), roles, _trusted=True)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    qs = [state.index(q) for q in gate.operands]
    amps = state.amplitudes.copy()
    if gate.kind == "CNOT":
        if qs[0] == qs[1]:
            raise ValueError("CNOT operands resolve to the same qubit")
        kernels.apply_cnot(amps, state.num_qubits, qs[0], qs[1])
    else:
        kernels.apply_1q(amps, state.num_qubits, qs[0], _MATRICES[gate.kind])
    return state._derive(amps)


def _draw(probs, rng) -> int:
    # inverse CDF over the outcomes in their listed order
    u = rng.random()
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if u < acc:
            return k
    # u landed in the rounding slack above the total: take the last possible outcome
    return max(k for k, p in enumerate(probs) if p > 0.0)


def bz_probabilities(state: StateVector, qubit) -> tuple[float, float]:
    q = state.index(qubit)
    p1 = kernels.prob_one(state.amplitudes, state.num_qubits, q)
    p0 = kernels.norm_sq(state.amplitudes) - p1
    return p0, p1


def measure_bz(state: StateVector, qubit, rng=None, *, force=None):
    """Projective B_z measurement; returns ``(bit, collapsed state)``.

    With ``force`` the given bit is post-selected instead of sampled.
    """
    q = state.index(qubit)
    if force is None:
        bit = _draw(bz_probabilities(state, q), rng)
    else:
        bit = int(force)
    amps = state.amplitudes.copy()
    kernels.project(amps, state.num_qubits, q, bit)
    return bit, state._derive(amps)


def _h(state, q):
    amps = state.amplitudes.copy()
    kernels.apply_1q(amps, state.num_qubits, q, _MATRICES["H"])
    return state._derive(amps)


def bx_probabilities(state: StateVector, qubit) -> dict[Sign, float]:
    p0, p1 = bz_probabilities(_h(state, state.index(qubit)), qubit)
    return {Sign.PLUS: p0, Sign.MINUS: p1}


def measure_bx(state: StateVector, qubit, rng=None, *, force=None):
    """Projective B_x measurement; returns ``(Sign, collapsed state)``."""
    q = state.index(qubit)
    rotated = _h(state, q)
    bit, collapsed = measure_bz(
        rotated, q, rng, force=None if force is None else (force is Sign.MINUS)
    )
    return (Sign.MINUS if bit else Sign.PLUS), _h(collapsed, q)


def _bell_rotate(amps, n, q1, q2, inverse=False):
    if inverse:
        kernels.apply_1q(amps, n, q1, _MATRICES["H"])
        kernels.apply_cnot(amps, n, q1, q2)
    else:
        kernels.apply_cnot(amps, n, q1, q2)
        kernels.apply_1q(amps, n, q1, _MATRICES["H"])


def _pair(state, pair):
    q1, q2 = (state.index(q) for q in pair)
    if q1 == q2:
        raise ValueError("Bell measurement needs two distinct qubits")
    return q1, q2


def bell_probabilities(state: StateVector, pair) -> dict[BellOutcome, float]:
    q1, q2 = _pair(state, pair)
    amps = state.amplitudes.copy()
    _bell_rotate(amps, state.num_qubits, q1, q2)
    probs = kernels.pair_probs(amps, state.num_qubits, q1, q2)
    return dict(zip(_BELL_FROM_BITS, probs))


def measure_bell(state: StateVector, pair, rng=None, *, force=None):
    """Joint Bell-basis measurement of ``pair``; returns ``(BellOutcome, state)``.

    Implemented as CNOT + H, a B_z readout of both qubits, then the inverse
    rotation, so the pair is left in the observed Bell ket.
    """
    q1, q2 = _pair(state, pair)
    n = state.num_qubits
    amps = state.amplitudes.copy()
    _bell_rotate(amps, n, q1, q2)
    if force is None:
        k = _draw(kernels.pair_probs(amps, n, q1, q2), rng)
    else:
        k = _BITS_FROM_BELL[force]
    kernels.project(amps, n, q1, k >> 1)
    kernels.project(amps, n, q2, k & 1)
    _bell_rotate(amps, n, q1, q2, inverse=True)
    return _BELL_FROM_BITS[k], state._derive(amps)


def equal_up_to_global_phase(x: StateVector, y: StateVector, tol: float = 1e-9) -> bool:
    if x.num_qubits != y.num_qubits:
        raise ValueError("states have different sizes")
    overlap = np.vdot(y.amplitudes, x.amplitudes)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(x.amplitudes - phase * y.amplitudes)) <= tol


def reduced_density_matrix(state: StateVector, qubits) -> np.ndarray:
    """Partial trace keeping ``qubits`` in the given order."""
    keep = [state.index(q) for q in qubits]
    n = state.num_qubits
    rest = [k for k in range(n) if k not in keep]
    psi = state.amplitudes.reshape((2,) * n).transpose(keep + rest)
    psi = psi.reshape(1 << len(keep), 1 << len(rest))
    return psi @ psi.conj().T


def qubit_state(state: StateVector, qubit, tol: float = 1e-10) -> StateVector:
    """Pure state of one qubit that is in a product state with the rest.

    Raises ``ValueError`` when the qubit is entangled with the register.
    """
    rho = reduced_density_matrix(state, [qubit])
    vals, vecs = np.linalg.eigh(rho)
    if vals[1] < 1 - tol:
        raise ValueError(f"qubit {qubit!r} is not in a pure state (purity {vals[1]:.6f})")
    return StateVector(vecs[:, 1], normalize=True)
