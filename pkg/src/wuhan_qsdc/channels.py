"""Simulated classical bus and quantum channel.

The whole trial lives in one :class:`RegisterSet`: a list of small registers,
one per tripartite state (plus any message qubit or eavesdropper ancilla later
attached to it). Sending a qubit only moves its custody label; if an
intercept hook is installed it acts on the register while the qubit is in
transit.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from wuhan_qsdc import statevec as sv
from wuhan_qsdc.statevec import Gate, StateVector


class PartyId(enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"
    CHARLIE = "Charlie"
    EVE = "Eve"


class RecordTag(enum.Enum):
    MODE_SWITCH = "mode-switch"
    LOCATIONS = "locations"
    OUTCOMES = "outcomes"
    BELL_RESULT = "bell-result"
    ABORT = "abort"


class AuthenticationError(Exception):
    """A party that is not a legitimate participant tried to publish."""


class CustodyError(Exception):
    """A party acted on a qubit it does not hold."""


@dataclass(frozen=True)
class ClassicalRecord:
    seq: int
    sender: PartyId
    tag: RecordTag
    payload: tuple

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "sender": self.sender.value,
            "tag": self.tag.value,
            "payload": list(self.payload),
        }


class ClassicalBus:
    """Public, authenticated, append-only classical channel."""

    LEGITIMATE = frozenset({PartyId.ALICE, PartyId.BOB, PartyId.CHARLIE})

    def __init__(self):
        self._records: list[ClassicalRecord] = []

    def publish(self, sender: PartyId, tag: RecordTag, payload=()) -> ClassicalRecord:
        if sender not in self.LEGITIMATE:
            raise AuthenticationError(f"{sender.value} cannot publish on the authenticated bus")
        record = ClassicalRecord(len(self._records), sender, tag, tuple(payload))
        self._records.append(record)
        return record

    @property
    def records(self) -> tuple[ClassicalRecord, ...]:
        return tuple(self._records)

    def __len__(self):
        return len(self._records)

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self._records], separators=(",", ":"))


class QubitRef(NamedTuple):
    """A qubit named by its register and its role within that register."""

    register: int
    role: str


class Register:
    """One independently simulated block of the global state."""

    __slots__ = ("id", "state")

    def __init__(self, reg_id: int, state: StateVector):
        if state.roles is None:
            raise ValueError("registers need role-labelled states")
        self.id = reg_id
        self.state = state

    def ref(self, role: str) -> QubitRef:
        self.state.index(role)
        return QubitRef(self.id, role)

    def attach_front(self, state: StateVector):
        self.state = sv.tensor(state, self.state)

    def attach_back(self, state: StateVector):
        self.state = sv.tensor(self.state, state)


class RegisterSet:
    """The logically batched global state of one trial."""

    def __init__(self):
        self._registers: list[Register] = []

    def add(self, state: StateVector) -> Register:
        reg = Register(len(self._registers), state)
        self._registers.append(reg)
        return reg

    def __getitem__(self, reg_id: int) -> Register:
        return self._registers[reg_id]

    def __len__(self):
        return len(self._registers)

    def __iter__(self):
        return iter(self._registers)


class Custody:
    """Who holds each qubit right now."""

    def __init__(self):
        self._holder: dict[QubitRef, PartyId] = {}

    def assign(self, ref: QubitRef, party: PartyId):
        """Record a freshly created qubit in its creator's hands."""
        if ref in self._holder:
            raise CustodyError(f"{ref} already exists")
        self._holder[ref] = party

    def holder(self, ref: QubitRef) -> PartyId:
        return self._holder[ref]

    def require(self, ref: QubitRef, party: PartyId):
        held_by = self._holder.get(ref)
        if held_by is not party:
            raise CustodyError(f"{party.value} does not hold {ref} (holder: {held_by})")

    def _transfer(self, ref: QubitRef, party: PartyId):
        self._holder[ref] = party

    def census(self) -> Counter:
        return Counter(self._holder.values())

    def held_by(self, party: PartyId) -> list[QubitRef]:
        return [ref for ref, p in self._holder.items() if p is party]

    def __len__(self):
        return len(self._holder)


class TransitQubit:
    """Adversary's handle on a qubit in flight.

    Only the in-transit qubit and ancillas already held by Eve can be touched.
    """

    def __init__(self, registers: RegisterSet, custody: Custody, ref: QubitRef, rng):
        self._reg = registers[ref.register]
        self._custody = custody
        self.ref = ref
        self.rng = rng

    def _check(self, ref: QubitRef):
        if ref.register != self.ref.register:
            raise CustodyError(f"hook cannot reach register {ref.register}")
        if ref != self.ref and self._custody.holder(ref) is not PartyId.EVE:
            raise CustodyError(f"hook cannot touch {ref}, held by {self._custody.holder(ref).value}")

    def measure_bz(self) -> int:
        bit, self._reg.state = sv.measure_bz(self._reg.state, self.ref.role, self.rng)
        return bit

    def measure_bx(self) -> sv.Sign:
        sign, self._reg.state = sv.measure_bx(self._reg.state, self.ref.role, self.rng)
        return sign

    def adjoin_ancilla(self, role: str = "ancilla") -> QubitRef:
        """Append a fresh |0> owned by Eve to the qubit's register."""
        self._reg.attach_back(sv.new_register(1, (role,)))
        ref = QubitRef(self._reg.id, role)
        self._custody.assign(ref, PartyId.EVE)
        return ref

    def apply(self, kind: str, *refs: QubitRef):
        for ref in refs:
            self._check(ref)
        self._reg.state = sv.apply_gate(self._reg.state, Gate(kind, tuple(r.role for r in refs)))


InterceptHook = Callable[[TransitQubit], None]


class QuantumChannel:
    """Lossless, noiseless qubit transport with an optional interception hook."""

    def __init__(self, registers: RegisterSet, custody: Custody, rng, hook: Optional[InterceptHook] = None):
        self.registers = registers
        self.custody = custody
        self.rng = rng
        self.hook = hook

    def send_qubit(self, ref: QubitRef, sender: PartyId, receiver: PartyId):
        self.custody.require(ref, sender)
        self.custody._transfer(ref, PartyId.EVE if self.hook else receiver)
        if self.hook is not None:
            self.hook(TransitQubit(self.registers, self.custody, ref, self.rng))
            self.custody._transfer(ref, receiver)
