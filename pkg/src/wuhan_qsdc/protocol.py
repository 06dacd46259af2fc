"""Supervised entanglement sharing between Alice and Bob under Charlie.

A :class:`Session` walks through the steps in order:

1. transmission mode: Charlie prepares ``sequence_length`` tripartite states,
   keeps every ``c`` and sends ``a`` to Alice, ``b`` to Bob;
2. detecting mode: a random subset of triples is measured in B_z by all
   three parties and checked against the ideal outcome pattern;
3. any failed check aborts the session;
4. distillation: Charlie measures the remaining ``c`` qubits and announces
   the locations that gave 0;
5. the announced ``(a, b)`` pairs form the entanglement pool.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from wuhan_qsdc import statevec as sv
from wuhan_qsdc.channels import (
    ClassicalBus,
    Custody,
    InterceptHook,
    PartyId,
    QuantumChannel,
    QubitRef,
    RecordTag,
    RegisterSet,
)
from wuhan_qsdc.states import InitialStateKind, bell_state, initial_state
from wuhan_qsdc.statevec import BellOutcome

log = logging.getLogger(__name__)

# Bell state left on (a, b) when Charlie reads c = 0.
DISTILLED_STATE = {
    InitialStateKind.W: BellOutcome.PSI_PLUS,
    InitialStateKind.XI: BellOutcome.PHI_PLUS,
}


class ProtocolError(Exception):
    pass


class PoolExhausted(ProtocolError):
    pass


class Verdict(enum.Enum):
    COMPLETED = "completed"
    ABORTED = "aborted"


class Decision(enum.Enum):
    CONTINUE = "continue"
    ABORT = "abort"


@dataclass(frozen=True)
class SessionConfig:
    sequence_length: int
    check_fraction: float = 0.5
    initial_state: InitialStateKind = InitialStateKind.W
    seed: int = 0

    def __post_init__(self):
        if self.sequence_length < 1:
            raise ValueError("sequence_length must be positive")
        if not 0.0 < self.check_fraction < 1.0:
            raise ValueError(f"check_fraction must lie in (0, 1), got {self.check_fraction}")
        if self.check_fraction * self.sequence_length < 1:
            raise ValueError("check_fraction * sequence_length must be at least 1")


@dataclass(frozen=True)
class PairHandle:
    register: int
    alice: QubitRef
    bob: QubitRef
    channel: BellOutcome


class EntanglementPool:
    """Distilled pairs in announcement order, consumed front to back."""

    def __init__(self, channel: BellOutcome):
        self.channel = channel
        self.handles: list[PairHandle] = []
        self._position: dict[int, int] = {}
        self._consumed: set[int] = set()
        self._cursor = 0

    def add(self, handle: PairHandle):
        self._position[handle.register] = len(self.handles)
        self.handles.append(handle)

    def __len__(self):
        return len(self.handles)

    @property
    def available(self) -> int:
        return len(self.handles) - len(self._consumed)

    def consume(self, handle: PairHandle):
        pos = self._position.get(handle.register)
        if pos is None or self.handles[pos] != handle:
            raise ProtocolError(f"{handle} is not in the pool")
        if handle.register in self._consumed:
            raise ProtocolError(f"pair in register {handle.register} was already consumed")
        self._consumed.add(handle.register)

    def next_free(self) -> PairHandle:
        while self._cursor < len(self.handles):
            handle = self.handles[self._cursor]
            if handle.register not in self._consumed:
                return handle
            self._cursor += 1
        raise PoolExhausted(f"all {len(self.handles)} pooled pairs are consumed")

    def take(self) -> PairHandle:
        handle = self.next_free()
        self.consume(handle)
        return handle


@dataclass
class CheckSummary:
    locations: list[int] = field(default_factory=list)
    outcomes: list[tuple[int, int, int]] = field(default_factory=list)
    passed: list[bool] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return self.passed.count(False)


def check_triple(outcomes, kind: InitialStateKind) -> bool:
    """Ideal-pattern test on B_z outcomes ordered (a, b, c).

    W triples must show exactly one 1; xi triples must have even parity.
    """
    ones = sum(outcomes)
    if kind is InitialStateKind.W:
        return ones == 1
    return ones % 2 == 0


def decide(results) -> Decision:
    results = list(results)
    if not results:
        raise ProtocolError("no check rounds to decide on")
    return Decision.CONTINUE if all(results) else Decision.ABORT


class Session:
    """One run of the supervised sharing protocol.

    ``hook`` is installed on the quantum channel and sees every travel qubit.
    """

    def __init__(self, config: SessionConfig, rng=None, hook: Optional[InterceptHook] = None):
        self.config = config
        self.kind = config.initial_state
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.bus = ClassicalBus()
        self.registers = RegisterSet()
        self.custody = Custody()
        self.channel = QuantumChannel(self.registers, self.custody, self.rng, hook)
        self.triples: list[int] = []
        self.checks = CheckSummary()
        self.pool = EntanglementPool(DISTILLED_STATE[self.kind])
        self.verdict: Optional[Verdict] = None
        self.distill_candidates = 0
        self._measured: set[int] = set()

    # distribution
    def prepare_and_distribute(self):
        self.bus.publish(PartyId.CHARLIE, RecordTag.MODE_SWITCH, ["transmission"])
        proto = initial_state(self.kind)
        for _ in range(self.config.sequence_length):
            reg = self.registers.add(sv.StateVector(proto.amplitudes.copy(), proto.roles, _trusted=True))
            for role in ("a", "b", "c"):
                self.custody.assign(reg.ref(role), PartyId.CHARLIE)
            self.channel.send_qubit(reg.ref("a"), PartyId.CHARLIE, PartyId.ALICE)
            self.channel.send_qubit(reg.ref("b"), PartyId.CHARLIE, PartyId.BOB)
            self.triples.append(reg.id)
        return self.registers, self.custody

    def _measure(self, party: PartyId, triple: int, role: str) -> int:
        reg = self.registers[triple]
        self.custody.require(reg.ref(role), party)
        bit, reg.state = sv.measure_bz(reg.state, role, self.rng)
        return bit

    def detecting_round(self, triple: int) -> tuple[int, int, int]:
        """B_z outcomes (a, b, c) for one checked triple."""
        if triple in self._measured:
            raise ProtocolError(f"triple {triple} was already consumed")
        self._measured.add(triple)
        c = self._measure(PartyId.CHARLIE, triple, "c")
        a = self._measure(PartyId.ALICE, triple, "a")
        b = self._measure(PartyId.BOB, triple, "b")
        return a, b, c

    # detecting mode
    def select_checks(self) -> list[int]:
        picks = self.rng.random(len(self.triples)) < self.config.check_fraction
        chosen = [t for t, p in zip(self.triples, picks) if p]
        if not chosen:
            # a detecting mode with no checks would certify nothing
            chosen = [self.triples[int(self.rng.integers(len(self.triples)))]]
        return chosen

    def detecting_mode(self, locations=None) -> CheckSummary:
        if locations is None:
            locations = self.select_checks()
        self.bus.publish(PartyId.CHARLIE, RecordTag.MODE_SWITCH, ["detecting"])
        self.bus.publish(PartyId.CHARLIE, RecordTag.LOCATIONS, locations)
        outcomes = [self.detecting_round(t) for t in locations]
        self.bus.publish(PartyId.ALICE, RecordTag.OUTCOMES, [o[0] for o in outcomes])
        self.bus.publish(PartyId.BOB, RecordTag.OUTCOMES, [o[1] for o in outcomes])
        self.bus.publish(PartyId.CHARLIE, RecordTag.OUTCOMES, [o[2] for o in outcomes])
        self.checks = CheckSummary(
            list(locations), outcomes, [check_triple(o, self.kind) for o in outcomes]
        )
        return self.checks

    # abort decision
    def check_decision(self) -> Decision:
        decision = decide(self.checks.passed)
        if decision is Decision.ABORT:
            failed = [t for t, ok in zip(self.checks.locations, self.checks.passed) if not ok]
            self.bus.publish(PartyId.CHARLIE, RecordTag.ABORT, failed)
            self.verdict = Verdict.ABORTED
            log.debug("session aborted: %d failed checks", len(failed))
        return decision

    def remaining(self) -> list[int]:
        return [t for t in self.triples if t not in self._measured]

    # distillation
    def distill(self) -> EntanglementPool:
        if self.verdict is Verdict.ABORTED:
            raise ProtocolError("cannot distill in an aborted session")
        self.bus.publish(PartyId.CHARLIE, RecordTag.MODE_SWITCH, ["distillation"])
        zeros = []
        candidates = self.remaining()
        self.distill_candidates = len(candidates)
        for t in candidates:
            self._measured.add(t)
            if self._measure(PartyId.CHARLIE, t, "c") == 0:
                zeros.append(t)
        self.bus.publish(PartyId.CHARLIE, RecordTag.LOCATIONS, zeros)
        for t in zeros:
            reg = self.registers[t]
            self.pool.add(PairHandle(t, reg.ref("a"), reg.ref("b"), self.pool.channel))
        self.verdict = Verdict.COMPLETED
        return self.pool

    def run_checks(self) -> Decision:
        """Distribute, check, and decide; no distillation."""
        self.prepare_and_distribute()
        self.detecting_mode()
        return self.check_decision()

    def run(self) -> Session:
        """The full protocol; ``verdict`` tells whether a pool was produced."""
        if self.run_checks() is Decision.CONTINUE:
            self.distill()
        return self

    def pair_fidelities(self) -> list[float]:
        """Fidelity of every pooled pair with the ideal distilled Bell state."""
        target = bell_state(self.pool.channel).amplitudes
        out = []
        for h in self.pool.handles:
            rho = sv.reduced_density_matrix(self.registers[h.register].state, ["a", "b"])
            out.append(float(np.real(np.vdot(target, rho @ target))))
        return out
