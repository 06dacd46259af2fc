"""Direct communication by teleporting B_x-encoded message qubits.

Alice encodes each bit as |+> (1) or |-> (0), Bell-measures it together with
her half of a pooled pair and publishes the result; Bob applies the Pauli
correction for that result and reads the bit out in B_x. The message qubit
never leaves Alice's custody.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from wuhan_qsdc import statevec as sv
from wuhan_qsdc.channels import PartyId, QubitRef, RecordTag
from wuhan_qsdc.protocol import PairHandle, PoolExhausted, Session
from wuhan_qsdc.states import encode_message_qubit
from wuhan_qsdc.statevec import BellOutcome, Gate, Sign, StateVector

_PHI_P, _PHI_M = BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS
_PSI_P, _PSI_M = BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS

# Gates applied left to right on Bob's qubit, keyed by the shared pair's
# Bell state and then by Alice's announced result.
CORRECTIONS = {
    _PSI_P: {_PSI_P: (), _PSI_M: ("Z",), _PHI_P: ("X",), _PHI_M: ("Z", "X")},
    _PHI_P: {_PHI_P: (), _PHI_M: ("Z",), _PSI_P: ("X",), _PSI_M: ("Z", "X")},
}


def correction_for(outcome: BellOutcome, channel: BellOutcome = _PSI_P) -> tuple[str, ...]:
    try:
        return CORRECTIONS[channel][outcome]
    except KeyError:
        raise ValueError(f"no correction table for a {channel.value} channel") from None


def decode_sign(sign: Sign) -> int:
    return 1 if sign is Sign.PLUS else 0


@dataclass
class Teleported:
    outcome: BellOutcome
    session: Session
    bob: QubitRef

    def bob_state(self) -> StateVector:
        """Bob's qubit as a pure state; fails if it is still entangled."""
        return sv.qubit_state(self.session.registers[self.bob.register].state, self.bob.role)


@dataclass
class QsdcRun:
    sent: list[int] = field(default_factory=list)
    outcomes: list[BellOutcome] = field(default_factory=list)
    decoded: list[int] = field(default_factory=list)
    pairs_consumed: int = 0

    @property
    def errors(self) -> int:
        return sum(s != d for s, d in zip(self.sent, self.decoded))

    @property
    def bit_error_rate(self) -> Optional[float]:
        return self.errors / len(self.sent) if self.sent else None


def teleport_one(
    session: Session, message: StateVector, handle: PairHandle, rng=None, *, force=None
) -> Teleported:
    """Teleport ``message`` over one pooled pair.

    ``force`` post-selects Alice's Bell result instead of sampling it.
    """
    rng = session.rng if rng is None else rng
    session.pool.consume(handle)
    reg = session.registers[handle.register]
    m_ref = QubitRef(reg.id, message.roles[0] if message.roles else "m")
    reg.attach_front(StateVector(message.amplitudes, (m_ref.role,), _trusted=True))
    session.custody.assign(m_ref, PartyId.ALICE)

    session.custody.require(handle.alice, PartyId.ALICE)
    outcome, reg.state = sv.measure_bell(reg.state, (m_ref.role, handle.alice.role), rng, force=force)
    session.bus.publish(PartyId.ALICE, RecordTag.BELL_RESULT, [outcome.value])

    session.custody.require(handle.bob, PartyId.BOB)
    for kind in correction_for(outcome, handle.channel):
        reg.state = sv.apply_gate(reg.state, Gate(kind, (handle.bob.role,)))
    session.custody.require(m_ref, PartyId.ALICE)
    return Teleported(outcome, session, handle.bob)


def run_qsdc(session: Session, message_bits, rng=None) -> QsdcRun:
    bits = [int(b) for b in message_bits]
    if session.pool.available < len(bits):
        raise PoolExhausted(f"{len(bits)} bits need {len(bits)} pairs, pool has {session.pool.available}")
    rng = session.rng if rng is None else rng
    run = QsdcRun()
    for bit in bits:
        sent = teleport_one(session, encode_message_qubit(bit), session.pool.next_free(), rng)
        reg = session.registers[sent.bob.register]
        sign, reg.state = sv.measure_bx(reg.state, sent.bob.role, rng)
        run.sent.append(bit)
        run.outcomes.append(sent.outcome)
        run.decoded.append(decode_sign(sign))
        run.pairs_consumed += 1
    return run
