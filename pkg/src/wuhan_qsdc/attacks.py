"""Adversaries: channel eavesdroppers and the out-of-control attack.

Channel attacks are intercept hooks run by the quantum channel while a travel
qubit is in flight. The out-of-control attack (OCA) is run by Alice and Bob
themselves: they skip Charlie's distillation measurement and decode the
message from Alice's Bell result and Bob's raw B_x outcome alone.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import ceil
from typing import Optional

from wuhan_qsdc import statevec as sv
from wuhan_qsdc.channels import PartyId, QubitRef, RecordTag, TransitQubit
from wuhan_qsdc.protocol import Decision, Session, SessionConfig
from wuhan_qsdc.qsdc import QsdcRun
from wuhan_qsdc.states import InitialStateKind, encode_message_qubit, initial_state
from wuhan_qsdc.statevec import BellOutcome, Sign


class AttackKind(enum.Enum):
    INTERCEPT_RESEND_BZ = "intercept-resend-bz"
    INTERCEPT_RESEND_BX = "intercept-resend-bx"
    ENTANGLE_PROBE = "entangle-probe"
    OCA_XI = "oca-xi"
    OCA_W = "oca-w"

    @property
    def is_oca(self) -> bool:
        return self in (AttackKind.OCA_XI, AttackKind.OCA_W)


OCA_INITIAL_STATE = {
    AttackKind.OCA_XI: InitialStateKind.XI,
    AttackKind.OCA_W: InitialStateKind.W,
}


class InterceptResend:
    """Measure each targeted travel qubit in ``basis`` and let it go on."""

    def __init__(self, basis: str = "Bz", targets=("a",)):
        if basis not in ("Bz", "Bx"):
            raise ValueError(f"basis must be 'Bz' or 'Bx', got {basis!r}")
        self.basis = basis
        self.targets = frozenset(targets)
        self.intercepted: dict[QubitRef, object] = {}

    def __call__(self, transit: TransitQubit):
        if transit.ref.role not in self.targets:
            return
        if self.basis == "Bz":
            self.intercepted[transit.ref] = transit.measure_bz()
        else:
            self.intercepted[transit.ref] = transit.measure_bx()


class EntangleProbe:
    """CNOT each targeted travel qubit onto a fresh ancilla kept by Eve."""

    def __init__(self, targets=("a",)):
        self.targets = frozenset(targets)
        self.ancillas: dict[QubitRef, QubitRef] = {}

    def __call__(self, transit: TransitQubit):
        if transit.ref.role not in self.targets:
            return
        anc = transit.adjoin_ancilla(f"ancilla_{transit.ref.role}")
        transit.apply("CNOT", transit.ref, anc)
        self.ancillas[transit.ref] = anc

    def read_out(self, session: Session, rng=None) -> dict[QubitRef, int]:
        """Eve's B_z readout of every ancilla, keyed by the probed qubit."""
        rng = session.rng if rng is None else rng
        bits = {}
        for probed, anc in self.ancillas.items():
            session.custody.require(anc, PartyId.EVE)
            reg = session.registers[anc.register]
            bits[probed], reg.state = sv.measure_bz(reg.state, anc.role, rng)
        return bits


def intercept_resend(basis: str, targets=("a",)) -> InterceptResend:
    return InterceptResend(basis, targets)


def entangle_probe(targets=("a",)) -> EntangleProbe:
    return EntangleProbe(targets)


def make_hook(kind: Optional[AttackKind], targets=("a",)):
    """Fresh per-trial hook for a channel attack; ``None`` for the rest."""
    if kind is AttackKind.INTERCEPT_RESEND_BZ:
        return intercept_resend("Bz", targets)
    if kind is AttackKind.INTERCEPT_RESEND_BX:
        return intercept_resend("Bx", targets)
    if kind is AttackKind.ENTANGLE_PROBE:
        return entangle_probe(targets)
    return None


# (Alice's Bell result, Bob's B_x sign) in a fixed order
COMBOS = tuple(itertools.product(BellOutcome, Sign))

_P, _M = Sign.PLUS, Sign.MINUS
_PHI_P, _PHI_M = BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS
_PSI_P, _PSI_M = BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS

# decode 1 when the Bell result's sign agrees with Bob's B_x sign
SIGN_MATCH_RULE = {
    (_PHI_P, _P): 1, (_PSI_P, _P): 1,
    (_PHI_M, _M): 1, (_PSI_M, _M): 1,
    (_PHI_P, _M): 0, (_PSI_P, _M): 0,
    (_PHI_M, _P): 0, (_PSI_M, _P): 0,
}


def oca_decode(rule, bell: BellOutcome, sign: Sign) -> int:
    return rule[(bell, sign)]


@dataclass
class OcaRun(QsdcRun):
    signs: list[Sign] = field(default_factory=list)
    c_outcomes: list[int] = field(default_factory=list)

    @property
    def success(self) -> list[bool]:
        return [s == d for s, d in zip(self.sent, self.decoded)]


def _unmeasured_triples(kind, count, rng, check_fraction):
    """Run distribution and checks until ``count`` unchecked triples are available."""
    sessions, triples = [], []
    while len(triples) < count:
        need = count - len(triples)
        length = max(ceil(need / (1 - check_fraction) * 1.2) + 8, ceil(1 / check_fraction))
        session = Session(SessionConfig(length, check_fraction, kind), rng=rng)
        sessions.append(session)
        if session.run_checks() is Decision.CONTINUE:
            triples.extend((session, t) for t in session.remaining())
    return sessions, triples[:count]


def run_oca_session(kind: AttackKind, message_bits, rng, *, check_fraction=0.5, rule=None):
    """Alice-to-Bob transfer over undistilled triples, bypassing Charlie.

    Charlie distributes and checks as usual but never measures the remaining
    ``c`` qubits before Bob decodes. Returns the run and the sessions used.
    """
    if not kind.is_oca:
        raise ValueError(f"{kind} is not an out-of-control attack")
    rule = SIGN_MATCH_RULE if rule is None else rule
    bits = [int(b) for b in message_bits]
    sessions, triples = _unmeasured_triples(OCA_INITIAL_STATE[kind], len(bits), rng, check_fraction)
    run = OcaRun()
    for bit, (session, t) in zip(bits, triples):
        reg = session.registers[t]
        m_ref = QubitRef(t, "m")
        reg.attach_front(encode_message_qubit(bit))
        session.custody.assign(m_ref, PartyId.ALICE)
        session.custody.require(reg.ref("a"), PartyId.ALICE)
        bell, reg.state = sv.measure_bell(reg.state, ("m", "a"), rng)
        session.bus.publish(PartyId.ALICE, RecordTag.BELL_RESULT, [bell.value])
        session.custody.require(reg.ref("b"), PartyId.BOB)
        sign, reg.state = sv.measure_bx(reg.state, "b", rng)
        run.sent.append(bit)
        run.outcomes.append(bell)
        run.signs.append(sign)
        run.decoded.append(oca_decode(rule, bell, sign))
        run.pairs_consumed += 1
        # Charlie's eventual home-qubit reading; diagnostic only, never published
        c, reg.state = sv.measure_bz(reg.state, "c", rng)
        run.c_outcomes.append(c)
    return run, sessions


def oca_outcome_distribution(kind: AttackKind) -> dict[tuple[int, int, BellOutcome, Sign], float]:
    """Exact P(c, Bell result, sign | bit) keyed by (bit, c, bell, sign).

    Computed by post-selecting every branch of the four-qubit state.
    """
    dist = {}
    for bit in (0, 1):
        state = sv.tensor(encode_message_qubit(bit), initial_state(OCA_INITIAL_STATE[kind]))
        for bell, p_bell in sv.bell_probabilities(state, ("m", "a")).items():
            if p_bell == 0.0:
                continue
            _, s1 = sv.measure_bell(state, ("m", "a"), force=bell)
            for sign, p_sign in sv.bx_probabilities(s1, "b").items():
                if p_sign < 1e-15:
                    continue
                _, s2 = sv.measure_bx(s1, "b", force=sign)
                for c, p_c in enumerate(sv.bz_probabilities(s2, "c")):
                    if p_c < 1e-15:
                        continue
                    dist[(bit, c, bell, sign)] = p_bell * p_sign * p_c
    return dist


def combo_likelihoods(dist) -> dict[int, dict[tuple[BellOutcome, Sign], float]]:
    """Marginalize c out: P((bell, sign) | bit)."""
    out = {0: dict.fromkeys(COMBOS, 0.0), 1: dict.fromkeys(COMBOS, 0.0)}
    for (bit, _c, bell, sign), p in dist.items():
        out[bit][(bell, sign)] += p
    return out


def rule_success(rule, likelihoods) -> float:
    """Per-bit success probability of ``rule`` for uniformly random bits."""
    return 0.5 * sum(likelihoods[rule[combo]][combo] for combo in COMBOS)


def search_decode_rules(dist):
    """Score all 2**8 decode rules; returns (best success, best rules)."""
    like = combo_likelihoods(dist)
    scored = []
    for assignment in itertools.product((0, 1), repeat=len(COMBOS)):
        rule = dict(zip(COMBOS, assignment))
        scored.append((rule_success(rule, like), rule))
    best = max(s for s, _ in scored)
    return best, [r for s, r in scored if abs(s - best) < 1e-12]
