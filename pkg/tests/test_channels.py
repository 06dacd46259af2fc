import json
from collections import Counter

import pytest

from wuhan_qsdc import statevec as sv
from wuhan_qsdc.channels import (
    AuthenticationError,
    ClassicalBus,
    Custody,
    CustodyError,
    PartyId,
    QuantumChannel,
    QubitRef,
    RecordTag,
    RegisterSet,
)
from wuhan_qsdc.states import w_state


def test_publish_appends():
    bus = ClassicalBus()
    bus.publish(PartyId.CHARLIE, RecordTag.LOCATIONS, [2, 5, 7])
    assert len(bus) == 1
    r = bus.publish(PartyId.ALICE, RecordTag.OUTCOMES, [0, 1, 0])
    assert [x.seq for x in bus.records] == [0, 1]
    assert r.payload == (0, 1, 0)


def test_eve_cannot_publish():
    bus = ClassicalBus()
    with pytest.raises(AuthenticationError):
        bus.publish(PartyId.EVE, RecordTag.OUTCOMES, [1])
    assert len(bus) == 0


def test_records_immutable():
    bus = ClassicalBus()
    rec = bus.publish(PartyId.BOB, RecordTag.OUTCOMES, [1])
    with pytest.raises(AttributeError):
        rec.payload = (0,)
    snapshot = bus.records
    bus.publish(PartyId.BOB, RecordTag.OUTCOMES, [0])
    assert len(snapshot) == 1


def test_transcript_json_schema():
    bus = ClassicalBus()
    bus.publish(PartyId.CHARLIE, RecordTag.MODE_SWITCH, ["detecting"])
    bus.publish(PartyId.ALICE, RecordTag.BELL_RESULT, ["psi+"])
    doc = json.loads(bus.to_json())
    assert doc == [
        {"seq": 0, "sender": "Charlie", "tag": "mode-switch", "payload": ["detecting"]},
        {"seq": 1, "sender": "Alice", "tag": "bell-result", "payload": ["psi+"]},
    ]


def _setup(hook=None):
    regs, custody = RegisterSet(), Custody()
    reg = regs.add(w_state())
    for role in "abc":
        custody.assign(reg.ref(role), PartyId.CHARLIE)
    import numpy as np
    return regs, custody, QuantumChannel(regs, custody, np.random.default_rng(0), hook), reg


def test_send_transfers_custody_only():
    regs, custody, chan, reg = _setup()
    before = reg.state.amplitudes.copy()
    census = custody.census()
    chan.send_qubit(reg.ref("a"), PartyId.CHARLIE, PartyId.ALICE)
    assert custody.holder(reg.ref("a")) is PartyId.ALICE
    assert (reg.state.amplitudes == before).all()
    assert sum(custody.census().values()) == sum(census.values())


def test_send_requires_custody():
    _, _, chan, reg = _setup()
    with pytest.raises(CustodyError):
        chan.send_qubit(reg.ref("a"), PartyId.ALICE, PartyId.BOB)


def test_hook_runs_in_transit():
    seen = []

    def hook(transit):
        seen.append((transit.ref, transit._custody.holder(transit.ref)))
        transit.measure_bz()

    regs, custody, chan, reg = _setup(hook)
    chan.send_qubit(reg.ref("a"), PartyId.CHARLIE, PartyId.ALICE)
    assert seen == [(QubitRef(0, "a"), PartyId.EVE)]
    assert custody.holder(reg.ref("a")) is PartyId.ALICE
    p0, p1 = sv.bz_probabilities(reg.state, "a")
    assert min(p0, p1) == 0.0


def test_hook_cannot_touch_other_qubits():
    def hook(transit):
        transit.apply("X", QubitRef(transit.ref.register, "c"))

    _, _, chan, reg = _setup(hook)
    with pytest.raises(CustodyError):
        chan.send_qubit(reg.ref("a"), PartyId.CHARLIE, PartyId.ALICE)


def test_hook_ancilla_is_eves():
    def hook(transit):
        anc = transit.adjoin_ancilla()
        transit.apply("CNOT", transit.ref, anc)

    _, custody, chan, reg = _setup(hook)
    chan.send_qubit(reg.ref("a"), PartyId.CHARLIE, PartyId.ALICE)
    assert reg.state.roles == ("a", "b", "c", "ancilla")
    assert custody.holder(QubitRef(0, "ancilla")) is PartyId.EVE
    assert Counter(custody.census()) == Counter({PartyId.CHARLIE: 2, PartyId.ALICE: 1, PartyId.EVE: 1})
