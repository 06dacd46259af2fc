"""Named scenarios, seeded trial runner and report emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import Optional

from wuhan_qsdc.attacks import (
    COMBOS,
    OCA_INITIAL_STATE,
    AttackKind,
    EntangleProbe,
    make_hook,
    run_oca_session,
)
from wuhan_qsdc.protocol import Session, SessionConfig, Verdict
from wuhan_qsdc.qsdc import run_qsdc
from wuhan_qsdc.states import InitialStateKind
from wuhan_qsdc.statevec import trial_rng

DEFAULT_MESSAGE = "010110"


class ScenarioError(ValueError):
    """Invalid scenario parameters or combination."""


@dataclass(frozen=True)
class ScenarioTemplate:
    initial_state: InitialStateKind
    attack: Optional[AttackKind]
    description: str


SCENARIOS = {
    "honest-w": ScenarioTemplate(
        InitialStateKind.W, None, "W triples, no adversary; QSDC over distilled psi+ pairs"),
    "honest-xi": ScenarioTemplate(
        InitialStateKind.XI, None, "xi triples, no adversary; QSDC over distilled phi+ pairs"),
    "eve-ir-bz": ScenarioTemplate(
        InitialStateKind.W, AttackKind.INTERCEPT_RESEND_BZ, "Eve measures Alice's travel qubits in B_z"),
    "eve-ir-bx": ScenarioTemplate(
        InitialStateKind.W, AttackKind.INTERCEPT_RESEND_BX, "Eve measures Alice's travel qubits in B_x"),
    "eve-probe": ScenarioTemplate(
        InitialStateKind.W, AttackKind.ENTANGLE_PROBE, "Eve CNOT-copies Alice's travel qubits onto ancillas"),
    "oca-xi": ScenarioTemplate(
        InitialStateKind.XI, AttackKind.OCA_XI, "Alice and Bob decode without Charlie, xi triples"),
    "oca-w": ScenarioTemplate(
        InitialStateKind.W, AttackKind.OCA_W, "Alice and Bob decode without Charlie, W triples"),
}

_YIELD = {InitialStateKind.W: 2 / 3, InitialStateKind.XI: 1 / 2}


@dataclass(frozen=True)
class Scenario:
    name: str
    initial_state: InitialStateKind
    attack: Optional[AttackKind] = None
    message: Optional[str] = None
    msg_len: Optional[int] = None
    trials: int = 1
    master_seed: int = 0
    check_fraction: float = 0.5
    sequence_length: Optional[int] = None
    max_restarts: int = 0

    def validate(self):
        if self.trials < 1:
            raise ScenarioError("trials must be positive")
        if not 0.0 < self.check_fraction < 1.0:
            raise ScenarioError("check fraction must lie in (0, 1)")
        if self.message is not None and self.msg_len is not None:
            raise ScenarioError("give either a message or a message length, not both")
        if self.message is not None and set(self.message) - {"0", "1"}:
            raise ScenarioError(f"message must be a bit string, got {self.message!r}")
        if self.msg_len is not None and self.msg_len < 0:
            raise ScenarioError("message length must be non-negative")
        if self.max_restarts < 0:
            raise ScenarioError("max_restarts must be non-negative")
        if not 0 <= self.master_seed < 2**64:
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        if self.attack is not None and self.attack.is_oca:
            if OCA_INITIAL_STATE[self.attack] is not self.initial_state:
                raise ScenarioError(
                    f"{self.attack.value} needs {OCA_INITIAL_STATE[self.attack].value} initial states")
        if self.sequence_length is not None:
            if self.attack is not None and self.attack.is_oca:
                raise ScenarioError("OCA scenarios size their own triple sequence")
            try:
                SessionConfig(self.sequence_length, self.check_fraction, self.initial_state)
            except ValueError as exc:
                raise ScenarioError(str(exc)) from None
        return self

    def message_length(self) -> int:
        if self.message is not None:
            return len(self.message)
        return self.msg_len if self.msg_len is not None else len(DEFAULT_MESSAGE)

    def triples_per_session(self) -> int:
        if self.sequence_length is not None:
            return self.sequence_length
        need = self.message_length() / (_YIELD[self.initial_state] * (1 - self.check_fraction))
        return max(ceil(1.5 * need) + 40, ceil(1 / self.check_fraction))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "initial_state": self.initial_state.value,
            "attack": self.attack.value if self.attack else None,
            "message": self.message,
            "msg_len": self.message_length(),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "check_fraction": self.check_fraction,
            "sequence_length": None if self.attack and self.attack.is_oca else self.triples_per_session(),
            "max_restarts": self.max_restarts,
        }


def make_scenario(name: str, **overrides) -> Scenario:
    try:
        template = SCENARIOS[name]
    except KeyError:
        raise ScenarioError(f"unknown scenario {name!r}; try one of {sorted(SCENARIOS)}") from None
    fields = {"initial_state": template.initial_state, "attack": template.attack}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario(name=name, **fields).validate()


TRIAL_FIELDS = (
    "trial", "verdict", "sessions", "aborts", "checked", "check_failures", "detection_rate",
    "distill_candidates", "pooled", "yield", "pair_fidelity_min", "bits_sent", "bit_errors",
    "ber", "eve_samples", "eve_matches", "eve_correlation", "transcript_sha256",
)


@dataclass
class TrialResult:
    trial: int
    verdict: str = "completed"
    sessions: int = 0
    aborts: int = 0
    checked: int = 0
    check_failures: int = 0
    distill_candidates: int = 0
    pooled: int = 0
    pair_fidelity_min: Optional[float] = None
    bits_sent: int = 0
    bit_errors: int = 0
    eve_samples: int = 0
    eve_matches: int = 0
    transcript_sha256: str = ""
    oca_counts: Optional[dict] = None
    _digest: object = field(default_factory=hashlib.sha256, repr=False)

    @staticmethod
    def _ratio(num, den):
        return num / den if den else None

    def to_dict(self) -> dict:
        row = {
            "trial": self.trial, "verdict": self.verdict, "sessions": self.sessions,
            "aborts": self.aborts, "checked": self.checked, "check_failures": self.check_failures,
            "detection_rate": self._ratio(self.check_failures, self.checked),
            "distill_candidates": self.distill_candidates, "pooled": self.pooled,
            "yield": self._ratio(self.pooled, self.distill_candidates),
            "pair_fidelity_min": self.pair_fidelity_min, "bits_sent": self.bits_sent,
            "bit_errors": self.bit_errors, "ber": self._ratio(self.bit_errors, self.bits_sent),
            "eve_samples": self.eve_samples, "eve_matches": self.eve_matches,
            "eve_correlation": self._ratio(self.eve_matches, self.eve_samples),
            "transcript_sha256": self.transcript_sha256,
        }
        if self.oca_counts is not None:
            row["oca_counts"] = self.oca_counts
        return row


def _message_bits(scenario: Scenario, rng) -> list[int]:
    if scenario.message is not None:
        return [int(c) for c in scenario.message]
    if scenario.msg_len is not None:
        return [int(b) for b in rng.integers(0, 2, scenario.msg_len)]
    return [int(c) for c in DEFAULT_MESSAGE]


def _absorb(result: TrialResult, session: Session):
    result.sessions += 1
    result.checked += len(session.checks.passed)
    result.check_failures += session.checks.failures
    result._digest.update(session.bus.to_json().encode())


def _run_oca_trial(scenario, result, bits, rng):
    run, sessions = run_oca_session(scenario.attack, bits, rng, check_fraction=scenario.check_fraction)
    for session in sessions:
        _absorb(result, session)
        result.aborts += session.verdict is Verdict.ABORTED
    counts = {f"{b.value},{s.value}": {"0": 0, "1": 0} for b, s in COMBOS}
    for bit, bell, sign in zip(run.sent, run.outcomes, run.signs):
        counts[f"{bell.value},{sign.value}"][str(bit)] += 1
    result.oca_counts = counts
    result.bits_sent = len(run.sent)
    result.bit_errors = run.errors


def _run_protocol_trial(scenario, result, bits, rng):
    config = SessionConfig(scenario.triples_per_session(), scenario.check_fraction, scenario.initial_state)
    for _ in range(scenario.max_restarts + 1):
        hook = make_hook(scenario.attack)
        session = Session(config, rng=rng, hook=hook).run()
        if session.verdict is Verdict.COMPLETED:
            break
        _absorb(result, session)
        result.aborts += 1
    if session.verdict is Verdict.ABORTED:
        result.verdict = "aborted"
        return

    result.distill_candidates = session.distill_candidates
    result.pooled = len(session.pool)
    fidelities = session.pair_fidelities()
    result.pair_fidelity_min = min(fidelities) if fidelities else None
    if len(session.pool) >= len(bits):
        run = run_qsdc(session, bits, rng)
        result.bits_sent = len(run.sent)
        result.bit_errors = run.errors
    else:
        result.verdict = "pool-exhausted"

    if isinstance(hook, EntangleProbe):
        # Eve reads her ancillas once the public transcript is complete
        eve_bits = hook.read_out(session, rng)
        for t, (a, _b, _c) in zip(session.checks.locations, session.checks.outcomes):
            probed = session.registers[t].ref("a")
            result.eve_samples += 1
            result.eve_matches += eve_bits[probed] == a
    _absorb(result, session)


def run_trial(scenario: Scenario, index: int) -> dict:
    """One independently seeded trial; returns its report row."""
    rng = trial_rng(scenario.master_seed, index)
    bits = _message_bits(scenario, rng)
    result = TrialResult(index)
    if scenario.attack is not None and scenario.attack.is_oca:
        _run_oca_trial(scenario, result, bits, rng)
    else:
        _run_protocol_trial(scenario, result, bits, rng)
    result.transcript_sha256 = result._digest.hexdigest()
    return result.to_dict()


def _run_indexed(args):
    return run_trial(*args)


def _pooled(num, den):
    if not den:
        return None, None
    p = num / den
    return p, 3 * sqrt(p * (1 - p) / den)


def _mean(rows, key):
    vals = [r[key] for r in rows if r[key] is not None]
    return sum(vals) / len(vals) if vals else None


def aggregate(rows: list[dict]) -> dict:
    totals = {k: sum(r[k] for r in rows) for k in (
        "checked", "check_failures", "distill_candidates", "pooled", "bits_sent", "bit_errors",
        "eve_samples", "eve_matches", "aborts", "sessions")}
    verdicts = [r["verdict"] for r in rows]
    agg = {
        "trials": len(rows),
        "completed": verdicts.count("completed"),
        "aborted": verdicts.count("aborted"),
        "pool_exhausted": verdicts.count("pool-exhausted"),
        "sessions": totals["sessions"],
        "session_aborts": totals["aborts"],
    }
    for name, num, den in (
        ("detection_rate", "check_failures", "checked"),
        ("yield", "pooled", "distill_candidates"),
        ("ber", "bit_errors", "bits_sent"),
        ("eve_correlation", "eve_matches", "eve_samples"),
    ):
        p, hw = _pooled(totals[num], totals[den])
        agg[f"{name}_mean"] = _mean(rows, name)
        agg[f"{name}_pooled"] = p
        agg[f"{name}_halfwidth_3sigma"] = hw
        agg[f"{den}_total"] = totals[den]
    fids = [r["pair_fidelity_min"] for r in rows if r["pair_fidelity_min"] is not None]
    agg["pair_fidelity_min"] = min(fids) if fids else None
    if rows and "oca_counts" in rows[0]:
        counts = {k: {"0": 0, "1": 0} for k in rows[0]["oca_counts"]}
        for r in rows:
            for k, by_bit in r["oca_counts"].items():
                for bit, n in by_bit.items():
                    counts[k][bit] += n
        agg["oca_counts"] = counts
    return agg


@dataclass
class TrialReport:
    scenario: dict
    trials: list[dict]
    aggregates: dict


def run_scenario(scenario: Scenario, jobs: int = 1) -> TrialReport:
    scenario.validate()
    work = [(scenario, i) for i in range(scenario.trials)]
    if jobs > 1 and scenario.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_indexed, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        rows = [run_trial(s, i) for s, i in work]
    rows.sort(key=lambda r: r["trial"])
    return TrialReport(scenario.to_dict(), rows, aggregate(rows))


def _num(x):
    if isinstance(x, float):
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_num(v) for v in x]
    return x


def emit_report(report: TrialReport, fmt: str = "json") -> bytes:
    """Serialize a report; floats carry 6 significant digits.

    CSV has one row per trial with the columns of ``TRIAL_FIELDS``.
    """
    if fmt == "json":
        doc = {
            "scenario": _num(report.scenario),
            "trials": _num(report.trials),
            "aggregates": _num(report.aggregates),
        }
        return (json.dumps(doc, indent=2) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("scenario",) + TRIAL_FIELDS)
        for row in report.trials:
            cells = [_num(row[k]) for k in TRIAL_FIELDS]
            writer.writerow([report.scenario["name"]] + ["" if c is None else c for c in cells])
        return buf.getvalue().encode()
    raise ValueError(f"unknown report format {fmt!r}")

