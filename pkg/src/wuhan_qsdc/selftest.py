"""Engine invariant suite behind ``wuhan-qsdc self-test``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wuhan_qsdc import _kernels_py
from wuhan_qsdc import statevec as sv
from wuhan_qsdc._backend import kernels
from wuhan_qsdc.protocol import Session, SessionConfig
from wuhan_qsdc.states import bell_state, w_state, xi_state
from wuhan_qsdc.statevec import BellOutcome, Gate, StateVector

TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_state(rng, n) -> StateVector:
    z = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(z, normalize=True)


def _random_gate(rng, n) -> Gate:
    kind = rng.choice(["X", "Z", "H", "CNOT"]) if n > 1 else rng.choice(["X", "Z", "H"])
    if kind == "CNOT":
        c, t = rng.choice(n, size=2, replace=False)
        return Gate("CNOT", (int(c), int(t)))
    return Gate(str(kind), (int(rng.integers(n)),))


def check_normalization(rng) -> CheckResult:
    worst = 0.0
    states = [sv.new_register(k) for k in range(1, 9)] + [w_state(), xi_state()]
    states += [bell_state(b) for b in BellOutcome]
    for s in states:
        worst = max(worst, abs(s.norm() ** 2 - 1))
    for _ in range(200):
        n = int(rng.integers(2, 7))
        s = _random_state(rng, n)
        for _ in range(10):
            s = sv.apply_gate(s, _random_gate(rng, n))
            worst = max(worst, abs(s.norm() ** 2 - 1))
        _, s = sv.measure_bz(s, int(rng.integers(n)), rng)
        worst = max(worst, abs(s.norm() ** 2 - 1))
        _, s = sv.measure_bx(s, int(rng.integers(n)), rng)
        worst = max(worst, abs(s.norm() ** 2 - 1))
        q1, q2 = rng.choice(n, size=2, replace=False)
        _, s = sv.measure_bell(s, (int(q1), int(q2)), rng)
        worst = max(worst, abs(s.norm() ** 2 - 1))
    return CheckResult("normalization", worst <= TOL, f"max |norm^2 - 1| = {worst:.3e}")


def check_born_sums(rng) -> CheckResult:
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        s = _random_state(rng, n)
        q = int(rng.integers(n))
        worst = max(worst, abs(sum(sv.bz_probabilities(s, q)) - 1))
        worst = max(worst, abs(sum(sv.bx_probabilities(s, q).values()) - 1))
        q1, q2 = rng.choice(n, size=2, replace=False)
        worst = max(worst, abs(sum(sv.bell_probabilities(s, (int(q1), int(q2))).values()) - 1))
    return CheckResult("born-rule sums", worst <= TOL, f"max |sum p - 1| = {worst:.3e}")


def check_idempotence(rng) -> CheckResult:
    bad = 0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        s = _random_state(rng, n)
        q = int(rng.integers(n))
        pair = tuple(int(x) for x in rng.choice(n, size=2, replace=False))
        for measure, target in ((sv.measure_bz, q), (sv.measure_bx, q), (sv.measure_bell, pair)):
            first, s1 = measure(s, target, rng)
            second, s2 = measure(s1, target, rng)
            if first != second or np.max(np.abs(s1.amplitudes - s2.amplitudes)) > TOL:
                bad += 1
    return CheckResult("projection idempotence", bad == 0, f"{bad} mismatches in 300 repeats")


def check_bell_completeness(_rng) -> CheckResult:
    kets = [bell_state(b).amplitudes for b in BellOutcome]
    total = sum(np.outer(k, k.conj()) for k in kets)
    gram = np.array([[np.vdot(x, y) for y in kets] for x in kets])
    err = max(np.max(np.abs(total - np.eye(4))), np.max(np.abs(gram - np.eye(4))))
    return CheckResult("bell completeness", err <= TOL, f"max deviation {err:.3e}")


def check_seed_determinism(_rng) -> CheckResult:
    config = SessionConfig(200, 0.5, seed=12345)
    first = Session(config).run().bus.to_json()
    second = Session(config).run().bus.to_json()
    return CheckResult("seed determinism", first == second, f"transcript of {len(first)} bytes")


def check_backend_parity(rng) -> CheckResult:
    """Compiled and fallback kernels agree on random inputs."""
    if kernels is _kernels_py:
        return CheckResult("backend parity", True, "fallback backend in use, nothing to compare")
    worst = 0.0
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        psi = _random_state(rng, n).amplitudes
        q1, q2 = (int(x) for x in rng.choice(n, size=2, replace=False))
        a, b = psi.copy(), psi.copy()
        kernels.apply_1q(a, n, q1, h)
        _kernels_py.apply_1q(b, n, q1, h)
        kernels.apply_cnot(a, n, q1, q2)
        _kernels_py.apply_cnot(b, n, q1, q2)
        worst = max(worst, np.max(np.abs(a - b)))
        pa, pb = kernels.pair_probs(a, n, q1, q2), _kernels_py.pair_probs(b, n, q1, q2)
        worst = max(worst, max(abs(x - y) for x, y in zip(pa, pb)))
        worst = max(worst, abs(kernels.prob_one(a, n, q2) - _kernels_py.prob_one(b, n, q2)))
        bit = int(pa[2] + pa[3] > 0.5)
        kernels.project(a, n, q1, bit)
        _kernels_py.project(b, n, q1, bit)
        worst = max(worst, np.max(np.abs(a - b)))
    return CheckResult("backend parity", worst <= TOL, f"max kernel difference {worst:.3e}")


CHECKS = (
    check_normalization,
    check_born_sums,
    check_idempotence,
    check_bell_completeness,
    check_seed_determinism,
    check_backend_parity,
)


def run_self_test(seed: int = 2007) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
