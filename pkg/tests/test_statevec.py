import itertools
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wuhan_qsdc import statevec as sv
from wuhan_qsdc.states import encode_message_qubit, message_qubit, w_state
from wuhan_qsdc.statevec import BellOutcome, Gate, Sign, StateVector

TOL = 1e-12


def amps_close(state, expected, tol=TOL):
    return np.max(np.abs(state.amplitudes - np.asarray(expected))) <= tol


def random_state(rng, n):
    z = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(z, normalize=True)


class TestRegister:
    def test_one_qubit(self):
        assert amps_close(sv.new_register(1), [1, 0])

    def test_two_qubits(self):
        assert amps_close(sv.new_register(2), [1, 0, 0, 0])

    @pytest.mark.parametrize("n", [0, 9])
    def test_size_bound(self, n):
        with pytest.raises(ValueError):
            sv.new_register(n)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="not normalized"):
            StateVector([1, 1])

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            StateVector([1, 0, 0])

    def test_duplicate_roles(self):
        with pytest.raises(ValueError, match="duplicate"):
            StateVector([1, 0, 0, 0], ("a", "a"))

    def test_json_round_trip(self):
        s = w_state()
        back = StateVector.from_json(s.to_json(), s.roles)
        assert amps_close(back, s.amplitudes, 0)


class TestTensor:
    def test_basis(self):
        s = sv.tensor(sv.new_register(1), sv.apply_gate(sv.new_register(1), Gate("X", (0,))))
        assert amps_close(s, oracles.ket("01"))

    def test_plus_w(self):
        s = sv.tensor(encode_message_qubit(1), w_state())
        assert s.roles == ("m", "a", "b", "c")
        assert s.amplitudes.shape == (16,)
        assert abs(s.amplitude("0100") - 1 / sqrt(6)) < TOL
        assert amps_close(s, oracles.kron(oracles.PLUS, oracles.W))

    def test_overflow(self):
        with pytest.raises(ValueError):
            sv.tensor(sv.new_register(5), sv.new_register(4))

    def test_norm(self, rng):
        s = sv.tensor(random_state(rng, 3), random_state(rng, 4))
        assert abs(s.norm() - 1) < TOL


class TestGates:
    def test_x(self, backend):
        assert amps_close(sv.apply_gate(sv.new_register(1), Gate("X", (0,))), [0, 1])

    def test_h(self, backend):
        assert amps_close(sv.apply_gate(sv.new_register(1), Gate("H", (0,))), oracles.PLUS)

    def test_cnot(self, backend):
        s = StateVector(oracles.ket("10"))
        assert amps_close(sv.apply_gate(s, Gate("CNOT", (0, 1))), oracles.ket("11"))

    def test_cnot_reversed_operands(self, backend):
        s = StateVector(oracles.ket("01"))
        assert amps_close(sv.apply_gate(s, Gate("CNOT", (1, 0))), oracles.ket("11"))

    def test_by_role(self, backend):
        s = sv.apply_gate(w_state(), Gate("X", ("c",)))
        assert abs(s.amplitude("000") - 1 / sqrt(3)) < TOL

    @pytest.mark.parametrize("kind", ["X", "Z", "H"])
    def test_matches_kronecker_operator(self, backend, rng, kind):
        mats = {"X": oracles.X, "Z": oracles.Z, "H": (oracles.X + oracles.Z) * oracles.S2}
        for n in (1, 3, 5):
            s = random_state(rng, n)
            for q in range(n):
                out = sv.apply_gate(s, Gate(kind, (q,)))
                assert amps_close(out, oracles.op_on(n, q, mats[kind]) @ s.amplitudes)

    def test_invalid_operands(self):
        with pytest.raises(ValueError):
            Gate("CNOT", (1, 1))
        with pytest.raises(ValueError):
            Gate("H", (0, 1))
        with pytest.raises(ValueError):
            Gate("Y", (0,))
        with pytest.raises(IndexError):
            sv.apply_gate(sv.new_register(2), Gate("X", (2,)))

    def test_input_not_mutated(self):
        s = sv.new_register(2)
        sv.apply_gate(s, Gate("X", (0,)))
        assert amps_close(s, [1, 0, 0, 0], 0)


class TestMeasureBz:
    def test_deterministic(self, backend, rng):
        one = StateVector([0, 1])
        for _ in range(20):
            bit, post = sv.measure_bz(one, 0, rng)
            assert bit == 1 and amps_close(post, [0, 1])

    def test_w_home_qubit(self, backend):
        p0, p1 = sv.bz_probabilities(w_state(), "c")
        oracle_p0 = oracles.prob(oracles.W, oracles.proj_on(3, 2, oracles.KET0))
        assert abs(p0 - oracle_p0) < TOL and abs(p0 - 2 / 3) < TOL
        bit, post = sv.measure_bz(w_state(), "c", force=0)
        assert bit == 0
        assert sv.equal_up_to_global_phase(
            post, StateVector(oracles.kron(oracles.BELL["psi+"], oracles.KET0)), TOL)

    def test_idempotent(self, backend, rng):
        for _ in range(20):
            s = random_state(rng, 4)
            b1, s1 = sv.measure_bz(s, 2, rng)
            b2, s2 = sv.measure_bz(s1, 2, rng)
            assert b1 == b2 and amps_close(s1, s2.amplitudes)

    def test_frequency(self, backend):
        r = np.random.default_rng(3)
        n = 20000
        zeros = sum(sv.measure_bz(w_state(), "c", r)[0] == 0 for _ in range(n))
        assert abs(zeros / n - 2 / 3) < 4 * sqrt(2 / 9 / n)

    def test_forced_impossible(self):
        with pytest.raises(ValueError):
            sv.measure_bz(sv.new_register(1), 0, force=1)


class TestMeasureBx:
    def test_plus(self, backend, rng):
        plus = encode_message_qubit(1)
        for _ in range(20):
            sign, post = sv.measure_bx(plus, 0, rng)
            assert sign is Sign.PLUS and sv.equal_up_to_global_phase(post, plus, TOL)

    def test_zero_is_even(self, backend):
        probs = sv.bx_probabilities(sv.new_register(1), 0)
        assert abs(probs[Sign.PLUS] - 0.5) < TOL and abs(probs[Sign.MINUS] - 0.5) < TOL

    def test_minus_branch(self, backend, rng):
        # (|1> - |0>)/sqrt(2) is -|->: always reads minus
        s = message_qubit(-1, 1, None)
        assert abs(oracles.prob(s.amplitudes, oracles.proj_on(1, 0, oracles.MINUS)) - 1) < TOL
        assert sv.bx_probabilities(s, 0)[Sign.MINUS] > 1 - TOL
        assert sv.measure_bx(s, 0, rng)[0] is Sign.MINUS

    def test_matches_projector(self, backend, rng):
        for _ in range(10):
            s = random_state(rng, 3)
            for q in range(3):
                probs = sv.bx_probabilities(s, q)
                expect = oracles.prob(s.amplitudes, oracles.proj_on(3, q, oracles.PLUS))
                assert abs(probs[Sign.PLUS] - expect) < TOL
                _, post = sv.measure_bx(s, q, force=Sign.MINUS)
                ref = oracles.collapse(s.amplitudes, oracles.proj_on(3, q, oracles.MINUS))
                assert sv.equal_up_to_global_phase(post, StateVector(ref), 1e-10)


class TestMeasureBell:
    @pytest.mark.parametrize("kind", list(BellOutcome))
    def test_definite(self, backend, rng, kind):
        s = StateVector(oracles.BELL[kind.value])
        out, post = sv.measure_bell(s, (0, 1), rng)
        assert out is kind and amps_close(post, s.amplitudes)

    def test_00(self, backend):
        probs = sv.bell_probabilities(StateVector(oracles.ket("00")), (0, 1))
        assert abs(probs[BellOutcome.PHI_PLUS] - 0.5) < TOL
        assert abs(probs[BellOutcome.PHI_MINUS] - 0.5) < TOL
        assert probs[BellOutcome.PSI_PLUS] < TOL and probs[BellOutcome.PSI_MINUS] < TOL

    def test_message_on_channel_uniform(self, backend):
        for a, b in [(1, 1), (1, -1), (0.6, 0.8), (1, 0)]:
            s = sv.tensor(message_qubit(a, b, None), StateVector(oracles.BELL["psi+"]))
            probs = sv.bell_probabilities(s, (0, 1))
            for kind in BellOutcome:
                brute = oracles.prob(s.amplitudes, oracles.pair_proj(3, 0, 1, oracles.BELL[kind.value]))
                assert abs(probs[kind] - brute) < TOL
                assert abs(probs[kind] - 0.25) < TOL

    def test_projection_matches_projectors(self, backend, rng):
        """CNOT+H route and explicit projectors give the same law and collapse."""
        for _ in range(10):
            s = random_state(rng, 4)
            for q1, q2 in [(0, 1), (2, 0), (1, 3)]:
                probs = sv.bell_probabilities(s, (q1, q2))
                for kind in BellOutcome:
                    proj = oracles.pair_proj(4, q1, q2, oracles.BELL[kind.value])
                    assert abs(probs[kind] - oracles.prob(s.amplitudes, proj)) < TOL
                    _, post = sv.measure_bell(s, (q1, q2), force=kind)
                    ref = oracles.collapse(s.amplitudes, proj)
                    assert sv.equal_up_to_global_phase(post, StateVector(ref), 1e-10)

    def test_idempotent(self, backend, rng):
        s = random_state(rng, 4)
        k1, s1 = sv.measure_bell(s, (0, 2), rng)
        k2, s2 = sv.measure_bell(s1, (0, 2), rng)
        assert k1 is k2 and amps_close(s1, s2.amplitudes)

    def test_same_qubit(self):
        with pytest.raises(ValueError):
            sv.measure_bell(sv.new_register(2), (1, 1))


class TestGlobalPhase:
    def test_sign(self):
        minus = encode_message_qubit(0)
        neg = StateVector(-minus.amplitudes)
        assert sv.equal_up_to_global_phase(minus, neg, 1e-9)

    def test_orthogonal(self):
        one = StateVector([0, 1])
        assert not sv.equal_up_to_global_phase(sv.new_register(1), one, 1e-9)

    def test_complex_phase(self, rng):
        s = random_state(rng, 3)
        assert sv.equal_up_to_global_phase(s, StateVector(np.exp(0.7j) * s.amplitudes), 1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            sv.equal_up_to_global_phase(sv.new_register(1), sv.new_register(2))


class TestReduced:
    def test_qubit_state_of_product(self, rng):
        s = sv.tensor(message_qubit(0.6, 0.8, None), StateVector(oracles.BELL["phi+"]))
        assert sv.equal_up_to_global_phase(sv.qubit_state(s, 0), message_qubit(0.6, 0.8, None), 1e-10)

    def test_entangled_qubit_rejected(self):
        with pytest.raises(ValueError):
            sv.qubit_state(StateVector(oracles.BELL["psi+"]), 0)


def test_trial_rng_is_index_based():
    a = [sv.trial_rng(5, i).random() for i in range(4)]
    b = [sv.trial_rng(5, i).random() for i in reversed(range(4))][::-1]
    assert a == b
    assert len(set(a)) == 4
    assert sv.trial_rng(5, 0).random() != sv.trial_rng(6, 0).random()


def test_seed_determinism(backend):
    def outcomes(seed):
        r = np.random.default_rng(seed)
        return [sv.measure_bell(sv.tensor(encode_message_qubit(1), w_state()), ("m", "a"), r)[0]
                for _ in range(50)]
    assert outcomes(11) == outcomes(11)


def test_bell_completeness():
    kets = [oracles.BELL[k.value] for k in BellOutcome]
    from wuhan_qsdc.states import bell_state
    ours = [bell_state(k).amplitudes for k in BellOutcome]
    assert max(np.max(np.abs(x - y)) for x, y in zip(kets, ours)) == 0
    total = sum(np.outer(k, k.conj()) for k in ours)
    assert np.max(np.abs(total - np.eye(4))) < TOL


# property tests

gate_kinds = st.sampled_from(["X", "Z", "H", "CNOT"])


@st.composite
def circuits(draw):
    n = draw(st.integers(2, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    ops = []
    for _ in range(draw(st.integers(1, 15))):
        kind = draw(gate_kinds)
        if kind == "CNOT":
            c, t = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            ops.append(Gate(kind, (c, t)))
        else:
            ops.append(Gate(kind, (draw(st.integers(0, n - 1)),)))
    return n, seed, ops


@settings(max_examples=60, deadline=None)
@given(circuits())
def test_norm_preserved_by_circuits(circuit):
    n, seed, ops = circuit
    r = np.random.default_rng(seed)
    s = random_state(r, n)
    for g in ops:
        s = sv.apply_gate(s, g)
        assert abs(s.norm() ** 2 - 1) <= TOL
    _, s = sv.measure_bz(s, 0, r)
    assert abs(s.norm() ** 2 - 1) <= TOL
    _, s = sv.measure_bell(s, (0, n - 1), r)
    assert abs(s.norm() ** 2 - 1) <= TOL


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_born_sums(n, seed):
    s = random_state(np.random.default_rng(seed), n)
    for q in range(n):
        assert abs(sum(sv.bz_probabilities(s, q)) - 1) <= TOL
        assert abs(sum(sv.bx_probabilities(s, q).values()) - 1) <= TOL
    for q1, q2 in itertools.combinations(range(n), 2):
        assert abs(sum(sv.bell_probabilities(s, (q1, q2)).values()) - 1) <= TOL


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_backends_agree(n, seed):
    from conftest import _compiled
    from wuhan_qsdc import _kernels_py
    if _compiled is None:
        return
    r = np.random.default_rng(seed)
    psi = random_state(r, n).amplitudes
    h = ((oracles.X + oracles.Z) * oracles.S2).astype(np.complex128)
    q1, q2 = (int(x) for x in r.choice(n, 2, replace=False))
    a, b = psi.copy(), psi.copy()
    for k in (_compiled, _kernels_py):
        x = a if k is _compiled else b
        k.apply_1q(x, n, q1, h)
        k.apply_cnot(x, n, q2, q1)
    assert np.max(np.abs(a - b)) < TOL
    pa, pb = _compiled.pair_probs(a, n, q1, q2), _kernels_py.pair_probs(b, n, q1, q2)
    assert max(abs(x - y) for x, y in zip(pa, pb)) < TOL
