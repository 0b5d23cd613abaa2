import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlock import dense, sampling
from qlock.stabilizer import (CliffordCircuit, CliffordMap,
                              PauliRow, Tableau, apply_circuit, apply_gate,
                              basis_overlap_prob, basis_overlap_prob_exact,
                              gate, invert_circuit, measure_postselect,
                              new_basis_state, tableau_from_text)

GATE_POOL = [("H", 1), ("S", 1), ("SDG", 1), ("X", 1), ("Y", 1), ("Z", 1),
             ("CZ", 2), ("SWAP", 2), ("CNOT", 2)]


def random_circuit(n, length, rng):
    gates = []
    for _ in range(length):
        kind, arity = rng.choice(GATE_POOL)
        if arity == 1 or n == 1:
            if arity == 2:
                continue
            gates.append(gate(kind, rng.randrange(n)))
        else:
            a, b = rng.sample(range(n), 2)
            gates.append(gate(kind, a, b))
    return CliffordCircuit(n, gates)


def random_state(n, rng, depth=30):
    t = new_basis_state(n, "".join(rng.choice("01") for _ in range(n)))
    t.apply_circuit(random_circuit(n, depth, rng))
    return t


class TestBasisState:
    def test_single_zero(self):
        t = new_basis_state(1, "0")
        assert t.row(1) == PauliRow(1, 0, 1, 1)   # stabilizer +Z
        assert t.row(0) == PauliRow(1, 1, 0, 1)   # destabilizer +X

    def test_ten_signs(self):
        t = new_basis_state(2, "10")
        assert t.row(2).sign == -1                 # -Z on qubit 0
        assert t.row(3).sign == 1                  # +Z on qubit 1

    def test_three_zeros(self):
        t = new_basis_state(3, "000")
        for i in range(3):
            row = t.row(3 + i)
            assert (row.x_bits, row.z_bits, row.sign) == (0, 1 << i, 1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            new_basis_state(2, "0")
        with pytest.raises(ValueError):
            new_basis_state(1, "2")


class TestGates:
    def test_h_on_z(self):
        t = new_basis_state(1, "0")
        apply_gate(t, gate("H", 0))
        assert t.row(1) == PauliRow(1, 1, 0, 1)    # +X

    def test_s_on_x(self):
        t = new_basis_state(1, "0")
        apply_gate(t, gate("H", 0))
        apply_gate(t, gate("S", 0))
        assert t.row(1) == PauliRow(1, 1, 1, 1)    # +Y

    def test_cnot_propagates_x(self):
        t = Tableau(2)
        apply_gate(t, gate("CNOT", 0, 1))
        assert t.row(0) == PauliRow(2, 0b11, 0, 1)  # X0 -> X0 X1

    def test_out_of_range(self):
        t = Tableau(2)
        with pytest.raises(ValueError):
            apply_gate(t, gate("H", 5))

    @pytest.mark.parametrize("seed", range(8))
    def test_gate_algebra(self, seed):
        rng = random.Random(seed)
        n = rng.randrange(2, 6)
        t = random_state(n, rng)
        q = rng.randrange(n)
        for word, expect_same in ((["H", "H"], True), (["S"] * 4, True),
                                  (["CNOT", "CNOT"], True)):
            ref = t.copy()
            for kind in word:
                if kind == "CNOT":
                    ref.apply(kind, (q, (q + 1) % n))
                else:
                    ref.apply(kind, (q,))
            assert (ref == t) is expect_same
        # S.S = Z
        a = t.copy()
        a.apply("S", (q,))
        a.apply("S", (q,))
        b = t.copy()
        b.apply("Z", (q,))
        assert a == b

    @pytest.mark.parametrize("seed", range(6))
    def test_symplectic_preserved(self, seed):
        rng = random.Random(100 + seed)
        n = rng.randrange(1, 7)
        t = random_state(n, rng, depth=60)
        assert t.symplectic_ok()


class TestMeasurement:
    def test_deterministic_match(self):
        t = new_basis_state(1, "0")
        prob, out = measure_postselect(t, 0, 0)
        assert prob == 1.0 and out.row(1) == PauliRow(1, 0, 1, 1)

    def test_deterministic_mismatch(self):
        t = new_basis_state(1, "0")
        before = t.copy()
        prob, out = measure_postselect(t, 0, 1)
        assert prob == 0.0 and out == before

    def test_random_projects(self):
        t = new_basis_state(1, "0")
        t.apply("H", (0,))
        prob, out = measure_postselect(t, 0, 0)
        assert prob == 0.5
        assert out == new_basis_state(1, "0")

    @pytest.mark.parametrize("seed", range(5))
    def test_projection_is_idempotent(self, seed):
        rng = random.Random(200 + seed)
        n = rng.randrange(2, 6)
        t = random_state(n, rng)
        q = rng.randrange(n)
        p1 = t.measure_postselect(q, 0)
        if p1 == 0.0:
            return
        p2 = t.measure_postselect(q, 0)
        assert p2 == 1.0
        assert t.symplectic_ok()


class TestOverlap:
    def test_identity(self):
        c = CliffordCircuit(3, [])
        assert basis_overlap_prob(c, "101", "101") == 1.0
        assert basis_overlap_prob(c, "101", "100") == 0.0

    def test_hadamard(self):
        c = CliffordCircuit(1, [gate("H", 0)])
        assert basis_overlap_prob(c, "0", "1") == 0.5

    def test_single_qubit_fourth_moment(self):
        # independent oracle: dense enumeration of the 24 unitaries
        circs = sampling.all_single_qubit_circuits()
        dense_m4 = sum(abs(dense.circuit_unitary(c)[0, 0]) ** 4
                       for c in circs) / 24
        assert abs(dense_m4 - 1 / 3) < 1e-12
        tab_m4 = sum(basis_overlap_prob_exact(c, "0", "0") ** 2
                     for c in circs) / 24
        assert tab_m4 == Fraction(1, 3)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_overlaps_sum_to_one(self, n):
        rng = random.Random(300 + n)
        for _ in range(5):
            c = random_circuit(n, 25, rng)
            x = "".join(rng.choice("01") for _ in range(n))
            total = sum(basis_overlap_prob_exact(c, x, format(i, f"0{n}b"))
                        for i in range(1 << n))
            assert total == 1

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_matches_dense_backend(self, n):
        rng = random.Random(400 + n)
        for _ in range(25):
            c = random_circuit(n, 40, rng)
            x = "".join(rng.choice("01") for _ in range(n))
            y = "".join(rng.choice("01") for _ in range(n))
            u = dense.circuit_unitary(c)
            p_dense = abs(u[dense.basis_index(y), dense.basis_index(x)]) ** 2
            assert abs(basis_overlap_prob(c, x, y) - p_dense) < 1e-10


class TestInvert:
    def test_examples(self):
        assert invert_circuit(CliffordCircuit(1, [gate("H", 0)])).gates == [gate("H", 0)]
        assert invert_circuit(CliffordCircuit(1, [gate("S", 0)])).gates == [gate("SDG", 0)]
        c = CliffordCircuit(2, [gate("H", 0), gate("S", 1), gate("CNOT", 0, 1)])
        assert invert_circuit(c).gates == [gate("CNOT", 0, 1), gate("SDG", 1),
                                           gate("H", 0)]

    @given(st.integers(0, 2 ** 32))
    @settings(max_examples=30, deadline=None)
    def test_involution_and_identity_action(self, seed):
        rng = random.Random(seed)
        n = rng.randrange(1, 6)
        c = random_circuit(n, 20, rng)
        assert invert_circuit(invert_circuit(c)).gates == c.gates
        t = random_state(n, rng)
        ref = t.copy()
        t.apply_circuit(c)
        t.apply_circuit(invert_circuit(c))
        assert t == ref


class TestSerialization:
    @pytest.mark.parametrize("seed", range(6))
    def test_round_trip(self, seed):
        rng = random.Random(500 + seed)
        n = rng.randrange(1, 8)
        t = random_state(n, rng)
        text = t.to_text()
        back = tableau_from_text(text)
        assert back == t
        assert back.to_text() == text

    def test_header_required(self):
        with pytest.raises(ValueError):
            tableau_from_text("junk")

    def test_basis_state_text(self):
        text = new_basis_state(2, "10").to_text()
        assert text.splitlines()[0] == "n=2"
        assert text.splitlines()[3] == "S 00 10 -"


class TestCliffordMap:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_gate_application(self, seed):
        rng = random.Random(600 + seed)
        n = rng.randrange(1, 9)
        c = random_circuit(n, 30, rng)
        m = CliffordMap(c)
        x = "".join(rng.choice("01") for _ in range(n))
        direct = new_basis_state(n, x)
        direct.apply_circuit(c)
        assert m.basis_state_image(x) == direct
        state = random_state(n, rng)
        expected = state.copy()
        expected.apply_circuit(c)
        m.apply_to(state)
        assert state == expected

    def test_z_readout(self):
        rng = random.Random(777)
        for _ in range(10):
            n = rng.randrange(1, 30)
            x = "".join(rng.choice("01") for _ in range(n))
            c = random_circuit(n, 50, rng)
            t = new_basis_state(n, x)
            t.apply_circuit(c)
            t.apply_circuit(invert_circuit(c))
            assert t.z_readout() == x

    def test_z_readout_none_when_superposed(self):
        t = new_basis_state(2, "00")
        t.apply("H", (0,))
        assert t.z_readout() is None
