"""Bit-packed stabilizer tableau simulator for Clifford circuits.

The tableau tracks 2n Pauli generators (n destabilizers followed by n
stabilizers) of an n-qubit stabilizer state.  Bits are packed column-wise:
for each qubit q there is one Python integer whose bit r is the X (or Z)
exponent of generator row r.  A single-qubit gate therefore updates all 2n
rows with a constant number of big-integer operations, independent of n at
the word level.

Phase convention: row r represents the operator

    i^(delta_r) * X^{x_r} Z^{z_r}

with delta in {0,1,2,3} stored in two bit planes (d0 = low bit, d1 = high
bit).  A row is Hermitian iff delta == popcount(x & z) mod 2, and its +/-
sign is i^(delta - popcount(x & z)).  With this convention Pauli
multiplication is

    (i^a X^u Z^v)(i^b X^s Z^t) = i^(a + b + 2*(v.s)) X^(u^s) Z^(v^t)

where v.s is the GF(2) inner product, so phase bookkeeping reduces to
parities of column masks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

GATE_ARITY = {
    "H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1,
    "CZ": 2, "SWAP": 2, "CNOT": 2,
}

_GATE_INVERSE = {"S": "SDG", "SDG": "S"}


@dataclass(frozen=True)
class CliffordGate:
    """A named Clifford gate on one or two qubit indices."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        arity = GATE_ARITY.get(self.kind)
        if arity is None:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} requires distinct qubits")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")

    def inverse(self) -> "CliffordGate":
        return CliffordGate(_GATE_INVERSE.get(self.kind, self.kind), self.qubits)


def gate(kind: str, *qubits: int) -> CliffordGate:
    return CliffordGate(kind, tuple(qubits))


@dataclass
class CliffordCircuit:
    """Ordered list of Clifford gates on n qubits."""

    n: int
    gates: list[CliffordGate]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise ValueError(f"gate {g} out of range for n={self.n}")

    def __len__(self):
        return len(self.gates)


def invert_circuit(circuit: CliffordCircuit) -> CliffordCircuit:
    """Inverse circuit: gates reversed, each replaced by its inverse."""
    return CliffordCircuit(circuit.n, [g.inverse() for g in reversed(circuit.gates)])


@dataclass(frozen=True)
class PauliRow:
    """One tableau generator: packed x/z bit vectors plus a +/-1 sign."""

    n: int
    x_bits: int
    z_bits: int
    sign: int

    def x_string(self) -> str:
        return "".join("1" if (self.x_bits >> q) & 1 else "0" for q in range(self.n))

    def z_string(self) -> str:
        return "".join("1" if (self.z_bits >> q) & 1 else "0" for q in range(self.n))


class Tableau:
    """Stabilizer state of n qubits as a destabilizer/stabilizer tableau.

    Rows 0..n-1 are destabilizers, rows n..2n-1 stabilizers.  All mutation
    happens through gate application and measurement; instances are plain
    values otherwise and safe to copy between workers.
    """

    __slots__ = ("n", "xs", "zs", "d0", "d1")

    def __init__(self, n: int, xs=None, zs=None, d0=0, d1=0):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        if xs is None:
            # identity tableau: destabilizer q is X_q, stabilizer q is Z_q
            self.xs = [1 << q for q in range(n)]
            self.zs = [1 << (n + q) for q in range(n)]
            self.d0 = 0
            self.d1 = 0
        else:
            self.xs = list(xs)
            self.zs = list(zs)
            self.d0 = d0
            self.d1 = d1

    def copy(self) -> "Tableau":
        return Tableau(self.n, self.xs, self.zs, self.d0, self.d1)

    def __eq__(self, other):
        return (isinstance(other, Tableau) and self.n == other.n
                and self.xs == other.xs and self.zs == other.zs
                and self.d0 == other.d0 and self.d1 == other.d1)

    def __hash__(self):
        return hash((self.n, tuple(self.xs), tuple(self.zs), self.d0, self.d1))

    # -- row access ------------------------------------------------------

    def row_bits(self, r: int) -> tuple[int, int, int]:
        """Row r as (x_bits, z_bits, delta), bits indexed by qubit."""
        x = 0
        z = 0
        for q in range(self.n):
            x |= ((self.xs[q] >> r) & 1) << q
            z |= ((self.zs[q] >> r) & 1) << q
        delta = ((self.d0 >> r) & 1) | (((self.d1 >> r) & 1) << 1)
        return x, z, delta

    def row(self, r: int) -> PauliRow:
        x, z, delta = self.row_bits(r)
        herm = (delta - (x & z).bit_count()) % 4
        if herm not in (0, 2):
            raise ValueError(f"row {r} is not Hermitian (delta={delta})")
        return PauliRow(self.n, x, z, 1 if herm == 0 else -1)

    def set_row(self, r: int, x: int, z: int, delta: int) -> None:
        bit = 1 << r
        for q in range(self.n):
            self.xs[q] = (self.xs[q] & ~bit) | (((x >> q) & 1) << r)
            self.zs[q] = (self.zs[q] & ~bit) | (((z >> q) & 1) << r)
        self.d0 = (self.d0 & ~bit) | ((delta & 1) << r)
        self.d1 = (self.d1 & ~bit) | (((delta >> 1) & 1) << r)

    # -- gates -----------------------------------------------------------

    def apply(self, kind: str, qubits: tuple[int, ...]) -> None:
        """Conjugate every row by the named gate."""
        n = self.n
        for q in qubits:
            if q >= n:
                raise ValueError(f"qubit {q} out of range for n={n}")
        xs = self.xs
        zs = self.zs
        if kind == "H":
            q = qubits[0]
            self.d1 ^= xs[q] & zs[q]
            xs[q], zs[q] = zs[q], xs[q]
        elif kind == "S":
            q = qubits[0]
            x = xs[q]
            carry = self.d0 & x
            self.d0 ^= x
            self.d1 ^= carry
            zs[q] ^= x
        elif kind == "SDG":
            q = qubits[0]
            x = xs[q]
            borrow = x & ~self.d0
            self.d0 ^= x
            self.d1 ^= borrow
            zs[q] ^= x
        elif kind == "CNOT":
            c, t = qubits
            xs[t] ^= xs[c]
            zs[c] ^= zs[t]
        elif kind == "CZ":
            a, b = qubits
            self.d1 ^= xs[a] & xs[b]
            zs[a] ^= xs[b]
            zs[b] ^= xs[a]
        elif kind == "SWAP":
            a, b = qubits
            xs[a], xs[b] = xs[b], xs[a]
            zs[a], zs[b] = zs[b], zs[a]
        elif kind == "X":
            self.d1 ^= zs[qubits[0]]
        elif kind == "Y":
            q = qubits[0]
            self.d1 ^= xs[q] ^ zs[q]
        elif kind == "Z":
            self.d1 ^= xs[qubits[0]]
        else:
            raise ValueError(f"unknown gate kind {kind!r}")

    def apply_circuit(self, circuit: CliffordCircuit) -> None:
        if circuit.n != self.n:
            raise ValueError("circuit/tableau size mismatch")
        for g in circuit.gates:
            self.apply(g.kind, g.qubits)

    # -- measurement -----------------------------------------------------

    def _row_mult_masked(self, p: int, mask: int) -> None:
        """Multiply every row selected by mask (row p excluded) by row p."""
        xs = self.xs
        zs = self.zs
        # i-phase of (row_r * row_p) gains 2 * parity(z_r & x_p): XOR the
        # z columns where row p has an X, then add row p's own delta.
        par = 0
        xcols = []
        zcols = []
        for q in range(self.n):
            if (xs[q] >> p) & 1:
                par ^= zs[q]
                xcols.append(q)
            if (zs[q] >> p) & 1:
                zcols.append(q)
        self.d1 ^= par & mask
        dp = ((self.d0 >> p) & 1) | (((self.d1 >> p) & 1) << 1)
        if dp & 1:
            carry = self.d0 & mask
            self.d0 ^= mask
            self.d1 ^= carry
        if dp & 2:
            self.d1 ^= mask
        for q in xcols:
            xs[q] ^= mask
        for q in zcols:
            zs[q] ^= mask

    def measure_postselect(self, qubit: int, bit: int) -> float:
        """Project qubit onto outcome bit, returning the branch probability.

        Deterministic outcomes leave the state unchanged and return 1.0
        (match) or 0.0 (mismatch).  A random outcome returns 0.5 and the
        state is projected onto the requested branch.  No randomness is
        ever consumed.
        """
        n = self.n
        if not 0 <= qubit < n:
            raise ValueError(f"qubit {qubit} out of range")
        if bit not in (0, 1):
            raise ValueError("outcome bit must be 0 or 1")
        stab_mask = ((1 << n) - 1) << n
        xq = self.xs[qubit]
        anticommuting = xq & stab_mask
        if anticommuting:
            p = (anticommuting & -anticommuting).bit_length() - 1
            others = xq & ~(1 << p)
            if others:
                self._row_mult_masked(p, others)
            # old stabilizer row p becomes the destabilizer partner
            x, z, delta = self.row_bits(p)
            self.set_row(p - n, x, z, delta)
            self.set_row(p, 0, 1 << qubit, 2 * bit)
            return 0.5
        # deterministic: Z_qubit is (up to sign) a product of stabilizers,
        # selected by the destabilizer rows that anticommute with it
        sel = xq & ((1 << n) - 1)
        acc_z = 0
        acc_delta = 0
        s = sel
        while s:
            lsb = s & -s
            i = lsb.bit_length() - 1
            s ^= lsb
            x, z, delta = self.row_bits(n + i)
            acc_delta = (acc_delta + delta + 2 * ((acc_z & x).bit_count() & 1)) % 4
            acc_z ^= z
        if acc_z != 1 << qubit:
            raise AssertionError("stabilizer product is not Z on the measured qubit")
        outcome = 0 if acc_delta == 0 else 1
        return 1.0 if outcome == bit else 0.0

    def measure_sample(self, qubit: int, rng) -> int:
        """Measure qubit, drawing the outcome from rng when it is random."""
        probe = self.measure_postselect_probe(qubit)
        if probe is not None:
            return probe
        bit = 1 if rng.random() < 0.5 else 0
        self.measure_postselect(qubit, bit)
        return bit

    def measure_postselect_probe(self, qubit: int) -> Optional[int]:
        """Deterministic outcome of measuring qubit, or None if random."""
        n = self.n
        if self.xs[qubit] >> n:
            return None
        p = self.measure_postselect(qubit, 0)
        return 0 if p == 1.0 else 1

    # -- invariants and readout -------------------------------------------

    def rows_commute(self, r: int, s: int) -> bool:
        xr, zr, _ = self.row_bits(r)
        xs_, zs_, _ = self.row_bits(s)
        return (((xr & zs_).bit_count() + (zr & xs_).bit_count()) & 1) == 0

    def symplectic_ok(self) -> bool:
        """Check the full destabilizer/stabilizer pairing structure."""
        n = self.n
        for i in range(n):
            for j in range(n):
                if not self.rows_commute(n + i, n + j):
                    return False
                want_anti = i == j
                if self.rows_commute(i, n + j) == want_anti:
                    return False
        # pairing implies rank 2n over GF(2); also require Hermitian rows
        try:
            for r in range(2 * n):
                self.row(r)
        except ValueError:
            return False
        return True

    def z_readout(self) -> Optional[str]:
        """If the state is a computational basis state, return its bits.

        Returns None when any stabilizer row carries an X component.  The
        bit for qubit q solves Z_q = +/- (product of stabilizer rows) by
        Gaussian elimination over the packed Z columns.
        """
        n = self.n
        acc = 0
        for q in range(n):
            acc |= self.xs[q] >> n
        if acc & ((1 << n) - 1):
            return None
        rows = []
        for i in range(n):
            x, z, delta = self.row_bits(n + i)
            rows.append([z, (delta >> 1) & 1])
        # reduce [Z | sign] to [I | bits]
        for col in range(n):
            pivot = None
            for r in range(col, n):
                if (rows[r][0] >> col) & 1:
                    pivot = r
                    break
            if pivot is None:
                raise AssertionError("stabilizer Z block is singular")
            rows[col], rows[pivot] = rows[pivot], rows[col]
            for r in range(n):
                if r != col and (rows[r][0] >> col) & 1:
                    rows[r][0] ^= rows[col][0]
                    rows[r][1] ^= rows[col][1]
        return "".join(str(rows[q][1]) for q in range(n))

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        lines = [f"n={self.n}"]
        for r in range(2 * self.n):
            row = self.row(r)
            tag = "D" if r < self.n else "S"
            sign = "+" if row.sign == 1 else "-"
            lines.append(f"{tag} {row.x_string()} {row.z_string()} {sign}")
        return "\n".join(lines) + "\n"


def tableau_from_text(text: str) -> Tableau:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("missing tableau header")
    n = int(lines[0][2:])
    if len(lines) != 2 * n + 1:
        raise ValueError(f"expected {2 * n} rows, got {len(lines) - 1}")
    t = Tableau(n)
    for r, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != 4 or parts[0] not in ("D", "S"):
            raise ValueError(f"bad tableau row: {ln!r}")
        tag, xstr, zstr, sign = parts
        if tag != ("D" if r < n else "S"):
            raise ValueError("destabilizer/stabilizer rows out of order")
        if len(xstr) != n or len(zstr) != n:
            raise ValueError("row length mismatch")
        x = sum((int(xstr[q]) << q) for q in range(n))
        z = sum((int(zstr[q]) << q) for q in range(n))
        delta = ((x & z).bit_count() + (0 if sign == "+" else 2)) % 4
        t.set_row(r, x, z, delta)
    if not t.symplectic_ok():
        raise ValueError("rows do not form a valid tableau")
    return t


# -- module-level operation surface ---------------------------------------


def new_basis_state(n: int, x: str) -> Tableau:
    """Tableau of the computational basis state |x>, leftmost bit = qubit 0."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if len(x) != n or any(c not in "01" for c in x):
        raise ValueError(f"x must be an n-bit string, got {x!r}")
    t = Tableau(n)
    for q, c in enumerate(x):
        if c == "1":
            t.d1 |= 1 << (n + q)
    return t


def apply_gate(state: Tableau, g: CliffordGate) -> Tableau:
    """Conjugate the tableau rows by g, in place.  Returns the same object."""
    state.apply(g.kind, g.qubits)
    return state


def apply_circuit(state: Tableau, circuit: CliffordCircuit) -> Tableau:
    state.apply_circuit(circuit)
    return state


def measure_postselect(state: Tableau, qubit: int, bit: int) -> tuple[float, Tableau]:
    prob = state.measure_postselect(qubit, bit)
    return prob, state


def basis_overlap_halvings(circuit: CliffordCircuit, x: str, y: str) -> Optional[int]:
    """Number s with |<y|C|x>|^2 = 2^-s, or None when the overlap is zero."""
    n = circuit.n
    if len(x) != n or len(y) != n:
        raise ValueError("bit string length mismatch")
    t = new_basis_state(n, x)
    t.apply_circuit(circuit)
    s = 0
    for q in range(n):
        p = t.measure_postselect(q, int(y[q]))
        if p == 0.0:
            return None
        if p == 0.5:
            s += 1
    return s


def basis_overlap_prob(circuit: CliffordCircuit, x: str, y: str) -> float:
    """|<y|C|x>|^2 via qubit-by-qubit postselection; exactly 0 or 2^-s."""
    s = basis_overlap_halvings(circuit, x, y)
    return 0.0 if s is None else 0.5 ** s


def basis_overlap_prob_exact(circuit: CliffordCircuit, x: str, y: str) -> Fraction:
    s = basis_overlap_halvings(circuit, x, y)
    return Fraction(0) if s is None else Fraction(1, 1 << s)


# -- compiled circuit actions ----------------------------------------------


class CliffordMap:
    """Compiled conjugation action of a circuit, for repeated application.

    The action is the tableau the circuit produces from the identity
    tableau: row q is the image of X_q, row n+q the image of Z_q.  Rows
    are additionally cached in row-major form so composition onto a state
    tableau costs O(n^2) big-integer operations instead of replaying the
    gate list.
    """

    def __init__(self, circuit: CliffordCircuit):
        self.n = circuit.n
        t = Tableau(circuit.n)
        t.apply_circuit(circuit)
        self.tableau = t
        self.rows = [t.row_bits(r) for r in range(2 * circuit.n)]

    def apply_to(self, state: Tableau) -> Tableau:
        """Replace state's rows by their images under this map, in place."""
        n = self.n
        if state.n != n:
            raise ValueError("map/state size mismatch")
        new_xs = [0] * n
        new_zs = [0] * n
        d0 = state.d0
        d1 = state.d1
        rows = self.rows
        for q in range(n):
            for sel, mr in ((state.xs[q], q), (state.zs[q], n + q)):
                if sel == 0:
                    continue
                gx, gz, gd = rows[mr]
                par = 0
                g = gx
                while g:
                    lsb = g & -g
                    j = lsb.bit_length() - 1
                    g ^= lsb
                    par ^= new_zs[j]
                    new_xs[j] ^= sel
                d1 ^= par & sel
                if gd & 1:
                    carry = d0 & sel
                    d0 ^= sel
                    d1 ^= carry
                if gd & 2:
                    d1 ^= sel
                g = gz
                while g:
                    lsb = g & -g
                    j = lsb.bit_length() - 1
                    g ^= lsb
                    new_zs[j] ^= sel
        state.xs = new_xs
        state.zs = new_zs
        state.d0 = d0
        state.d1 = d1
        return state

    def basis_state_image(self, x: str) -> Tableau:
        """Tableau of C|x>, equal to applying the map to new_basis_state."""
        n = self.n
        if len(x) != n:
            raise ValueError("bit string length mismatch")
        t = self.tableau.copy()
        flips = 0
        for q, c in enumerate(x):
            if c == "1":
                flips |= 1 << (n + q)
        t.d1 ^= flips
        return t
