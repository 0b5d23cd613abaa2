"""Pseudo-random Clifford circuit generation.

Three ensembles are provided:

* APPROX_DESIGN: L = ceil(c * n * (n + log2(1/delta))) uniformly random
  two-qubit Clifford fragments on uniformly random qubit pairs.
* UNIFORM_CLIFFORD: exactly uniform elements of the n-qubit Clifford
  group (table lookup for n <= 2, symplectic Gram-Schmidt plus gate
  synthesis above that).
* SINGLE_QUBIT_EXHAUSTIVE: the 24 single-qubit Cliffords by index, for
  exact enumeration checks.

The two-qubit group is enumerated once by closing the generator set
{H0, H1, S0, S1, CNOT01, CNOT10} over conjugation-action tableaus and is
indexed as 720 symplectic classes x 16 sign classes, sorted by canonical
tableau key, so an index pair maps deterministically to a gate word.
"""

from __future__ import annotations

import enum
import hashlib
import math
import random
from dataclasses import dataclass
from functools import lru_cache

from .stabilizer import CliffordCircuit, CliffordGate, Tableau, invert_circuit


class Mode(enum.Enum):
    APPROX_DESIGN = "APPROX_DESIGN"
    UNIFORM_CLIFFORD = "UNIFORM_CLIFFORD"
    SINGLE_QUBIT_EXHAUSTIVE = "SINGLE_QUBIT_EXHAUSTIVE"


@dataclass
class SamplerConfig:
    """Parameters of the circuit ensemble."""

    n: int
    delta: float
    depth_factor: float = 1.0
    mode: Mode = Mode.APPROX_DESIGN

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.depth_factor <= 0:
            raise ValueError("depth_factor must be positive")


@dataclass(frozen=True)
class SeedContext:
    """(master_seed, stream_index) pair identifying one derived circuit."""

    master_seed: int
    stream_index: int

    def __post_init__(self):
        if not 0 <= self.master_seed < 1 << 128:
            raise ValueError("master_seed must be a 128-bit value")
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")


def design_circuit_length(n: int, delta: float, depth_factor: float = 1.0) -> int:
    """L = ceil(c * n * (n + log2(1/delta))), the normative fragment count."""
    return math.ceil(depth_factor * n * (n + math.log2(1.0 / delta)))


def stream_rng(master_seed: int, stream_index: int) -> random.Random:
    """Deterministic per-stream generator; streams split by SHA-256."""
    payload = (b"QLOCKv1" + master_seed.to_bytes(16, "big")
               + stream_index.to_bytes(8, "big"))
    return random.Random(int.from_bytes(hashlib.sha256(payload).digest(), "big"))


@lru_cache(maxsize=None)
def _cached_gate(kind: str, qubits: tuple[int, ...]) -> CliffordGate:
    return CliffordGate(kind, qubits)


# -- group tables ------------------------------------------------------------


def _action_key(t: Tableau):
    return tuple(t.row_bits(r) for r in range(2 * t.n))


def _sym_key(t: Tableau):
    return tuple(t.row_bits(r)[:2] for r in range(2 * t.n))


def _close_group(n: int, generators: list[CliffordGate]):
    """BFS closure over action tableaus; returns {key: shortest word}."""
    start = Tableau(n)
    words = {_action_key(start): ()}
    frontier = [(start, ())]
    while frontier:
        nxt = []
        for tab, word in frontier:
            for g in generators:
                t2 = tab.copy()
                t2.apply(g.kind, g.qubits)
                key = _action_key(t2)
                if key not in words:
                    words[key] = word + (g,)
                    nxt.append((t2, word + (g,)))
        frontier = nxt
    return words


class _TwoQubitTable:
    """Canonical index (symplectic class, sign class) -> gate word."""

    def __init__(self):
        gens = [_cached_gate("H", (0,)), _cached_gate("H", (1,)),
                _cached_gate("S", (0,)), _cached_gate("S", (1,)),
                _cached_gate("CNOT", (0, 1)), _cached_gate("CNOT", (1, 0))]
        words = _close_group(2, gens)
        if len(words) != 11520:
            raise AssertionError(f"two-qubit closure has {len(words)} elements")
        by_sym: dict = {}
        for key, word in words.items():
            sym = tuple(row[:2] for row in key)
            by_sym.setdefault(sym, []).append((key, word))
        if len(by_sym) != 720:
            raise AssertionError(f"{len(by_sym)} symplectic classes")
        self.words: list[list[tuple]] = []
        for sym in sorted(by_sym):
            variants = sorted(by_sym[sym])
            if len(variants) != 16:
                raise AssertionError("sign classes are not 16 per symplectic class")
            self.words.append([word for _, word in variants])


class _SingleQubitTable:
    def __init__(self):
        gens = [_cached_gate("H", (0,)), _cached_gate("S", (0,))]
        words = _close_group(1, gens)
        if len(words) != 24:
            raise AssertionError(f"single-qubit closure has {len(words)} elements")
        self.words = [word for _, word in sorted(words.items())]


_TWO_QUBIT: _TwoQubitTable | None = None
_SINGLE_QUBIT: _SingleQubitTable | None = None


def two_qubit_table() -> _TwoQubitTable:
    global _TWO_QUBIT
    if _TWO_QUBIT is None:
        _TWO_QUBIT = _TwoQubitTable()
    return _TWO_QUBIT


def single_qubit_table() -> _SingleQubitTable:
    global _SINGLE_QUBIT
    if _SINGLE_QUBIT is None:
        _SINGLE_QUBIT = _SingleQubitTable()
    return _SINGLE_QUBIT


def single_qubit_circuit(index: int) -> CliffordCircuit:
    """The index-th of the 24 single-qubit Cliffords, canonical order."""
    words = single_qubit_table().words
    return CliffordCircuit(1, list(words[index % 24]))


def all_single_qubit_circuits() -> list[CliffordCircuit]:
    return [single_qubit_circuit(i) for i in range(24)]


# -- samplers ----------------------------------------------------------------


def sample_two_qubit_clifford(rng) -> CliffordCircuit:
    """Uniform draw from the 11,520-element two-qubit Clifford group."""
    table = two_qubit_table()
    i = rng.randrange(720)
    j = rng.randrange(16)
    return CliffordCircuit(2, list(table.words[i][j]))


def _fragment_gates(word, a: int, b: int) -> list[CliffordGate]:
    out = []
    pair = (a, b)
    for g in word:
        out.append(_cached_gate(g.kind, tuple(pair[q] for q in g.qubits)))
    return out


def sample_design_fragments(cfg: SamplerConfig, rng) -> list[list[CliffordGate]]:
    """The fragment-structured form of a design circuit: L gate groups,
    each one uniformly random two-qubit Clifford on a random qubit pair."""
    n = cfg.n
    if n == 1:
        return [list(single_qubit_circuit(rng.randrange(24)).gates)]
    table = two_qubit_table()
    length = design_circuit_length(n, cfg.delta, cfg.depth_factor)
    fragments = []
    for _ in range(length):
        a, b = rng.sample(range(n), 2)
        word = table.words[rng.randrange(720)][rng.randrange(16)]
        fragments.append(_fragment_gates(word, a, b))
    return fragments


def sample_design_circuit(cfg: SamplerConfig, rng) -> CliffordCircuit:
    """Approximate-2-design circuit of L two-qubit fragments.

    At n = 1 there are no qubit pairs; the draw falls back to a uniform
    single-qubit Clifford.
    """
    gates: list[CliffordGate] = []
    for fragment in sample_design_fragments(cfg, rng):
        gates.extend(fragment)
    return CliffordCircuit(cfg.n, gates)


def sample_uniform_clifford(n: int, rng) -> CliffordCircuit:
    """Exactly uniform element of the n-qubit Clifford group.

    For n <= 2 this is a table lookup.  Above that a uniformly random
    conjugation action is built one hyperbolic pair at a time (symplectic
    Gram-Schmidt with rejection), signs are drawn uniformly, and the
    action is synthesized back into gates.
    """
    if n == 1:
        return single_qubit_circuit(rng.randrange(24))
    if n == 2:
        return sample_two_qubit_clifford(rng)
    nbits = 2 * n
    nmask = (1 << n) - 1

    def sp(u, v):
        return (((u & nmask) & (v >> n)).bit_count()
                + ((u >> n) & (v & nmask)).bit_count()) & 1

    pairs: list[tuple[int, int]] = []

    def project(c):
        for a, b in pairs:
            ca = sp(c, a)
            cb = sp(c, b)
            if cb:
                c ^= a
            if ca:
                c ^= b
        return c

    for _ in range(n):
        while True:
            a = project(rng.getrandbits(nbits))
            if a:
                break
        while True:
            b = project(rng.getrandbits(nbits))
            if sp(a, b) == 1:
                break
        pairs.append((a, b))

    action = Tableau(n)
    for j, (a, b) in enumerate(pairs):
        for r, v in ((j, a), (n + j, b)):
            x = v & nmask
            z = v >> n
            delta = (((x & z).bit_count() & 1) + 2 * rng.getrandbits(1)) % 4
            action.set_row(r, x, z, delta)
    return action_to_circuit(action)


def _first_bit_at_least(v: int, lo: int) -> int:
    w = v >> lo
    if w == 0:
        raise AssertionError("no set bit at or above the cursor")
    return lo + (w & -w).bit_length() - 1


def action_to_circuit(action: Tableau) -> CliffordCircuit:
    """Synthesize a gate list whose conjugation action equals `action`.

    Works by reducing a copy of the action tableau to the identity with a
    column sweep (the emitted gate list, inverted, is the circuit).  For
    qubit j the stabilizer image is first brought to X_j and flipped to
    Z_j by a Hadamard; the destabilizer image then necessarily has an X_j
    component and is cleaned with CNOT/S/CZ, none of which disturb Z_j.
    """
    t = action.copy()
    n = t.n
    emitted: list[CliffordGate] = []

    def do(kind, *qubits):
        t.apply(kind, qubits)
        emitted.append(_cached_gate(kind, qubits))

    for j in range(n):
        # stabilizer image -> X_j
        x, z, _ = t.row_bits(n + j)
        if x >> j == 0:
            do("H", _first_bit_at_least(z, j))
            x, z, _ = t.row_bits(n + j)
        if not (x >> j) & 1:
            do("SWAP", j, _first_bit_at_least(x, j))
            x, z, _ = t.row_bits(n + j)
        rest = x & ~((1 << (j + 1)) - 1)
        while rest:
            q = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            do("CNOT", j, q)
        x, z, _ = t.row_bits(n + j)
        if (z >> j) & 1:
            do("S", j)
            x, z, _ = t.row_bits(n + j)
        rest = z & ~((1 << (j + 1)) - 1)
        while rest:
            q = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            do("CZ", j, q)
        do("H", j)  # X_j -> Z_j
        # destabilizer image -> X_j; it anticommutes with Z_j so x_j is set
        x, z, _ = t.row_bits(j)
        if not (x >> j) & 1:
            raise AssertionError("lost the X component during reduction")
        rest = x & ~((1 << (j + 1)) - 1)
        while rest:
            q = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            do("CNOT", j, q)
        x, z, _ = t.row_bits(j)
        if (z >> j) & 1:
            do("S", j)
            x, z, _ = t.row_bits(j)
        rest = z & ~((1 << (j + 1)) - 1)
        while rest:
            q = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            do("CZ", j, q)
    # symplectic part is now the identity; clear the signs
    for j in range(n):
        if t.row(j).sign == -1:
            do("Z", j)
        if t.row(n + j).sign == -1:
            do("X", j)
    if t != Tableau(n):
        raise AssertionError("reduction did not reach the identity tableau")
    return invert_circuit(CliffordCircuit(n, emitted))


def derive_circuit(ctx: SeedContext, cfg: SamplerConfig) -> CliffordCircuit:
    """Deterministic circuit for (master_seed, stream_index) under cfg."""
    rng = stream_rng(ctx.master_seed, ctx.stream_index)
    if cfg.mode is Mode.APPROX_DESIGN:
        return sample_design_circuit(cfg, rng)
    if cfg.mode is Mode.UNIFORM_CLIFFORD:
        return sample_uniform_clifford(cfg.n, rng)
    if cfg.mode is Mode.SINGLE_QUBIT_EXHAUSTIVE:
        if cfg.n != 1:
            raise ValueError("exhaustive mode is single-qubit only")
        return single_qubit_circuit(ctx.stream_index)
    raise ValueError(f"unknown mode {cfg.mode}")


# -- circuit text form -------------------------------------------------------


def circuit_to_text(circuit: CliffordCircuit) -> str:
    """Semicolon-separated gate list, e.g. 'H 0; SDG 2; CNOT 0 3'."""
    return "; ".join(f"{g.kind} {' '.join(str(q) for q in g.qubits)}"
                     for g in circuit.gates)


def circuit_from_text(text: str, n: int) -> CliffordCircuit:
    gates = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        gates.append(CliffordGate(parts[0], tuple(int(q) for q in parts[1:])))
    return CliffordCircuit(n, gates)
