"""The data-locking protocol: keys, codebooks, encryption, decryption.

A codebook is the public list of K Clifford circuits derived from a
128-bit master seed.  Encryption maps an n-bit plaintext x to the
stabilizer tableau of circuit k applied to |x>; decryption applies the
inverse circuit and reads the computational basis.  The serialized
codebook and cipher files are the normative interop artifacts; both are
ASCII with LF line endings.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .sampling import (Mode, SamplerConfig, SeedContext, circuit_from_text,
                       circuit_to_text, derive_circuit)
from .stabilizer import (CliffordCircuit, CliffordMap, Tableau,
                         invert_circuit, tableau_from_text)


@dataclass(frozen=True)
class SecretKey:
    """Index k into the codebook; the secret is ceil(log2 K) bits long."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("key index must be nonnegative")


def key_bits(K: int) -> int:
    """Length in bits of the shared secret for a K-circuit codebook."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return math.ceil(math.log2(K)) if K > 1 else 0


def keygen(K: int, rng) -> SecretKey:
    """Uniform secret key in [0, K)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return SecretKey(rng.randrange(K))


@dataclass
class Codebook:
    """Public circuit set {C_k}: n qubits, K circuits, design accuracy delta."""

    n: int
    K: int
    delta: float
    master_seed: int
    circuits: list[CliffordCircuit]
    _maps: dict = field(default_factory=dict, repr=False, compare=False)
    _inv_maps: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.circuits) != self.K:
            raise ValueError("circuit count does not match K")
        for c in self.circuits:
            if c.n != self.n:
                raise ValueError("circuit qubit count mismatch")

    def circuit(self, k: int) -> CliffordCircuit:
        return self.circuits[k]

    def map(self, k: int) -> CliffordMap:
        if k not in self._maps:
            self._maps[k] = CliffordMap(self.circuits[k])
        return self._maps[k]

    def inverse_map(self, k: int) -> CliffordMap:
        if k not in self._inv_maps:
            self._inv_maps[k] = CliffordMap(invert_circuit(self.circuits[k]))
        return self._inv_maps[k]


def build_codebook(n: int, K: int, delta: float, master_seed: int,
                   depth_factor: float = 1.0,
                   mode: Mode = Mode.APPROX_DESIGN) -> Codebook:
    """Derive the K codebook circuits deterministically from the seed."""
    if K < 1:
        raise ValueError("K must be >= 1")
    cfg = SamplerConfig(n=n, delta=delta, depth_factor=depth_factor, mode=mode)
    circuits = [derive_circuit(SeedContext(master_seed, k), cfg)
                for k in range(K)]
    return Codebook(n=n, K=K, delta=delta, master_seed=master_seed,
                    circuits=circuits)


@dataclass
class CipherState:
    """Encrypted code word C_k|x> as a stabilizer tableau."""

    n: int
    tableau: Tableau

    def __post_init__(self):
        if self.tableau.n != self.n:
            raise ValueError("tableau size mismatch")


def encrypt(cb: Codebook, key: SecretKey, x: str) -> CipherState:
    """Cipher state C_k|x>: the basis-state tableau pushed through circuit k."""
    if len(x) != cb.n or any(c not in "01" for c in x):
        raise ValueError(f"plaintext must be a {cb.n}-bit string")
    if not 0 <= key.k < cb.K:
        raise ValueError("key index out of range for this codebook")
    return CipherState(cb.n, cb.map(key.k).basis_state_image(x))


def decrypt(cb: Codebook, key: SecretKey, cipher: CipherState,
            rng=None) -> tuple[str, bool]:
    """Apply the inverse circuit and measure every qubit.

    Returns (bits, deterministic).  With the correct key every measurement
    is deterministic and bits is the plaintext.  Otherwise random outcomes
    are sampled from rng (a fresh seeded generator when omitted) and the
    deterministic flag is False.
    """
    if not 0 <= key.k < cb.K:
        raise ValueError("key index out of range for this codebook")
    if cipher.n != cb.n:
        raise ValueError("cipher size mismatch")
    state = cipher.tableau.copy()
    cb.inverse_map(key.k).apply_to(state)
    bits = state.z_readout()
    if bits is not None:
        return bits, True
    if rng is None:
        rng = random.Random(0)
    out = []
    for q in range(cb.n):
        out.append(str(state.measure_sample(q, rng)))
    return "".join(out), False


# -- file formats ------------------------------------------------------------


def codebook_to_text(cb: Codebook) -> str:
    lines = [f"QDLCB v1 n={cb.n} K={cb.K} delta={cb.delta!r} "
             f"seed={cb.master_seed:032x}"]
    for k, circuit in enumerate(cb.circuits):
        body = circuit_to_text(circuit)
        lines.append(f"{k}: {body}" if body else f"{k}:")
    return "\n".join(lines) + "\n"


def codebook_from_text(text: str) -> Codebook:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty codebook file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "QDLCB" or head[1] != "v1":
        raise ValueError("bad codebook header")
    fields = dict(part.split("=", 1) for part in head[2:])
    n = int(fields["n"])
    K = int(fields["K"])
    delta = float(fields["delta"])
    seed = int(fields["seed"], 16)
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != K:
        raise ValueError(f"expected {K} circuit lines, got {len(body)}")
    circuits = []
    for k, ln in enumerate(body):
        idx, _, rest = ln.partition(":")
        if int(idx) != k:
            raise ValueError("circuit indices out of order")
        circuits.append(circuit_from_text(rest.strip(), n))
    return Codebook(n=n, K=K, delta=delta, master_seed=seed, circuits=circuits)


def cipher_to_text(cipher: CipherState) -> str:
    return f"QDLCT v1 n={cipher.n}\n" + cipher.tableau.to_text()


def cipher_from_text(text: str) -> CipherState:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty cipher file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "QDLCT" or head[1] != "v1":
        raise ValueError("bad cipher header")
    n = int(head[2].split("=", 1)[1])
    tableau = tableau_from_text("\n".join(lines[1:]))
    if tableau.n != n:
        raise ValueError("cipher header size disagrees with tableau")
    return CipherState(n, tableau)
