"""Exact small-n linear algebra: circuit unitaries, overlaps, spectra.

This is the verification oracle for the tableau simulator and the engine
for the density-matrix security analysis.  Everything here is dense and
limited to n <= dense_cutoff() qubits (default 12, override with the
QLOCK_DENSE_CUTOFF environment variable).
"""

from __future__ import annotations

import math
import os

import numpy as np

from .stabilizer import CliffordCircuit

DEFAULT_DENSE_CUTOFF = 12

_SQ2 = 1.0 / math.sqrt(2.0)

GATE_MATRICES = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "SDG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                     dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                     dtype=complex),
}


class NumericalError(RuntimeError):
    """Raised when an iterative numerical routine fails to converge."""


def dense_cutoff() -> int:
    value = os.environ.get("QLOCK_DENSE_CUTOFF")
    return int(value) if value else DEFAULT_DENSE_CUTOFF


def _check_cutoff(n: int) -> None:
    cutoff = dense_cutoff()
    if n > cutoff:
        raise ValueError(f"n={n} exceeds dense cutoff {cutoff}")


def basis_index(bits: str) -> int:
    """Index of |bits> with the leftmost character as qubit 0 (MSB)."""
    return int(bits, 2)


def basis_vector(bits: str) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[basis_index(bits)] = 1.0
    return v


def _apply_gate_tensor(arr: np.ndarray, kind: str, qubits: tuple[int, ...],
                       n: int) -> np.ndarray:
    """Apply a gate matrix along the row axes of arr (shape (2,)*n + rest)."""
    m = GATE_MATRICES[kind]
    k = len(qubits)
    if k == 1:
        m_t = m
    else:
        m_t = m.reshape(2, 2, 2, 2)
    out = np.tensordot(m_t, arr, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))


def apply_circuit_to_vector(circuit: CliffordCircuit, vec: np.ndarray) -> np.ndarray:
    """Return U_C |vec> for a dense state vector."""
    n = circuit.n
    _check_cutoff(n)
    if vec.shape != (1 << n,):
        raise ValueError("state vector dimension mismatch")
    arr = vec.reshape((2,) * n).astype(complex)
    for g in circuit.gates:
        arr = _apply_gate_tensor(arr, g.kind, g.qubits, n)
    return arr.reshape(1 << n)


def circuit_unitary(circuit: CliffordCircuit) -> np.ndarray:
    """Dense unitary of the circuit, gates multiplied in circuit order."""
    n = circuit.n
    _check_cutoff(n)
    d = 1 << n
    arr = np.eye(d, dtype=complex).reshape((2,) * n + (d,))
    for g in circuit.gates:
        arr = _apply_gate_tensor(arr, g.kind, g.qubits, n)
    return arr.reshape(d, d)


def random_state_vector(n: int, rng) -> np.ndarray:
    """Haar-random unit vector: normalized complex standard normals."""
    d = 1 << n
    re = np.array([rng.gauss(0.0, 1.0) for _ in range(d)])
    im = np.array([rng.gauss(0.0, 1.0) for _ in range(d)])
    v = re + 1j * im
    return v / np.linalg.norm(v)


def overlap_prob(alpha: np.ndarray, circuit: CliffordCircuit,
                 beta: np.ndarray) -> float:
    """|<alpha| U_C |beta>|^2 for dense unit vectors."""
    if alpha.shape != beta.shape or alpha.shape != (1 << circuit.n,):
        raise ValueError("state vector dimension mismatch")
    return float(abs(np.vdot(alpha, apply_circuit_to_vector(circuit, beta))) ** 2)


# -- Hermitian spectra -------------------------------------------------------


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9,
                         check_psd: bool = False) -> None:
    d = rho.shape[0]
    if rho.shape != (d, d):
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise ValueError("density matrix trace is not 1 within tolerance")
    if check_psd and eigvalsh(rho)[-1] < -tol:
        raise ValueError("density matrix has a negative eigenvalue")


def eigvalsh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100,
             hermiticity_tol: float = 1e-9) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Returns real eigenvalues in descending order.  Each rotation zeroes one
    off-diagonal entry with a phased Givens rotation; sweeps repeat until
    the off-diagonal Frobenius norm drops below tol relative to the matrix
    scale.

    Raises:
        ValueError: input not Hermitian within hermiticity_tol.
        NumericalError: no convergence within max_sweeps sweeps.
    """
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    if a.shape != (d, d):
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.conj().T)) > hermiticity_tol:
        raise ValueError("matrix is not Hermitian within tolerance")
    a = (a + a.conj().T) / 2.0
    if d == 1:
        return np.array([a[0, 0].real])
    scale = max(1.0, float(np.linalg.norm(a)))

    def _off_norm():
        # summed directly over off-diagonal entries; a subtraction-based
        # norm has a cancellation floor far above the target tolerance
        mags = np.abs(a) ** 2
        np.fill_diagonal(mags, 0.0)
        return math.sqrt(float(np.sum(mags)))

    for _ in range(max_sweeps):
        off = _off_norm()
        if off <= tol * scale:
            break
        thresh = off / (d * d)
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= thresh * 0.01 or mag == 0.0:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if abs(tau) < 1e150:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau)
                                                       + math.sqrt(1.0 + tau * tau))
                else:
                    t = 0.5 / tau
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # plane rotation [[c, s*phase], [-s*conj(phase), c]]; the
                # phase twist makes the pivot real before the real rotation
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    else:
        if _off_norm() > tol * scale:
            raise NumericalError("Jacobi eigensolver did not converge")
    vals = np.sort(np.diag(a).real)[::-1]
    return vals


def von_neumann_entropy(rho: np.ndarray, tol: float = 1e-9) -> float:
    """Entropy -sum(lam * log2 lam) in bits; eigenvalues below 1e-12 count as 0."""
    check_density_matrix(rho, tol=tol)
    vals = eigvalsh(rho)
    if vals[-1] < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    ent = 0.0
    for lam in vals:
        if lam >= 1e-12:
            ent -= lam * math.log2(lam)
    return ent
