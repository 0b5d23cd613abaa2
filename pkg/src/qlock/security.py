"""Security analysis: adversary states, information measures, tail bounds.

The two concentration bounds and the key threshold are evaluated in exact
rational arithmetic (python fractions over float-valued log constants),
so substituting a threshold K back into its bound gives an exponent of
exactly zero and a probability of exactly one.  Natural logarithms are
used inside the bounds, exactly as the expressions are stated; entropic
quantities are reported in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import dense
from .design import gamma_bound
from .protocol import Codebook
from .sampling import SamplerConfig, sample_design_circuit, sample_uniform_clifford, stream_rng
from .stabilizer import CliffordCircuit

Real = Union[int, float, Fraction]

_LN2 = Fraction(math.log(2.0))


def _ln_net(n: int, epsilon: Real) -> float:
    """ln(20 * 2^n / epsilon), evaluated in a fixed overflow-safe form."""
    return math.log(20.0) + n * math.log(2.0) - math.log(float(epsilon))


def _frac_log2(x: Fraction) -> float:
    if x <= 0:
        raise ValueError("log2 of a nonpositive value")
    return math.log2(x.numerator) - math.log2(x.denominator)


def _clip_float(x: Fraction) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


# -- priors and parameters ----------------------------------------------------


@dataclass
class PriorDistribution:
    """Plaintext prior: either uniform over all 2^n strings or a sparse list.

    entries maps n-bit strings to positive probabilities summing to one;
    None means the uniform prior.
    """

    n: int
    entries: Optional[list[tuple[str, float]]] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.entries is not None:
            if not self.entries:
                raise ValueError("empty prior")
            seen = set()
            total = 0.0
            for x, p in self.entries:
                if len(x) != self.n or any(c not in "01" for c in x):
                    raise ValueError(f"bad code word {x!r}")
                if x in seen:
                    raise ValueError(f"duplicate code word {x!r}")
                seen.add(x)
                if p <= 0:
                    raise ValueError("probabilities must be positive")
                total += p
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"prior sums to {total}, not 1")

    @property
    def uniform(self) -> bool:
        return self.entries is None

    @property
    def p_max(self) -> Fraction:
        if self.uniform:
            return Fraction(1, 1 << self.n)
        return Fraction(max(p for _, p in self.entries))

    @property
    def M(self) -> int:
        return (1 << self.n) if self.uniform else len(self.entries)

    def items(self) -> Iterable[tuple[str, float]]:
        if self.uniform:
            p = 1.0 / (1 << self.n)
            for i in range(1 << self.n):
                yield format(i, f"0{self.n}b"), p
        else:
            yield from self.entries

    def probability_vector(self) -> np.ndarray:
        """Probabilities over the full computational basis (dense-scale only)."""
        d = 1 << self.n
        if self.uniform:
            return np.full(d, 1.0 / d)
        v = np.zeros(d)
        for x, p in self.entries:
            v[dense.basis_index(x)] = p
        return v


def min_entropy(prior: PriorDistribution) -> float:
    """H_min = -log2(max_x p(x)) in bits."""
    return -_frac_log2(prior.p_max)


@dataclass
class SecurityParams:
    """Inputs of the bound calculators.

    p_max, epsilon and gamma may be floats or Fractions; they are lifted
    to exact rationals inside the calculators.  M is the number of code
    words.
    """

    n: int
    epsilon: Real
    p_max: Real
    M: int
    gamma: Real
    delta: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.p_max <= 1:
            raise ValueError("p_max must lie in (0, 1]")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")

    @classmethod
    def from_prior(cls, prior: PriorDistribution, epsilon: Real,
                   gamma: Real = None, delta: float = None,
                   p_max: Real = None) -> "SecurityParams":
        derived = prior.p_max
        if p_max is not None and abs(float(p_max) - float(derived)) > 1e-12:
            raise ValueError("supplied p_max disagrees with the prior")
        if gamma is None:
            gamma = gamma_bound(delta) if delta is not None else 2.0
        return cls(n=prior.n, epsilon=epsilon, p_max=derived, M=prior.M,
                   gamma=gamma, delta=delta)

    @property
    def h_min(self) -> float:
        return -_frac_log2(Fraction(self.p_max))


# -- adversary states ---------------------------------------------------------


def conditional_state(cb: Codebook, x: str) -> np.ndarray:
    """rho_E^x = (1/K) sum_k C_k |x><x| C_k^dagger, dense."""
    if len(x) != cb.n:
        raise ValueError("code word length mismatch")
    d = 1 << cb.n
    if cb.n > dense.dense_cutoff():
        raise ValueError("codebook exceeds the dense cutoff")
    rho = np.zeros((d, d), dtype=complex)
    base = dense.basis_vector(x)
    for circuit in cb.circuits:
        v = dense.apply_circuit_to_vector(circuit, base)
        rho += np.outer(v, v.conj())
    return rho / cb.K


def eve_state(cb: Codebook, prior: PriorDistribution) -> np.ndarray:
    """rho_E = (1/K) sum_k C_k rho_B C_k^dagger with rho_B the prior mixture."""
    if prior.n != cb.n:
        raise ValueError("prior size mismatch")
    if cb.n > dense.dense_cutoff():
        raise ValueError("codebook exceeds the dense cutoff")
    d = 1 << cb.n
    p = prior.probability_vector()
    rho = np.zeros((d, d), dtype=complex)
    for circuit in cb.circuits:
        u = dense.circuit_unitary(circuit)
        rho += (u * p) @ u.conj().T
    return rho / cb.K


def _eve_state_from_unitaries(unitaries: Sequence[np.ndarray],
                              p: np.ndarray) -> np.ndarray:
    d = p.shape[0]
    rho = np.zeros((d, d), dtype=complex)
    for u in unitaries:
        rho += (u * p) @ u.conj().T
    return rho / len(unitaries)


# -- information measures -----------------------------------------------------


def _shannon_bits(p: np.ndarray) -> float:
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum())


def holevo(prior: PriorDistribution, conditionals: Sequence[np.ndarray]) -> float:
    """chi = S(sum_x p(x) rho_x) - sum_x p(x) S(rho_x), in bits.

    conditionals are ordered like prior.items().
    """
    probs = [p for _, p in prior.items()]
    if len(probs) != len(conditionals):
        raise ValueError("one conditional state per code word required")
    avg = sum(p * rho for p, rho in zip(probs, conditionals))
    chi = dense.von_neumann_entropy(avg)
    for p, rho in zip(probs, conditionals):
        chi -= p * dense.von_neumann_entropy(rho)
    return max(0.0, chi)


@dataclass
class Measurement:
    """Unit-rank POVM: elements w_y |phi_y><phi_y| with sum_y w_y = d."""

    d: int
    weights: np.ndarray
    vectors: np.ndarray  # columns phi_y
    label: str = "measurement"

    def __post_init__(self):
        if self.vectors.shape[0] != self.d:
            raise ValueError("vector dimension mismatch")
        if self.vectors.shape[1] != self.weights.shape[0]:
            raise ValueError("one weight per vector required")
        if np.any(self.weights < 0):
            raise ValueError("POVM weights must be nonnegative")
        resolved = (self.vectors * self.weights) @ self.vectors.conj().T
        if np.max(np.abs(resolved - np.eye(self.d))) > 1e-8:
            raise ValueError("POVM elements do not resolve the identity")

    @classmethod
    def computational_basis(cls, d: int) -> "Measurement":
        return cls(d, np.ones(d), np.eye(d, dtype=complex), "computational")

    @classmethod
    def from_basis_unitary(cls, u: np.ndarray, label: str) -> "Measurement":
        d = u.shape[0]
        return cls(d, np.ones(d), np.asarray(u, dtype=complex), label)

    @classmethod
    def haar_basis(cls, n: int, rng) -> "Measurement":
        d = 1 << n
        g = np.array([[complex(rng.gauss(0, 1), rng.gauss(0, 1))
                       for _ in range(d)] for _ in range(d)])
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls.from_basis_unitary(q, "haar")

    @classmethod
    def clifford_basis(cls, n: int, rng) -> "Measurement":
        u = dense.circuit_unitary(sample_uniform_clifford(n, rng))
        return cls.from_basis_unitary(u, "clifford")

    def outcome_probs(self, rho: np.ndarray) -> np.ndarray:
        """p(y) = w_y <phi_y| rho |phi_y>, clipped at zero."""
        raw = np.real(np.einsum("iy,ij,jy->y", self.vectors.conj(), rho,
                                self.vectors))
        return np.clip(raw, 0.0, None) * self.weights


def measured_mi(meas: Measurement, prior: PriorDistribution,
                conditionals: Sequence[np.ndarray]) -> float:
    """I(X;Y) = H(Y) - H(Y|X) for the given measurement, in bits."""
    probs = np.array([p for _, p in prior.items()])
    if len(probs) != len(conditionals):
        raise ValueError("one conditional state per code word required")
    cond = np.array([meas.outcome_probs(rho) for rho in conditionals])
    sums = cond.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > 1e-6:
        raise ValueError("conditional outcome distributions do not normalize")
    cond /= sums[:, None]
    p_y = probs @ cond
    h_y = _shannon_bits(p_y)
    h_y_given_x = float(sum(p * _shannon_bits(row)
                            for p, row in zip(probs, cond)))
    return max(0.0, h_y - h_y_given_x)


# -- tail bounds and key length -----------------------------------------------


@dataclass
class BoundResult:
    """A probability bound together with its raw exponent."""

    exponent: Fraction

    @property
    def bound(self) -> float:
        if self.exponent >= 0:
            return 1.0
        if self.exponent < -745:
            return 0.0
        return math.exp(float(self.exponent))

    @property
    def exponent_float(self) -> float:
        return _clip_float(self.exponent)


def chernoff_p1(params: SecurityParams, K: Real) -> BoundResult:
    """Matrix-Chernoff failure bound exp{n ln2 - K (eps^2/4) 2^-n / p_max}."""
    n = params.n
    eps = Fraction(params.epsilon)
    p_max = Fraction(params.p_max)
    exponent = n * _LN2 - Fraction(K) * eps * eps / 4 / (1 << n) / p_max
    return BoundResult(exponent)


def maurer_p2(params: SecurityParams, K: Real) -> BoundResult:
    """Maurer/union/net failure bound

    exp{ 2d ln(20 * 2^n / eps) + eps ln(M) / (4 p_max)
         - K eps^3 / (128 gamma p_max) },  d = 2^n.
    """
    n = params.n
    d = 1 << n
    eps = Fraction(params.epsilon)
    p_max = Fraction(params.p_max)
    gamma = Fraction(params.gamma)
    ln_net = Fraction(_ln_net(n, params.epsilon))
    ln_m = Fraction(math.log(params.M))
    exponent = (2 * d * ln_net + eps * ln_m / (4 * p_max)
                - Fraction(K) * eps ** 3 / (128 * gamma * p_max))
    return BoundResult(exponent)


def chernoff_threshold(params: SecurityParams) -> Fraction:
    """K at which the Chernoff exponent vanishes: 4 n 2^n p_max ln2 / eps^2."""
    eps = Fraction(params.epsilon)
    return 4 * params.n * (1 << params.n) * Fraction(params.p_max) * _LN2 / (eps * eps)


def maurer_threshold(params: SecurityParams) -> Fraction:
    """K at which the Maurer exponent vanishes:

    (128 gamma / eps^3) [ 2^(n+1) p_max ln(20 * 2^n / eps) + eps ln(M) / 4 ].
    """
    eps = Fraction(params.epsilon)
    ln_net = Fraction(_ln_net(params.n, params.epsilon))
    ln_m = Fraction(math.log(params.M))
    bracket = (1 << (params.n + 1)) * Fraction(params.p_max) * ln_net + eps * ln_m / 4
    return 128 * Fraction(params.gamma) / eps ** 3 * bracket


@dataclass
class KeyThreshold:
    k_min: Fraction
    branch: str  # "CHERNOFF" or "MAURER"
    chernoff: Fraction
    maurer: Fraction


def key_threshold(params: SecurityParams) -> KeyThreshold:
    """Minimum K of the two-branch condition; reports which branch binds."""
    b1 = chernoff_threshold(params)
    b2 = maurer_threshold(params)
    if b1 >= b2:
        return KeyThreshold(b1, "CHERNOFF", b1, b2)
    return KeyThreshold(b2, "MAURER", b1, b2)


def key_length_bits(params: SecurityParams) -> tuple[float, float]:
    """(exact, asymptotic) secret-key lengths in bits.

    exact is log2 of the K threshold.  asymptotic is the leading form
    n - H_min + log2(gamma) + log2(n) + log2(1/eps) with both hidden
    constants fixed to 1; it is an approximation, not a bound.
    """
    exact = _frac_log2(key_threshold(params).k_min)
    asym = (params.n - params.h_min + _frac_log2(Fraction(params.gamma))
            + math.log2(params.n) + math.log2(1.0 / float(params.epsilon)))
    return exact, asym


def comparison_rows(epsilon: float, n: int) -> tuple[float, float]:
    """Key sizes of the baselines: exact pad 2n, approximate pad
    n + log2(n) + log2(1/eps^2)."""
    if n < 1:
        raise ValueError("need at least one qubit")
    qotp = 2.0 * n
    approx = n + math.log2(n) + math.log2(1.0 / float(epsilon) ** 2)
    return qotp, approx


# -- empirical verification ---------------------------------------------------


@dataclass
class ChernoffTrial:
    lambda_max: float
    epsilon_hat: float
    violated: bool


@dataclass
class ChernoffReport:
    n: int
    K: int
    epsilon: float
    trials: list[ChernoffTrial]
    violation_freq: float
    p1_bound: float


def empirical_chernoff(n: int, K: int, prior: PriorDistribution, trials: int,
                       seed: int, epsilon: float, delta: float = 0.25,
                       depth_factor: float = 1.0,
                       trial_indices: Optional[range] = None) -> ChernoffReport:
    """Sample codebooks and test lambda_max(rho_E) against (1+eps) 2^-n.

    Each trial draws K fresh design circuits from its own seed stream
    (stream index = trial number), so results are independent of worker
    count and chunking.
    """
    if n > dense.dense_cutoff():
        raise ValueError("n exceeds the dense cutoff")
    cfg = SamplerConfig(n=n, delta=delta, depth_factor=depth_factor)
    p = prior.probability_vector()
    threshold = (1.0 + epsilon) * 2.0 ** (-n)
    rows = []
    indices = trial_indices if trial_indices is not None else range(trials)
    for t in indices:
        rng = stream_rng(seed, t)
        unitaries = [dense.circuit_unitary(sample_design_circuit(cfg, rng))
                     for _ in range(K)]
        rho = _eve_state_from_unitaries(unitaries, p)
        lam = float(dense.eigvalsh(rho)[0])
        rows.append(ChernoffTrial(lambda_max=lam,
                                  epsilon_hat=lam * 2.0 ** n - 1.0,
                                  violated=lam > threshold))
    freq = sum(r.violated for r in rows) / len(rows)
    params = SecurityParams.from_prior(prior, epsilon)
    return ChernoffReport(n=n, K=K, epsilon=epsilon, trials=rows,
                          violation_freq=freq,
                          p1_bound=chernoff_p1(params, K).bound)


@dataclass
class MaurerReport:
    n: int
    K: int
    tau: float
    gamma: float
    trials: int
    tail_freq: float
    bound: float
    means: list[float]


def empirical_maurer(n: int, K: int, x: str, phi, trials: int, seed: int,
                     tau: float, gamma: Optional[float] = None,
                     trial_indices: Optional[range] = None) -> MaurerReport:
    """Tail test of <phi| rho_E^x |phi> under uniform Clifford draws.

    Counts trials whose K-draw average of |<phi|C|x>|^2 falls below
    (1 - tau) 2^-n and compares against exp(-K tau^2 / (2 gamma)).
    gamma defaults to the exact 2-design value 2d/(d+1).
    """
    if n > dense.dense_cutoff():
        raise ValueError("n exceeds the dense cutoff")
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    d = 1 << n
    if gamma is None:
        gamma = 2.0 * d / (d + 1.0)
    phi_vec = dense.basis_vector(phi) if isinstance(phi, str) else np.asarray(phi)
    # tau = 0 is a degenerate threshold: the bound is vacuous and no trial
    # counts as a tail event; raw means are still reported.
    cut = (1.0 - tau) * 2.0 ** (-n) if tau > 0 else -math.inf
    means = []
    tail = 0
    base = dense.basis_vector(x)
    indices = trial_indices if trial_indices is not None else range(trials)
    if n == 1:
        from .sampling import all_single_qubit_circuits
        table = [abs(np.vdot(phi_vec,
                             dense.apply_circuit_to_vector(c, base))) ** 2
                 for c in all_single_qubit_circuits()]
        for t in indices:
            rng = stream_rng(seed, t)
            total = sum(table[rng.randrange(24)] for _ in range(K))
            m = total / K
            means.append(m)
            tail += m < cut
    else:
        for t in indices:
            rng = stream_rng(seed, t)
            total = 0.0
            for _ in range(K):
                circ = sample_uniform_clifford(n, rng)
                v = dense.apply_circuit_to_vector(circ, base)
                total += abs(np.vdot(phi_vec, v)) ** 2
            m = total / K
            means.append(m)
            tail += m < cut
    count = len(means)
    bound = math.exp(-K * tau * tau / (2.0 * gamma)) if tau > 0 else 1.0
    return MaurerReport(n=n, K=K, tau=tau, gamma=gamma, trials=count,
                        tail_freq=tail / count, bound=bound, means=means)


@dataclass
class LockingReport:
    n: int
    K: int
    holevo_bits: float
    mi_rows: list[tuple[str, float]]
    gap: float
    reference_2n_eps: Optional[float]


def locking_probe(n: int, K: int, prior: PriorDistribution,
                  measurements: Sequence[Measurement], seed: int = 0,
                  delta: float = 0.5, depth_factor: float = 0.05,
                  circuits: Optional[list[CliffordCircuit]] = None,
                  epsilon_reference: Optional[float] = None) -> LockingReport:
    """Holevo quantity versus measured mutual information for a codebook.

    With circuits omitted, K shallow design circuits are sampled; the
    shallow default (about one two-qubit fragment at n = 4) is the regime
    where the Holevo gap is pronounced at desk scale.  Deep scrambling
    circuits drive every conditional toward a rank-K random mixture whose
    entropy deficit is only about 0.72 bits at K = 2^n.
    """
    if n > dense.dense_cutoff():
        raise ValueError("n exceeds the dense cutoff")
    if circuits is None:
        rng = stream_rng(seed, 0)
        cfg = SamplerConfig(n=n, delta=delta, depth_factor=depth_factor)
        circuits = [sample_design_circuit(cfg, rng) for _ in range(K)]
    else:
        K = len(circuits)
    words = [x for x, _ in prior.items()]
    conditionals = []
    for x in words:
        base = dense.basis_vector(x)
        d = 1 << n
        rho = np.zeros((d, d), dtype=complex)
        for circ in circuits:
            v = dense.apply_circuit_to_vector(circ, base)
            rho += np.outer(v, v.conj())
        conditionals.append(rho / len(circuits))
    chi = holevo(prior, conditionals)
    mi_rows = [(m.label, measured_mi(m, prior, conditionals))
               for m in measurements]
    gap = chi - max(mi for _, mi in mi_rows) if mi_rows else chi
    ref = 2.0 * n * epsilon_reference if epsilon_reference is not None else None
    return LockingReport(n=n, K=K, holevo_bits=chi, mi_rows=mi_rows, gap=gap,
                         reference_2n_eps=ref)
