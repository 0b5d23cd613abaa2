import math
import random
from fractions import Fraction

import numpy as np
import pytest

from qlock import dense
from qlock.protocol import Codebook, build_codebook
from qlock.sampling import all_single_qubit_circuits
from qlock.security import (Measurement,
                            PriorDistribution, SecurityParams, chernoff_p1,
                            chernoff_threshold, comparison_rows,
                            conditional_state, empirical_chernoff,
                            empirical_maurer, eve_state, holevo,
                            key_length_bits, key_threshold, locking_probe,
                            maurer_p2, maurer_threshold, measured_mi,
                            min_entropy)
from qlock.stabilizer import CliffordCircuit


def all24_codebook():
    return Codebook(n=1, K=24, delta=0.5, master_seed=0,
                    circuits=all_single_qubit_circuits())


def identity_codebook(n, K=1):
    return Codebook(n=n, K=K, delta=0.5, master_seed=0,
                    circuits=[CliffordCircuit(n, []) for _ in range(K)])


class TestPrior:
    def test_uniform(self):
        prior = PriorDistribution(n=3)
        assert prior.p_max == Fraction(1, 8)
        assert prior.M == 8
        assert min_entropy(prior) == 3.0

    def test_sparse(self):
        prior = PriorDistribution(n=2, entries=[("00", 0.5), ("01", 0.25),
                                                ("10", 0.25)])
        assert min_entropy(prior) == pytest.approx(1.0)
        assert prior.M == 3

    def test_point_mass(self):
        prior = PriorDistribution(n=2, entries=[("11", 1.0)])
        assert min_entropy(prior) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            PriorDistribution(n=2, entries=[("00", 0.5)])
        with pytest.raises(ValueError):
            PriorDistribution(n=2, entries=[("00", 0.5), ("00", 0.5)])
        with pytest.raises(ValueError):
            PriorDistribution(n=2, entries=[("0", 1.0)])


class TestParams:
    def test_from_prior_agreement(self):
        prior = PriorDistribution(n=2)
        params = SecurityParams.from_prior(prior, 0.1, p_max=0.25)
        assert params.p_max == Fraction(1, 4)
        with pytest.raises(ValueError):
            SecurityParams.from_prior(prior, 0.1, p_max=0.3)

    def test_gamma_from_delta(self):
        prior = PriorDistribution(n=2)
        params = SecurityParams.from_prior(prior, 0.1, delta=0.0)
        assert params.gamma == 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            SecurityParams(n=2, epsilon=0.0, p_max=0.5, M=2, gamma=2.0)
        with pytest.raises(ValueError):
            SecurityParams(n=2, epsilon=0.1, p_max=0.5, M=2, gamma=0.5)


class TestEveState:
    def test_identity_uniform_is_maximally_mixed(self):
        rho = eve_state(identity_codebook(2), PriorDistribution(n=2))
        assert np.max(np.abs(rho - np.eye(4) / 4)) < 1e-12

    def test_all24_any_plaintext_is_maximally_mixed(self):
        for x in ("0", "1"):
            rho = conditional_state(all24_codebook(), x)
            assert np.max(np.abs(rho - np.eye(2) / 2)) < 1e-12

    def test_random_codebook_valid_density_matrix(self):
        cb = build_codebook(4, 6, 0.25, master_seed=8)
        rho = eve_state(cb, PriorDistribution(n=4))
        dense.check_density_matrix(rho, check_psd=True)

    def test_matches_prior_weighted_conditionals(self):
        cb = build_codebook(3, 4, 0.25, master_seed=15)
        prior = PriorDistribution(n=3, entries=[("000", 0.5), ("101", 0.3),
                                                ("111", 0.2)])
        mix = sum(p * conditional_state(cb, x) for x, p in prior.items())
        rho = eve_state(cb, prior)
        assert np.max(np.abs(rho - mix)) < 1e-10


class TestConditionalState:
    def test_k1_is_pure(self):
        cb = build_codebook(3, 1, 0.25, master_seed=2)
        rho = conditional_state(cb, "010")
        assert dense.von_neumann_entropy(rho) < 1e-8

    def test_rank_at_most_k(self):
        cb = build_codebook(3, 3, 0.25, master_seed=5)
        rho = conditional_state(cb, "000")
        vals = dense.eigvalsh(rho)
        assert (vals > 1e-9).sum() <= 3


class TestHolevo:
    def test_identity_uniform_is_n_bits(self):
        cb = identity_codebook(3)
        prior = PriorDistribution(n=3)
        conds = [conditional_state(cb, x) for x, _ in prior.items()]
        assert holevo(prior, conds) == pytest.approx(3.0, abs=1e-8)

    def test_identical_conditionals_zero(self):
        prior = PriorDistribution(n=1)
        conds = [np.eye(2) / 2, np.eye(2) / 2]
        assert holevo(prior, conds) == pytest.approx(0.0, abs=1e-10)

    def test_rank_k_lower_bound(self):
        # chi >= S(rho_E) - log2 K since each conditional has rank <= K
        cb = build_codebook(4, 16, 0.25, master_seed=33)
        prior = PriorDistribution(n=4)
        conds = [conditional_state(cb, x) for x, _ in prior.items()]
        chi = holevo(prior, conds)
        avg = sum(conds) / len(conds)
        assert chi >= dense.von_neumann_entropy(avg) - 4 - 1e-8
        assert chi >= 0.0


class TestMeasuredMI:
    def test_identity_computational_basis_full_info(self):
        cb = identity_codebook(2)
        prior = PriorDistribution(n=2)
        conds = [conditional_state(cb, x) for x, _ in prior.items()]
        meas = Measurement.computational_basis(4)
        assert measured_mi(meas, prior, conds) == pytest.approx(2.0, abs=1e-9)

    def test_maximally_mixed_conditionals_zero(self, rng):
        prior = PriorDistribution(n=2)
        conds = [np.eye(4) / 4] * 4
        for meas in (Measurement.computational_basis(4),
                     Measurement.haar_basis(2, rng),
                     Measurement.clifford_basis(2, rng)):
            assert measured_mi(meas, prior, conds) == pytest.approx(0.0, abs=1e-9)

    def test_data_processing_vs_holevo(self):
        rng = random.Random(77)
        for seed in range(4):
            n = rng.randrange(2, 5)
            cb = build_codebook(n, rng.randrange(2, 9), 0.25,
                                master_seed=1000 + seed)
            prior = PriorDistribution(n=n)
            conds = [conditional_state(cb, x) for x, _ in prior.items()]
            chi = holevo(prior, conds)
            for meas in (Measurement.computational_basis(1 << n),
                         Measurement.haar_basis(n, rng),
                         Measurement.clifford_basis(n, rng)):
                mi = measured_mi(meas, prior, conds)
                assert mi <= chi + 1e-6
                assert 0.0 <= mi <= min(n, math.log2(1 << n)) + 1e-9

    def test_povm_completeness_enforced(self):
        bad = np.eye(4, dtype=complex)[:, :3]
        with pytest.raises(ValueError):
            Measurement(4, np.ones(3), bad)


class TestBounds:
    @staticmethod
    def random_params(seed):
        rng = random.Random(seed)
        n = rng.randrange(2, 13)
        eps = 10 ** rng.uniform(-9, -0.4)
        p_max = 2.0 ** (-rng.uniform(0.5, 1.0) * n)
        M = rng.randrange(1, (1 << n) + 1)
        gamma = rng.uniform(1.0, 6.0)
        return SecurityParams(n=n, epsilon=eps, p_max=p_max, M=M, gamma=gamma)

    @pytest.mark.parametrize("seed", range(20))
    def test_threshold_identities_exact(self, seed):
        params = self.random_params(seed)
        r1 = chernoff_p1(params, chernoff_threshold(params))
        r2 = maurer_p2(params, maurer_threshold(params))
        assert r1.exponent == 0 and r1.bound == 1.0
        assert r2.exponent == 0 and r2.bound == 1.0

    def test_chernoff_monotone_in_k(self):
        params = SecurityParams(n=4, epsilon=0.1, p_max=Fraction(1, 16),
                                M=16, gamma=2.0)
        ks = [10, 100, 1000, 10000, 100000]
        bounds = [chernoff_p1(params, k).exponent for k in ks]
        assert all(a > b for a, b in zip(bounds, bounds[1:]))

    def test_chernoff_pmax_monotonicity(self):
        base = SecurityParams(n=4, epsilon=0.1, p_max=0.05, M=16, gamma=2.0)
        double = SecurityParams(n=4, epsilon=0.1, p_max=0.1, M=16, gamma=2.0)
        K = 10 ** 6
        assert chernoff_p1(double, K).exponent > chernoff_p1(base, K).exponent

    def test_maurer_monotonicities(self):
        params = SecurityParams(n=3, epsilon=0.05, p_max=Fraction(1, 8),
                                M=8, gamma=2.0)
        k0 = maurer_threshold(params)
        assert maurer_p2(params, k0 * 2).exponent < 0
        bigger_gamma = SecurityParams(n=3, epsilon=0.05, p_max=Fraction(1, 8),
                                      M=8, gamma=4.0)
        assert (maurer_p2(bigger_gamma, k0).exponent
                > maurer_p2(params, k0).exponent)

    def test_k_to_infinity(self):
        params = SecurityParams(n=3, epsilon=0.05, p_max=Fraction(1, 8),
                                M=8, gamma=2.0)
        assert chernoff_p1(params, 10 ** 12).bound < 1e-15
        assert maurer_p2(params, 10 ** 18).bound == 0.0


class TestKeyThreshold:
    def test_halving_pmax_halves_chernoff_branch(self):
        a = SecurityParams(n=6, epsilon=0.01, p_max=Fraction(1, 8), M=64,
                           gamma=2.0)
        b = SecurityParams(n=6, epsilon=0.01, p_max=Fraction(1, 16), M=64,
                           gamma=2.0)
        assert chernoff_threshold(b) * 2 == chernoff_threshold(a)

    def test_smaller_epsilon_raises_both(self):
        a = SecurityParams(n=6, epsilon=0.01, p_max=Fraction(1, 64), M=64,
                           gamma=2.0)
        b = SecurityParams(n=6, epsilon=0.005, p_max=Fraction(1, 64), M=64,
                           gamma=2.0)
        assert chernoff_threshold(b) > chernoff_threshold(a)
        assert maurer_threshold(b) > maurer_threshold(a)

    def test_crossover_against_qotp(self):
        eps = 1e-8
        for n, expect_below in ((32, False), (64, True)):
            params = SecurityParams(n=n, epsilon=eps,
                                    p_max=Fraction(1, 1 << n), M=1 << n,
                                    gamma=2.0)
            logk, _ = key_length_bits(params)
            assert (logk < 2 * n) is expect_below

    def test_branch_reporting(self):
        params = SecurityParams(n=64, epsilon=1e-8,
                                p_max=Fraction(1, 1 << 64), M=1 << 64,
                                gamma=2.0)
        kt = key_threshold(params)
        assert kt.branch == "MAURER"
        assert kt.k_min == max(kt.chernoff, kt.maurer)

    def test_nonincreasing_in_hmin_and_epsilon(self):
        # p_max = 2^-Hmin: raising the min-entropy can only shrink K
        n, M = 16, 1 << 16
        hmins = [0.5 * n, 0.7 * n, 0.9 * n, float(n)]
        ks = [key_threshold(SecurityParams(n=n, epsilon=1e-6,
                                           p_max=2.0 ** (-h), M=M,
                                           gamma=2.0)).k_min
              for h in hmins]
        assert all(a >= b for a, b in zip(ks, ks[1:]))
        eps_grid = [1e-2, 1e-4, 1e-6, 1e-8]
        ks = [key_threshold(SecurityParams(n=n, epsilon=e,
                                           p_max=Fraction(1, 1 << n), M=M,
                                           gamma=2.0)).k_min
              for e in eps_grid]
        assert all(a <= b for a, b in zip(ks, ks[1:]))


class TestKeyLength:
    def test_exact_dominates_leading_term(self):
        for n in range(8, 129, 8):
            for frac in (0.6, 0.8, 1.0):
                p_max = Fraction(1, 1 << n) if frac == 1.0 \
                    else 2.0 ** (-frac * n)
                params = SecurityParams(n=n, epsilon=1e-8, p_max=p_max,
                                        M=1 << n, gamma=2.0)
                exact, asym = key_length_bits(params)
                assert exact >= n - params.h_min

    def test_sublinear_growth_vs_qotp(self):
        eps = 1e-8
        vals = {}
        for n in (64, 128):
            params = SecurityParams(n=n, epsilon=eps,
                                    p_max=Fraction(1, 1 << n), M=1 << n,
                                    gamma=2.0)
            vals[n], _ = key_length_bits(params)
        assert vals[128] - vals[64] < 2 * (128 - 64)

    def test_hmin_offset(self):
        n, eps = 128, 1e-8
        base, _ = key_length_bits(SecurityParams(
            n=n, epsilon=eps, p_max=Fraction(1, 1 << n), M=1 << n, gamma=2.0))
        low, _ = key_length_bits(SecurityParams(
            n=n, epsilon=eps, p_max=2.0 ** (-0.6 * n), M=1 << n, gamma=2.0))
        assert abs((low - base) - 0.4 * n) < 1.0


class TestComparisonRows:
    def test_qotp(self):
        assert comparison_rows(1e-8, 10)[0] == 20.0

    def test_approx_otp_value(self):
        _, approx = comparison_rows(1e-8, 10)
        assert approx == pytest.approx(10 + math.log2(10) + math.log2(1e16),
                                       abs=1e-9)

    def test_qotp_increment(self):
        for n in range(2, 20):
            assert comparison_rows(0.1, n)[0] - comparison_rows(0.1, n - 1)[0] == 2.0


class TestEmpiricalChernoff:
    def test_uniform_prior_never_violates(self):
        prior = PriorDistribution(n=2)
        rep = empirical_chernoff(2, 8, prior, trials=5, seed=3, epsilon=0.1)
        assert rep.violation_freq == 0.0
        for t in rep.trials:
            assert abs(t.lambda_max - 0.25) < 1e-12

    def test_k1_lambda_max_is_pmax(self):
        prior = PriorDistribution(n=1, entries=[("0", 0.7), ("1", 0.3)])
        rep = empirical_chernoff(1, 1, prior, trials=4, seed=5, epsilon=0.5)
        for t in rep.trials:
            assert t.lambda_max == pytest.approx(0.7, abs=1e-9)

    def test_all24_exhaustive_lambda_max(self):
        rho = conditional_state(all24_codebook(), "0")
        assert dense.eigvalsh(rho)[0] == pytest.approx(0.5, abs=1e-12)


class TestEmpiricalMaurer:
    def test_bound_formula(self):
        rep = empirical_maurer(1, 50, "0", "0", trials=100, seed=1, tau=0.5,
                               gamma=4 / 3)
        assert rep.bound == pytest.approx(math.exp(-50 * 0.25 / (8 / 3)))

    def test_k1_tau_near_one_matches_enumeration(self):
        # single draws land below (1-tau)/2 exactly when the overlap is 0,
        # which happens for 4 of the 24 single-qubit Cliffords
        rep = empirical_maurer(1, 1, "0", "0", trials=20000, seed=2, tau=0.99)
        sigma = math.sqrt((1 / 6) * (5 / 6) / 20000)
        assert abs(rep.tail_freq - 1 / 6) < 5 * sigma

    def test_tau_zero_convention(self):
        rep = empirical_maurer(1, 5, "0", "0", trials=50, seed=3, tau=0.0)
        assert rep.tail_freq == 0.0
        assert rep.bound == 1.0

    def test_n2_path(self):
        rep = empirical_maurer(2, 10, "00", "00", trials=50, seed=4, tau=0.5)
        assert 0.0 <= rep.tail_freq <= 1.0
        assert rep.gamma == pytest.approx(8 / 5)


class TestLockingProbe:
    def test_identity_codebook_leaks_everything(self):
        prior = PriorDistribution(n=2)
        meas = [Measurement.computational_basis(4)]
        circuits = [CliffordCircuit(2, []) for _ in range(4)]
        rep = locking_probe(2, 4, prior, meas, circuits=circuits)
        assert rep.mi_rows[0][1] == pytest.approx(2.0, abs=1e-9)

    def test_all24_zero_information(self, rng):
        prior = PriorDistribution(n=1)
        meas = [Measurement.computational_basis(2),
                Measurement.haar_basis(1, rng),
                Measurement.clifford_basis(1, rng)]
        rep = locking_probe(1, 24, prior, meas,
                            circuits=all_single_qubit_circuits())
        assert rep.holevo_bits == pytest.approx(0.0, abs=1e-12)
        for _, mi in rep.mi_rows:
            assert mi == pytest.approx(0.0, abs=1e-12)

    def test_n4_gap(self, rng):
        prior = PriorDistribution(n=4)
        meas = [Measurement.computational_basis(16)]
        for _ in range(4):
            meas.append(Measurement.haar_basis(4, rng))
        rep = locking_probe(4, 16, prior, meas, seed=7)
        assert rep.holevo_bits > 0.0
        assert max(mi for _, mi in rep.mi_rows) < 2.0
        assert rep.gap > 0.0
