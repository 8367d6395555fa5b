import math

import numpy as np
import pytest

from qbagents.agreement import (
    chi,
    chi_edge_terms,
    expected_posterior,
    kolmogorov_contraction_check,
    mean_contraction_gap,
    verify_appendix_claims,
)
from qbagents.core_math import BetaParams, Density1D
from qbagents.errors import ValidationError


class TestExpectedPosterior:
    def test_symmetric_uniform(self):
        exp = expected_posterior(BetaParams(1, 1), 0.5)
        assert exp.mean() == pytest.approx(0.5, abs=1e-15)

    def test_beta21_against_third(self):
        # prior mean 2/3, second moment 1/2; the mean formula gives 7/12.
        exp = expected_posterior(BetaParams(2, 1), 1.0 / 3.0)
        assert exp.mean() == pytest.approx(7 / 12, abs=1e-12)
        # independent quadrature oracle on the density formula
        theta = np.linspace(0, 1, 200_001)
        prior_pdf = 2 * theta  # Beta(2,1)
        m_a, m_b = 2 / 3, 1 / 3
        factor = (m_b / m_a) * theta + ((1 - m_b) / (1 - m_a)) * (1 - theta)
        dens = factor * prior_pdf
        norm = np.trapezoid(dens, theta)
        oracle_mean = np.trapezoid(theta * dens, theta) / norm
        assert norm == pytest.approx(1.0, abs=1e-9)
        assert oracle_mean == pytest.approx(7 / 12, abs=1e-9)

    def test_appendix_mixture_weights(self):
        # Beta(k+1, N-k+1) prior and other mean (l+1)/(N+2)
        n, k, l = 7, 5, 2
        exp = expected_posterior(BetaParams(k + 1, n - k + 1), (l + 1) / (n + 2))
        assert exp.kind == "beta_mixture"
        assert exp.mixture_weights == pytest.approx(((l + 1) / (n + 2),
                                                     (n - l + 1) / (n + 2)))
        assert exp.components[0] == BetaParams(k + 2, n - k + 1)
        assert exp.components[1] == BetaParams(k + 1, n - k + 2)

    def test_grid_prior_normalizes(self):
        prior = Density1D.from_beta(BetaParams(3, 2), n=4001)
        exp = expected_posterior(prior, 0.4)
        assert exp.density.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_boundary_means_rejected(self):
        with pytest.raises(ValidationError):
            expected_posterior(BetaParams(1, 1), 0.0)
        with pytest.raises(ValidationError):
            expected_posterior(BetaParams(1, 1), 1.0)

    def test_matches_monte_carlo_step(self):
        # one simulated exchange: outcome ~ Bernoulli(mean_b), posterior mean
        # averaged over 1e5 trials agrees with the expected-posterior mean
        rng = np.random.default_rng(0)
        prior = Density1D.from_pdf(lambda t: np.minimum(t / 0.7, (1 - t) / 0.3),
                                   n=2001)
        mean_b = 0.55
        theta = prior.grid
        w_heads = prior.weights * theta
        w_heads /= w_heads.sum()
        w_tails = prior.weights * (1 - theta)
        w_tails /= w_tails.sum()
        m_heads = float(w_heads @ theta)
        m_tails = float(w_tails @ theta)
        n_trials = 100_000
        heads = rng.binomial(n_trials, mean_b)
        mc_mean = (heads * m_heads + (n_trials - heads) * m_tails) / n_trials
        sd = abs(m_heads - m_tails) * math.sqrt(mean_b * (1 - mean_b) / n_trials)
        expected = expected_posterior(prior, mean_b).mean()
        assert abs(mc_mean - expected) < 3 * sd


class TestMeanContraction:
    def test_equal_means(self):
        before, after = mean_contraction_gap(BetaParams(2, 2), BetaParams(2, 2))
        assert before == 0.0
        assert after == pytest.approx(0.0, abs=1e-15)

    def test_beta21_vs_beta12(self):
        before, after = mean_contraction_gap(BetaParams(2, 1), BetaParams(1, 2))
        assert before == pytest.approx(1 / 3, abs=1e-12)
        assert after == pytest.approx(1 / 4, abs=1e-12)
        assert before >= after

    def test_random_beta_pairs(self):
        rng = np.random.default_rng(1)
        for _ in range(2000):
            a = BetaParams(rng.uniform(0.2, 15), rng.uniform(0.2, 15))
            b = BetaParams(rng.uniform(0.2, 15), rng.uniform(0.2, 15))
            before, after = mean_contraction_gap(a, b)
            assert after <= before + 1e-12

    def test_grid_prior_contraction(self):
        prior = Density1D.from_beta(BetaParams(5, 2), n=4001)
        other = Density1D.from_beta(BetaParams(2, 5), n=4001)
        before, after = mean_contraction_gap(prior, other)
        assert after <= before + 1e-12


class TestChi:
    def test_vanishes_at_boundary(self):
        assert chi(0.0, 3, 1, 5) == 0.0
        assert chi(1.0, 3, 1, 5) == 0.0

    def test_hand_value(self):
        # sum term 1/4; boundary terms 1/16 + 1/16
        assert chi(0.5, 1, 0, 1) == pytest.approx(1 / 8, abs=1e-15)

    def test_nonnegative_on_grid(self):
        xs = np.linspace(0, 1, 101)
        for n in range(1, 13):
            for k in range(1, n + 1):
                for l in range(k):
                    assert np.min(chi(xs, k, l, n)) >= -1e-12

    def test_domain_errors(self):
        with pytest.raises(ValidationError):
            chi(0.5, 1, 1, 2)
        with pytest.raises(ValidationError):
            chi(1.5, 2, 1, 3)

    def test_edge_terms(self):
        for n in range(1, 26):
            for k in range(1, n + 1):
                for l in range(k):
                    first, second = chi_edge_terms(k, l, n)
                    assert first == pytest.approx(n + 1 - k, abs=1e-6)
                    assert second == pytest.approx(l + 1, abs=1e-6)
                    assert first > 0
                    assert second > 0


class TestKolmogorovContraction:
    def test_equal_counts(self):
        assert kolmogorov_contraction_check(3, 3, 6) == (0.0, 0.0)

    def test_single_flip_case(self):
        k_prior, k_post = kolmogorov_contraction_check(1, 0, 1)
        assert k_prior == pytest.approx(0.5, abs=1e-9)
        assert k_post <= k_prior

    def test_swap_symmetry(self):
        a = kolmogorov_contraction_check(4, 1, 6)
        b = kolmogorov_contraction_check(1, 4, 6)
        assert a[0] == pytest.approx(b[0], abs=1e-15)
        assert a[1] == pytest.approx(b[1], abs=1e-15)

    def test_exhaustive_small(self):
        for n in range(1, 9):
            for k in range(n + 1):
                for l in range(n + 1):
                    k_prior, k_post = kolmogorov_contraction_check(k, l, n)
                    assert k_prior >= k_post - 1e-10


def test_verify_claims_small_battery():
    rows = verify_appendix_claims(chi_max_n=6, kdist_max_n=4, n_beta_pairs=500)
    assert all(r["passed"] for r in rows)
