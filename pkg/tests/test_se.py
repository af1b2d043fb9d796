import numpy as np
import pytest

from ampkit.exceptions import InvalidArgumentError, UnsupportedPriorError
from ampkit.model import BernoulliGaussian, LaplaceLasso, gen_conditioned, gen_iid_gaussian, qpsk_real
from ampkit.se import (
    amp_lasso_se,
    amp_se,
    damp_row,
    expect_over_input,
    mamp_se,
    mmse_error,
    oamp_se,
    soft_threshold_error,
)
from ampkit.spectral import MemoryCoefficients, build_spectral_model

# Fixed points of tau2 <- sigma_w2 + mmse(tau2) / alpha, computed independently by
# trapezoid integration of the posterior variance on a 4e5-point grid of r.
# Columns: prior, sigma_w2, alpha, tau2*, mmse(tau2*).
FROZEN_FIXED_POINTS = [
    (BernoulliGaussian(0.05), 0.01, 0.5, 0.011518826889423432, 0.0007594134447117138),
    (BernoulliGaussian(0.1), 0.01, 0.5, 0.013776895811180224, 0.0018884479055901104),
    (BernoulliGaussian(0.05), 1e-3, 0.7, 0.0010873349055919488, 6.113443391436406e-05),
    (qpsk_real(), 10**-0.8 / 2, 1.0, 0.09667747013543747, 0.017432810512381727),
    (qpsk_real(), 10**-1.2 / 2, 1.0, 0.03160181572161903, 5.394849760936049e-05),
    (qpsk_real(), 10**-1.2 / 2, 4.0, 0.031561210238754175, 5.337205897802613e-05),
]


class TestQuadrature:
    def test_expectation_of_constant(self):
        assert expect_over_input(BernoulliGaussian(0.05), 0.01, lambda r: 1.0) == pytest.approx(1.0, abs=1e-10)

    def test_second_moment_of_input(self):
        # E[R^2] = E[X^2] + tau2
        assert expect_over_input(qpsk_real(), 0.2, lambda r: r * r) == pytest.approx(0.7, rel=1e-10)

    @pytest.mark.parametrize("prior", [BernoulliGaussian(0.05), qpsk_real()])
    def test_mmse_against_monte_carlo(self, prior):
        from ampkit.denoise import mmse_denoise
        from ampkit.model import sample_prior

        rng = np.random.default_rng(0)
        n, tau2 = 400_000, 0.05
        x = sample_prior(prior, n, rng)
        r = x + np.sqrt(tau2) * rng.standard_normal(n)
        err = (mmse_denoise(prior, r, tau2).mean - x) ** 2
        assert mmse_error(prior, tau2) == pytest.approx(err.mean(), abs=4 * err.std() / np.sqrt(n))

    def test_soft_threshold_zero_gamma(self):
        err, d = soft_threshold_error(BernoulliGaussian(0.1), 0.3, 0.0)
        assert err == pytest.approx(0.3, rel=1e-8)
        assert d == pytest.approx(1.0)

    def test_unsupported_prior(self):
        with pytest.raises(UnsupportedPriorError):
            mmse_error(LaplaceLasso(0.1), 0.1)


class TestAmpSe:
    @pytest.mark.parametrize("case", FROZEN_FIXED_POINTS, ids=lambda c: f"{type(c[0]).__name__}-{c[1]:.3g}-{c[2]}")
    def test_fixed_point(self, case):
        prior, s2, alpha, tau2_ref, mse_ref = case
        tr = amp_se(prior, s2, alpha, 200)
        assert tr.status == "Converged"
        assert tr.tau2[-1] == pytest.approx(tau2_ref, rel=1e-8)
        assert tr.mse_pred[-1] == pytest.approx(mse_ref, rel=1e-6)

    def test_monotone_decrease(self):
        tr = amp_se(BernoulliGaussian(0.05), 0.01, 0.5, 40)
        assert np.all(np.diff(tr.tau2) <= 1e-15)
        assert np.all(np.diff(tr.mse_pred) <= 1e-15)

    def test_fixed_point_independent_of_alpha_at_high_snr(self):
        a = amp_se(qpsk_real(), 10**-1.2 / 2, 1.0, 60).nmse_db[-1]
        b = amp_se(qpsk_real(), 10**-1.2 / 2, 4.0, 60).nmse_db[-1]
        assert abs(a - b) <= 0.05

    def test_huge_noise_gives_prior_variance(self):
        tr = amp_se(BernoulliGaussian(0.1), 1e6, 0.5, 5)
        np.testing.assert_allclose(tr.nmse_db, 0.0, atol=1e-4)

    def test_budget_padding_and_determinism(self):
        a = amp_se(BernoulliGaussian(0.05), 0.01, 0.5, 300)
        b = amp_se(BernoulliGaussian(0.05), 0.01, 0.5, 300)
        assert len(a) == 300 and a.mse_pred == b.mse_pred

    def test_running_when_budget_short(self):
        assert amp_se(BernoulliGaussian(0.05), 0.01, 0.5, 3).status == "Running"

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            amp_se(BernoulliGaussian(0.1), 0.0, 0.5, 5)
        with pytest.raises(InvalidArgumentError):
            amp_se(BernoulliGaussian(0.1), 0.1, 0.5, 0)
        with pytest.raises(InvalidArgumentError):
            amp_se(BernoulliGaussian(0.1), 0.1, -1.0, 5)


class TestAmpLassoSe:
    def test_first_step_uses_zero_estimate(self):
        tr = amp_lasso_se(BernoulliGaussian(0.05), 1e-5, 0.5, 0.05, 2)
        assert tr.tau2[0] == pytest.approx(1e-5 + 2.0)
        assert tr.v_hat[0] == pytest.approx(0.1)

    def test_fixed_point_is_self_consistent(self):
        prior, s2, alpha, lam = BernoulliGaussian(0.05), 1e-5, 0.5, 0.05
        tr = amp_lasso_se(prior, s2, alpha, lam, 60)
        tau2, tau_hat = tr.tau2[-1], tr.v_hat[-1]
        err, d = soft_threshold_error(prior, tau2, lam + tau_hat)
        assert s2 + err / alpha == pytest.approx(tau2, rel=1e-6)
        assert (lam + tau_hat) * d / alpha == pytest.approx(tau_hat, rel=1e-6)


class TestOampSe:
    def test_agrees_with_amp_on_iid_spectrum(self):
        sp = build_spectral_model(gen_iid_gaussian(1024, 2048, 0), 0)
        o = oamp_se(BernoulliGaussian(0.1), 0.01, sp, 60)
        a = amp_se(BernoulliGaussian(0.1), 0.01, 0.5, 60)
        assert abs(o.nmse_db[-1] - a.nmse_db[-1]) <= 0.05

    def test_first_iteration_hand_value(self):
        # kappa = 1, M = N/2: every nonzero eigenvalue of H^T H is 2
        sp = build_spectral_model(gen_conditioned(64, 128, 1.0, 0), 0)
        s2 = 0.01
        tr = oamp_se(BernoulliGaussian(0.1), s2, sp, 1)
        ratio = 0.5 * 2.0 / (2.0 + s2)
        assert tr.tau2[0] == pytest.approx(1.0 / ratio - 1.0, rel=1e-10)

    def test_monotone(self):
        sp = build_spectral_model(gen_conditioned(256, 512, 100.0, 0), 0)
        tr = oamp_se(BernoulliGaussian(0.05), 0.01, sp, 30)
        assert np.all(np.diff(tr.mse_pred) <= 1e-12)


class TestMampSe:
    def test_first_iteration_matches_coefficients(self):
        prior = BernoulliGaussian(0.1)
        sp = build_spectral_model(gen_iid_gaussian(128, 256, 0), 4)
        tr = mamp_se(prior, 0.01, sp, 1, mc_samples=200_000, seed=1)
        vtab = np.array([[float(np.mean(_sample(prior, 200_000, 1) ** 2))]])
        _, _, _, tau2 = MemoryCoefficients(sp, 0.01).advance(vtab)
        assert tr.tau2[0] == pytest.approx(tau2, rel=1e-12)
        assert tr.mse_pred[0] == pytest.approx(mmse_error(prior, tau2), rel=0.02)

    def test_deterministic(self):
        sp = build_spectral_model(gen_iid_gaussian(64, 128, 0), 10)
        a = mamp_se(BernoulliGaussian(0.1), 0.01, sp, 5, mc_samples=5000, seed=3)
        b = mamp_se(BernoulliGaussian(0.1), 0.01, sp, 5, mc_samples=5000, seed=3)
        assert a.mse_pred == b.mse_pred

    def test_damping_validation(self):
        sp = build_spectral_model(gen_iid_gaussian(16, 32, 0), 4)
        with pytest.raises(InvalidArgumentError):
            mamp_se(BernoulliGaussian(0.1), 0.01, sp, 2, damping=(0.0, 1.0))

    def test_damp_row(self):
        np.testing.assert_allclose(damp_row(np.array([0.3, 0.5]), 1.0, 0.8), [0.3, 0.6])
        np.testing.assert_allclose(damp_row(np.array([0.5]), None, 0.8), [0.5])


def _sample(prior, n, seed):
    # same draw order as mamp_se: prior samples come first from its generator
    from ampkit.model import sample_prior

    return sample_prior(prior, n, np.random.default_rng(seed))
