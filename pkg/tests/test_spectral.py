import numpy as np
import pytest

from ampkit.exceptions import InvalidArgumentError
from ampkit.model import gen_conditioned, gen_iid_gaussian
from ampkit.spectral import MemoryCoefficients, build_spectral_model


def _direct_moments(H, depth):
    """``w_t`` and ``wbar_ij`` from explicit ``W_t = H^T B^t H`` with ``B = lambda_dag I - H H^T``."""
    m, n = H.shape
    lam = np.linalg.eigvalsh(H @ H.T)
    B = 0.5 * (lam.max() + lam.min()) * np.eye(m) - H @ H.T
    W = [H.T @ np.linalg.matrix_power(B, t) @ H for t in range(depth + 1)]
    w = np.array([np.trace(x) / n for x in W])
    wbar = np.array([[np.trace(a @ b) / n - np.trace(a) * np.trace(b) / n**2 for b in W] for a in W])
    return w, wbar


@pytest.mark.parametrize("seed", range(100))
def test_eig_matches_trace(seed):
    H = gen_iid_gaussian(8, 16, seed)
    a = build_spectral_model(H, 6, method="eig")
    b = build_spectral_model(H, 6, method="trace")
    np.testing.assert_allclose(a.w_scaled, b.w_scaled, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(a.wbar_scaled, b.wbar_scaled, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_against_direct_oracle(seed):
    H = gen_conditioned(8, 16, 5.0, seed)
    sp = build_spectral_model(H, 4)
    w, wbar = _direct_moments(H, 4)
    np.testing.assert_allclose(sp.w, w, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(sp.wbar, wbar, rtol=1e-9, atol=1e-12)


def test_kappa_one():
    sp = build_spectral_model(gen_conditioned(64, 128, 1.0, 0), 5)
    assert sp.lambda_dagger == pytest.approx(2.0)
    assert sp.w[0] == pytest.approx(1.0)
    np.testing.assert_allclose(sp.w[1:], 0.0, atol=1e-12)
    # Tr(W_0^2)/N - w_0^2 = 2 - 1; every higher moment vanishes since B = 0
    expected = np.zeros((6, 6))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(sp.wbar, expected, atol=1e-12)


def test_scaled_spectrum_bounded():
    sp = build_spectral_model(gen_conditioned(64, 128, 100.0, 1), 20)
    assert np.all(np.abs(sp.w_scaled) <= 1.0 + 1e-12)


def test_hth_eigenvalues_and_lmmse_ratio():
    H = gen_iid_gaussian(6, 10, 3)
    sp = build_spectral_model(H, 0)
    ref = np.sort(np.linalg.eigvalsh(H.T @ H))[::-1]
    np.testing.assert_allclose(sp.hth_eigenvalues(), np.clip(ref, 0, None), atol=1e-10)
    assert sp.lmmse_trace_ratio(0.1) == pytest.approx(np.mean(np.clip(ref, 0, None) / (np.clip(ref, 0, None) + 0.1)))


def test_errors():
    with pytest.raises(InvalidArgumentError):
        build_spectral_model(np.zeros((3, 4)), 2)
    with pytest.raises(InvalidArgumentError):
        build_spectral_model(np.ones((3, 4)), -1)
    with pytest.raises(InvalidArgumentError):
        build_spectral_model(np.ones((3, 4)), 1, method="svd")
    H = np.ones((3, 4))
    H[0, 0] = np.nan
    with pytest.raises(InvalidArgumentError):
        build_spectral_model(H, 1)


class TestMemoryCoefficients:
    def test_first_iteration_has_unit_step(self):
        sp = build_spectral_model(gen_iid_gaussian(32, 64, 0), 4)
        mc = MemoryCoefficients(sp, 0.01)
        xi, p, eps, tau2 = mc.advance(np.array([[1.0]]))
        assert xi == 1.0
        s2 = 0.01 / sp.lambda_dagger
        w0, wb = sp.w_scaled[0], sp.wbar_scaled[0, 0]
        assert eps == pytest.approx(w0)
        assert tau2 == pytest.approx((s2 * w0 + wb) / w0**2, rel=1e-12)

    def test_depth_guard(self):
        sp = build_spectral_model(gen_iid_gaussian(16, 32, 0), 1)
        mc = MemoryCoefficients(sp, 0.01)
        mc.advance(np.array([[1.0]]))
        with pytest.raises(InvalidArgumentError):
            mc.advance(np.eye(2))
