"""Acceptance criteria 1-11.

Each test logs one outcome line per criterion (printed again in the
terminal summary) and then asserts it. Reference runs go through the
bundled experiment configs where one exists.
"""
import json
import time

import numpy as np
import pytest

from ampkit.denoise import bg_mmse, discrete_mmse, soft_threshold
from ampkit.diag import divergence_free_derivative, equivalence_check, plateau_iteration, trace_orthogonality
from ampkit.experiments import bundled_config_path, check_config, load_config, run_experiment
from ampkit.model import (
    BernoulliGaussian,
    Conditioned,
    Discrete,
    IidGaussian,
    gen_iid_gaussian,
    qpsk_real,
    sample_prior,
    synthesize,
)
from ampkit.solve import SolverConfig, run_solver
from ampkit.solve.general import run_general_recursion
from ampkit.spectral import build_spectral_model
from oracles import bg_oracle, discrete_oracle

pytestmark = pytest.mark.slow


def _raw(name):
    return json.loads(bundled_config_path(name).read_text())


def _config(raw):
    cfg, errs = check_config(raw)
    assert not errs, errs
    return cfg


# ---------------------------------------------------------------- 1 and 2 ---


@pytest.fixture(scope="module")
def lasso_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("lasso")
    start = time.perf_counter()
    res = run_experiment(load_config("fig3"), out_dir=out)
    return res, time.perf_counter() - start


def test_criterion_01_lasso_convergence_speed(lasso_run, acceptance):
    res, runtime = lasso_run
    plateau = {k: plateau_iteration(res.traces[k]) for k in ("ISTA", "FISTA", "AMP")}
    final = {k: float(res.traces[k][-1]) for k in plateau}
    spread = max(final.values()) - min(final.values())
    ok = (
        abs(plateau["AMP"] - 18) <= 5
        and abs(plateau["FISTA"] - 108) <= 25
        and abs(plateau["ISTA"] - 235) <= 50
        and spread <= 0.5
        and runtime < 60
    )
    detail = (
        f"plateau AMP {plateau['AMP']}, FISTA {plateau['FISTA']}, ISTA {plateau['ISTA']}; "
        f"final spread {spread:.3f} dB; runtime {runtime:.1f} s"
    )
    assert acceptance(1, ok, detail)


def test_criterion_02_input_error_gaussianity(tmp_path, acceptance):
    res = run_experiment(load_config("fig2"), out_dir=tmp_path)
    g = {k: res.diagnostics["series"][k]["gaussianity"]["5"] for k in ("AmpLasso", "ISTA")}
    amp_pass = sum(e["passed"] for e in g["AmpLasso"])
    ista_fail = sum(not e["passed"] for e in g["ISTA"])
    ok = len(g["AmpLasso"]) == 10 and amp_pass >= 9 and ista_fail >= 9
    assert acceptance(2, ok, f"AMP passes KS in {amp_pass}/10, ISTA fails in {ista_fail}/10")


# ----------------------------------------------------------------------- 3 ---


@pytest.fixture(scope="module")
def qpsk_run():
    raw = _raw("fig5")
    raw["cases"] = [c for c in raw["cases"] if c["label"] in ("alpha=1", "alpha=4")]
    raw["snr_db"] = [8, 12]
    return run_experiment(_config(raw), write=False)


@pytest.fixture(scope="module")
def bg_run():
    raw = _raw("fig6")
    raw["cases"] = [c for c in raw["cases"] if c["label"] == "alpha=0.5"]
    raw["snr_db"] = 20
    return run_experiment(_config(raw), write=False)


def _se_gap(res, prefix):
    emp = res.traces[prefix + "BayesAmp"]
    se = res.se[prefix + "SE-BayesAmp"]
    return float(np.nanmax(np.abs(emp - se))) if np.all(np.isfinite(emp)) else np.inf


@pytest.mark.parametrize("alpha,snr", [(1, 8), (1, 12), (4, 8), (4, 12)])
def test_criterion_03_qpsk_tracks_state_evolution(qpsk_run, acceptance, alpha, snr):
    gap = _se_gap(qpsk_run, f"alpha={alpha}/snr={snr}/")
    assert acceptance(3, gap <= 0.5, f"QPSK alpha={alpha} SNR={snr} dB max gap {gap:.3f} dB")


def test_criterion_03_bg_tracks_state_evolution(bg_run, acceptance):
    gap = _se_gap(bg_run, "alpha=0.5/")
    assert acceptance(3, gap <= 0.5, f"BG alpha=0.5 SNR=20 dB max gap {gap:.3f} dB")


def test_criterion_03_common_fixed_point(qpsk_run, acceptance):
    se1 = qpsk_run.se["alpha=1/snr=12/SE-BayesAmp"][-1]
    se4 = qpsk_run.se["alpha=4/snr=12/SE-BayesAmp"][-1]
    diff = abs(se1 - se4)
    assert acceptance(3, diff <= 0.2, f"SE fixed points at 12 dB differ by {diff:.3f} dB")


# ----------------------------------------------------------------------- 4 ---


@pytest.fixture(scope="module")
def conditioned_run():
    return run_experiment(load_config("fig7"), write=False)


def test_criterion_04_oamp_robustness(conditioned_run, acceptance):
    res = conditioned_run
    series = res.diagnostics["series"]
    amp_bad = series["kappa=100/AMP"]["status"].get("Diverged", 0) == 100 or (
        np.all(np.isfinite(res.traces["kappa=100/AMP"])) and res.traces["kappa=100/AMP"][-1] >= 0
    )
    oamp_ok = "Diverged" not in series["kappa=100/OAMP"]["status"]
    gap = float(np.max(np.abs(res.traces["kappa=100/OAMP"] - res.se["kappa=100/SE-OAMP"])))
    fp = abs(res.traces["kappa=1/AMP"][-1] - res.traces["kappa=1/OAMP"][-1])
    ok = amp_bad and oamp_ok and gap <= 0.5 and fp <= 0.2
    detail = (
        f"kappa=100 AMP status {series['kappa=100/AMP']['status']}, OAMP-SE max gap {gap:.3f} dB; "
        f"kappa=1 AMP/OAMP fixed points differ by {fp:.3f} dB"
    )
    assert acceptance(4, ok, detail)


# ----------------------------------------------------------------------- 5 ---


@pytest.mark.parametrize("matrix", [IidGaussian(512, 1024), Conditioned(512, 1024, 100.0)], ids=["iid", "kappa100"])
def test_criterion_05_oamp_vamp_equivalence(matrix, acceptance):
    inst = synthesize(matrix, BernoulliGaussian(0.05), 20, 0)
    dev = equivalence_check(inst, BernoulliGaussian(0.05), 20)
    assert acceptance(5, dev <= 1e-8, f"{type(matrix).__name__} max relative deviation {dev:.2e}")


# ----------------------------------------------------------------------- 6 ---


@pytest.mark.parametrize("algo", ["OAMP", "MAMP"])
@pytest.mark.parametrize("matrix", [IidGaussian(512, 1024), Conditioned(512, 1024, 10.0)], ids=["iid", "kappa10"])
def test_criterion_06_orthogonality(algo, matrix, acceptance):
    prior = BernoulliGaussian(0.1)
    cfg = SolverConfig(algo, max_iters=10, stop_tol=0.0, damping=(0.7, 0.8) if algo == "MAMP" else (1.0, 1.0))
    bound = 3.0 / np.sqrt(1024)
    vals = []
    for seed in range(20):
        inst = synthesize(matrix, prior, 20, seed)
        rows = trace_orthogonality(run_solver(inst, cfg, prior), inst.x, 10)
        vals.extend(abs(v) for row in rows for v in row)
    vals = np.asarray(vals)
    worst = float(vals.max())
    detail = (
        f"{algo} {type(matrix).__name__}: max {worst:.3f} vs bound {bound:.3f}, "
        f"{np.mean(vals > bound):.1%} of {vals.size} products above, rms*sqrt(N) {np.sqrt(np.mean(vals**2)) * 32:.2f}"
    )
    assert acceptance(6, worst <= bound, detail)


# ----------------------------------------------------------------------- 7 ---


def test_criterion_07_divergence_free(acceptance):
    rng = np.random.default_rng(7)
    n = 1024
    worst = 0.0
    for k in range(20):
        prior = BernoulliGaussian(float(rng.uniform(0.02, 0.5))) if k % 2 == 0 else qpsk_real()
        tau2 = float(10 ** rng.uniform(-3, 0))
        x = sample_prior(prior, n, rng)
        r = x + np.sqrt(tau2) * rng.standard_normal(n)
        worst = max(worst, abs(divergence_free_derivative(prior, r, tau2)))
    assert acceptance(7, worst <= 3 / np.sqrt(n), f"max |mean derivative| {worst:.2e} over 20 configurations")


# ----------------------------------------------------------------------- 8 ---


@pytest.fixture(scope="module")
def memory_run():
    return run_experiment(load_config("fig8"), write=False)


def test_criterion_08_memory_amp_fixed_points(memory_run, acceptance):
    res = memory_run
    parts, ok = [], True
    for kappa in (1, 10, 50):
        m, o = res.traces[f"kappa={kappa}/MAMP"], res.traces[f"kappa={kappa}/OAMP"]
        gap = abs(m[-1] - o[-1])
        pm, po = plateau_iteration(m), plateau_iteration(o)
        ok &= gap <= 0.3
        if kappa != 1:
            ok &= pm is not None and po is not None and pm >= po
        parts.append(f"kappa={kappa} gap {gap:.3f} dB, plateau {pm} vs {po}")
    se_gap = abs(res.se["kappa=1/SE-MAMP"][-1] - res.traces["kappa=1/MAMP"][-1])
    ok &= se_gap <= 0.5
    parts.append(f"kappa=1 SE gap {se_gap:.3f} dB")
    assert acceptance(8, bool(ok), "; ".join(parts))


# ----------------------------------------------------------------------- 9 ---


def test_criterion_09_denoiser_oracles(acceptance):
    rng = np.random.default_rng(9)
    r = rng.uniform(-5, 5, 1000)
    tau2 = 10 ** rng.uniform(-3, 0.5, 1000)
    res = bg_mmse(r, tau2, 0.1)
    ref = np.array([bg_oracle(a, b, 0.1) for a, b in zip(r, tau2)])
    bg_err = max(np.max(np.abs(res.mean - ref[:, 0])), np.max(np.abs(res.var - ref[:, 1])))

    prior = Discrete((-1.0, 0.0, 0.5, 2.0), (0.1, 0.4, 0.3, 0.2))
    tau2d = 10 ** rng.uniform(-1, 0.5, 1000)
    res = discrete_mmse(r, tau2d, prior)
    ref = np.array([discrete_oracle(a, b, prior.levels, prior.probs) for a, b in zip(r, tau2d)])
    d_err = max(np.max(np.abs(res.mean - ref[:, 0])), np.max(np.abs(res.var - ref[:, 1])))

    a, b = rng.uniform(-10, 10, (2, 1000))
    g = rng.uniform(0, 5, 1000)
    expansive = int(np.sum(np.abs(soft_threshold(a, g).mean - soft_threshold(b, g).mean) > np.abs(a - b) + 1e-12))

    ok = bg_err <= 1e-8 and d_err <= 1e-8 and expansive == 0
    assert acceptance(9, ok, f"BG max error {bg_err:.1e}, discrete {d_err:.1e}, expansive pairs {expansive}/1000")


# ---------------------------------------------------------------------- 10 ---


def test_criterion_10_general_recursion(acceptance):
    inst = synthesize(IidGaussian(512, 1024), BernoulliGaussian(0.05), 50, 0)
    T = 10
    tr = run_solver(inst, SolverConfig("AmpLasso", max_iters=T, lam=0.05, stop_tol=0.0))
    thresholds = tr.extras["threshold"]

    def f(t, h, x):
        if t == 0:
            return -x, np.zeros_like(x)
        out = soft_threshold(x - h, thresholds[t - 1])
        return out.mean - x, -out.deriv

    def g(t, b, w):
        return b - w, np.ones_like(b)

    gen = run_general_recursion(inst, f, g, T + 1)
    dev = max(float(np.max(np.abs(gen.q[t] + inst.x - tr.estimates[t - 1]))) for t in range(1, T + 1))
    assert acceptance(10, dev <= 1e-10, f"max iterate deviation {dev:.1e} over {T} iterations")


# ---------------------------------------------------------------------- 11 ---


def test_criterion_11_spectral_moments(acceptance):
    worst = 0.0
    for seed in range(100):
        H = gen_iid_gaussian(8, 16, seed)
        a = build_spectral_model(H, 6, "eig").w
        b = build_spectral_model(H, 6, "trace").w
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0))))
    assert acceptance(11, worst <= 1e-9, f"max deviation {worst:.1e} over 100 seeds, t <= 6")
