"""Config-driven experiment runs.

An experiment is a JSON document describing a matrix ensemble, a signal
law, one or more SNRs, a list of solvers and a trial count. Each trial
``t`` synthesizes its instance from ``master_seed + t``; per-iteration NMSE
curves are averaged over trials (in dB by default) and written as CSV,
together with the matching state-evolution curves and a JSON digest of
per-trial diagnostics.

An optional ``cases`` list runs several variants in one file: each entry
overrides ``matrix``, ``snr_db`` and/or ``solvers`` and carries a ``label``
that prefixes its columns.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .diag import gaussianity, plateau_iteration, trace_orthogonality
from .exceptions import ConfigError, InvalidArgumentError
from .model import (
    BernoulliGaussian,
    Conditioned,
    Discrete,
    IidGaussian,
    LaplaceLasso,
    MatrixSpec,
    PriorSpec,
    qpsk_real,
    snr_to_noise_var,
    synthesize,
)
from .se import amp_lasso_se, amp_se, mamp_se, oamp_se
from .solve import SolverConfig, Status, needs_prior, run_solver
from .spectral import build_spectral_model

__all__ = [
    "ENV_OUT_DIR",
    "EMIT_TARGETS",
    "Case",
    "ExperimentConfig",
    "ExperimentResult",
    "parse_config",
    "check_config",
    "load_config",
    "list_experiments",
    "bundled_config_path",
    "average_curves",
    "run_experiment",
    "write_csv",
]

ENV_OUT_DIR = "AMPKIT_OUT_DIR"
DEFAULT_OUT_DIR = "ampkit_out"
EMIT_TARGETS = ("trace_csv", "se_csv", "diag_json")

_TOP_KEYS = {
    "name", "description", "matrix", "prior", "signal", "snr_db", "complex_baseband", "solvers",
    "trials", "master_seed", "emit", "cases", "diagnostics", "se",
}
_SOLVER_KEYS = {"algorithm", "max_iters", "step_size", "lam", "damping", "stop_tol", "w_choice", "label"}
_CASE_KEYS = {"label", "matrix", "snr_db", "solvers"}
_DIAG_KEYS = {"gaussianity_at", "orthogonality_iters"}
_SE_KEYS = {"enabled", "mc_samples"}


# ----------------------------------------------------------------- config ---


@dataclass(frozen=True)
class Case:
    """One matrix ensemble with its SNR list and solver line-up."""

    label: str
    matrix: MatrixSpec
    snr_db: tuple
    solvers: tuple


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    ``prior`` is what the solvers assume; ``signal`` is the law the ground
    truth is drawn from (equal to ``prior`` unless ``prior`` is the
    :class:`LaplaceLasso` marker, which cannot be sampled).
    """

    name: str
    prior: PriorSpec
    signal: PriorSpec
    cases: tuple
    trials: int
    master_seed: int
    emit: frozenset
    complex_baseband: bool = False
    gaussianity_at: tuple = ()
    orthogonality_iters: int = 0
    se_enabled: bool = True
    se_mc_samples: int = 20_000
    description: str = ""


class _Errors:
    """Collects every violation instead of stopping at the first."""

    def __init__(self):
        self.items: list = []

    def add(self, path: str, msg: str):
        self.items.append(f"{path}: {msg}" if path else msg)


def _unknown(d: dict, allowed: set, path: str, errs: _Errors):
    for key in sorted(set(d) - allowed):
        errs.add(f"{path}.{key}" if path else key, "unknown field")


def _number(d, key, path, errs, *, integer=False, default=None, required=True):
    if key not in d:
        if required and default is None:
            errs.add(f"{path}.{key}", "missing")
        return default
    val = d[key]
    ok = isinstance(val, int) if integer else isinstance(val, (int, float))
    if isinstance(val, bool) or not ok or (not integer and not math.isfinite(val)):
        errs.add(f"{path}.{key}", f"expected {'an integer' if integer else 'a finite number'}, got {val!r}")
        return None
    return val


def _parse_matrix(d, path: str, errs: _Errors) -> Optional[MatrixSpec]:
    if not isinstance(d, dict):
        errs.add(path, "expected an object")
        return None
    kind = d.get("type")
    if kind == "IidGaussian":
        _unknown(d, {"type", "m", "n"}, path, errs)
    elif kind == "Conditioned":
        _unknown(d, {"type", "m", "n", "kappa"}, path, errs)
    else:
        errs.add(f"{path}.type", f"expected 'IidGaussian' or 'Conditioned', got {kind!r}")
        return None
    m = _number(d, "m", path, errs, integer=True)
    n = _number(d, "n", path, errs, integer=True)
    bad = False
    for key, val in (("m", m), ("n", n)):
        if val is not None and val < 1:
            errs.add(f"{path}.{key}", "must be >= 1")
            bad = True
    if kind == "IidGaussian":
        return None if bad or m is None or n is None else IidGaussian(m, n)
    kappa = _number(d, "kappa", path, errs)
    if kappa is not None and kappa < 1:
        errs.add(f"{path}.kappa", "must be >= 1")
        bad = True
    if m is not None and n is not None and m > n:
        errs.add(path, "Conditioned requires m <= n")
        bad = True
    return None if bad or None in (m, n, kappa) else Conditioned(m, n, float(kappa))


def _parse_prior(d, path: str, errs: _Errors) -> Optional[PriorSpec]:
    if not isinstance(d, dict):
        errs.add(path, "expected an object")
        return None
    kind = d.get("type")
    keys = {
        "BernoulliGaussian": {"type", "rho", "mu"},
        "Discrete": {"type", "levels", "probs"},
        "QPSK": {"type"},
        "LaplaceLasso": {"type", "lam"},
    }
    if kind not in keys:
        errs.add(f"{path}.type", f"expected one of {sorted(keys)}, got {kind!r}")
        return None
    _unknown(d, keys[kind], path, errs)
    try:
        if kind == "BernoulliGaussian":
            rho = _number(d, "rho", path, errs)
            mu = _number(d, "mu", path, errs, default=0.0, required=False)
            return None if rho is None or mu is None else BernoulliGaussian(float(rho), float(mu))
        if kind == "Discrete":
            return Discrete(tuple(d.get("levels", ())), tuple(d.get("probs", ())))
        if kind == "QPSK":
            return qpsk_real()
        lam = _number(d, "lam", path, errs)
        return None if lam is None else LaplaceLasso(float(lam))
    except (InvalidArgumentError, TypeError) as exc:
        errs.add(path, str(exc))
        return None


def _parse_snr(val, path: str, errs: _Errors) -> Optional[tuple]:
    vals = val if isinstance(val, list) else [val]
    if not vals:
        errs.add(path, "needs at least one value")
        return None
    out = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            errs.add(path, f"expected finite numbers, got {v!r}")
            return None
        out.append(float(v))
    return tuple(out)


def _parse_solver(d, path: str, errs: _Errors, prior: Optional[PriorSpec]) -> Optional[SolverConfig]:
    if not isinstance(d, dict):
        errs.add(path, "expected an object")
        return None
    _unknown(d, _SOLVER_KEYS, path, errs)
    kw = {k: v for k, v in d.items() if k in _SOLVER_KEYS}
    if "damping" in kw:
        if not isinstance(kw["damping"], list) or len(kw["damping"]) != 2:
            errs.add(f"{path}.damping", "expected [beta1, beta2]")
            return None
        kw["damping"] = tuple(kw["damping"])
    if "lam" not in kw and isinstance(prior, LaplaceLasso):
        kw["lam"] = prior.lam
    try:
        cfg = SolverConfig(**kw)
    except (InvalidArgumentError, TypeError) as exc:
        errs.add(path, str(exc))
        return None
    if needs_prior(cfg.algorithm) and prior is not None and not isinstance(prior, (BernoulliGaussian, Discrete)):
        errs.add(path, f"{cfg.algorithm} is incompatible with a {type(prior).__name__} prior")
        return None
    return cfg


def _parse_solvers(val, path: str, errs: _Errors, prior) -> Optional[tuple]:
    if not isinstance(val, list) or not val:
        errs.add(path, "expected a non-empty list")
        return None
    out = [_parse_solver(s, f"{path}[{i}]", errs, prior) for i, s in enumerate(val)]
    if any(s is None for s in out):
        return None
    names = [s.name for s in out]
    for dup in sorted({n for n in names if names.count(n) > 1}):
        errs.add(path, f"duplicate series name {dup!r}; set distinct labels")
    return tuple(out)


def check_config(raw: dict) -> tuple:
    """Validate a decoded config; return ``(config or None, violations)``."""
    errs = _Errors()
    if not isinstance(raw, dict):
        return None, ["top level: expected an object"]
    _unknown(raw, _TOP_KEYS, "", errs)

    name = raw.get("name")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        errs.add("name", "expected a non-empty string without path separators")

    trials = _number(raw, "trials", "", errs, integer=True)
    if trials is not None and trials < 1:
        errs.add("trials", "violation: trials >= 1")
    seed = _number(raw, "master_seed", "", errs, integer=True, default=0, required=False)
    if seed is not None and seed < 0:
        errs.add("master_seed", "must be >= 0")

    emit = raw.get("emit")
    if not isinstance(emit, list) or not emit:
        errs.add("emit", f"violation: at least one emit target from {list(EMIT_TARGETS)}")
        emit = []
    for e in emit:
        if e not in EMIT_TARGETS:
            errs.add("emit", f"unknown target {e!r}")

    prior = _parse_prior(raw.get("prior"), "prior", errs) if "prior" in raw else None
    if "prior" not in raw:
        errs.add("prior", "missing")
    signal = _parse_prior(raw["signal"], "signal", errs) if "signal" in raw else prior
    if "signal" in raw and isinstance(signal, LaplaceLasso):
        errs.add("signal", "LaplaceLasso carries no sampling law")
    if "signal" not in raw and isinstance(prior, LaplaceLasso):
        errs.add("signal", "required when the prior is LaplaceLasso")

    cb = raw.get("complex_baseband", False)
    if not isinstance(cb, bool):
        errs.add("complex_baseband", "expected true or false")

    base_matrix = _parse_matrix(raw["matrix"], "matrix", errs) if "matrix" in raw else None
    base_snr = _parse_snr(raw["snr_db"], "snr_db", errs) if "snr_db" in raw else None
    base_solvers = _parse_solvers(raw["solvers"], "solvers", errs, prior) if "solvers" in raw else None

    cases = []
    raw_cases = raw.get("cases")
    if raw_cases is None:
        raw_cases = [{}]
    elif not isinstance(raw_cases, list) or not raw_cases:
        errs.add("cases", "expected a non-empty list")
        raw_cases = []
    labels = []
    for i, c in enumerate(raw_cases):
        path = f"cases[{i}]"
        if not isinstance(c, dict):
            errs.add(path, "expected an object")
            continue
        _unknown(c, _CASE_KEYS, path, errs)
        label = c.get("label", "")
        if not isinstance(label, str) or (len(raw_cases) > 1 and not label):
            errs.add(f"{path}.label", "expected a non-empty string")
        labels.append(label)
        matrix = _parse_matrix(c["matrix"], f"{path}.matrix", errs) if "matrix" in c else base_matrix
        snr = _parse_snr(c["snr_db"], f"{path}.snr_db", errs) if "snr_db" in c else base_snr
        solvers = _parse_solvers(c["solvers"], f"{path}.solvers", errs, prior) if "solvers" in c else base_solvers
        for key, val in (("matrix", matrix), ("snr_db", snr), ("solvers", solvers)):
            if val is None and key not in c and key not in raw:
                errs.add(f"{path}.{key}" if "cases" in raw else key, "missing")
        if None not in (matrix, snr, solvers):
            cases.append(Case(label=label if isinstance(label, str) else "", matrix=matrix, snr_db=snr, solvers=solvers))
    for dup in sorted({lb for lb in labels if labels.count(lb) > 1}):
        errs.add("cases", f"duplicate label {dup!r}")

    diag = raw.get("diagnostics", {})
    gauss_at, orth_iters = (), 0
    if not isinstance(diag, dict):
        errs.add("diagnostics", "expected an object")
    else:
        _unknown(diag, _DIAG_KEYS, "diagnostics", errs)
        g = diag.get("gaussianity_at", [])
        if not isinstance(g, list) or any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in g):
            errs.add("diagnostics.gaussianity_at", "expected a list of iterations >= 1")
        else:
            gauss_at = tuple(g)
        o = _number(diag, "orthogonality_iters", "diagnostics", errs, integer=True, default=0, required=False)
        if o is not None and o < 0:
            errs.add("diagnostics.orthogonality_iters", "must be >= 0")
        orth_iters = o or 0

    se = raw.get("se", {})
    se_enabled, mc = True, 20_000
    if not isinstance(se, dict):
        errs.add("se", "expected an object")
    else:
        _unknown(se, _SE_KEYS, "se", errs)
        se_enabled = se.get("enabled", True)
        if not isinstance(se_enabled, bool):
            errs.add("se.enabled", "expected true or false")
        mc = _number(se, "mc_samples", "se", errs, integer=True, default=20_000, required=False)
        if mc is not None and mc < 100:
            errs.add("se.mc_samples", "must be >= 100")

    if errs.items:
        return None, errs.items
    cfg = ExperimentConfig(
        name=name,
        prior=prior,
        signal=signal,
        cases=tuple(cases),
        trials=trials,
        master_seed=seed,
        emit=frozenset(emit),
        complex_baseband=cb,
        gaussianity_at=gauss_at,
        orthogonality_iters=orth_iters,
        se_enabled=se_enabled,
        se_mc_samples=mc,
        description=str(raw.get("description", "")),
    )
    return cfg, []


def parse_config(text: str) -> ExperimentConfig:
    """Decode and validate JSON text.

    Raises
    ------
    ConfigError
        With the JSON line/column on a syntax error, or every field
        violation otherwise.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    cfg, errors = check_config(raw)
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def bundled_config_path(name: str) -> Path:
    """Path of a bundled config, by file name with or without ``.json``."""
    stem = name[:-5] if name.endswith(".json") else name
    path = Path(str(resources.files("ampkit") / "configs" / f"{stem}.json"))
    if not path.is_file():
        raise FileNotFoundError(f"no bundled config named {name!r}")
    return path


def load_config(path) -> ExperimentConfig:
    """Read a config from ``path``, falling back to the bundled configs by name."""
    p = Path(path)
    if not p.is_file():
        try:
            p = bundled_config_path(str(path))
        except FileNotFoundError:
            raise FileNotFoundError(f"config file not found: {path}") from None
    return parse_config(p.read_text())


def list_experiments() -> list:
    """``(name, description)`` of every bundled config, sorted by name."""
    root = resources.files("ampkit") / "configs"
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            raw = json.loads(entry.read_text())
            out.append((entry.name[:-5], raw.get("description", "")))
    return out


# -------------------------------------------------------------- averaging ---


def _pad_curve(curve, status: Status, length: int) -> np.ndarray:
    """Extend a per-trial curve to ``length``.

    A diverged trial is padded with NaN; a trial that stopped early holds
    its last value (it sits at its fixed point).
    """
    c = np.asarray(curve, dtype=float)
    if c.size >= length:
        return c[:length]
    fill = np.nan if status == Status.DIVERGED or c.size == 0 else c[-1]
    return np.concatenate([c, np.full(length - c.size, fill)])


def average_curves(curves, linear: bool = False) -> np.ndarray:
    """Average equal-length dB curves over trials.

    Iterations where any trial is missing (diverged) average to NaN. With
    ``linear`` the mean is taken over NMSE values and converted back to dB.
    """
    arr = np.atleast_2d(np.asarray(curves, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        if linear:
            out = 10.0 * np.log10(np.mean(10.0 ** (arr / 10.0), axis=0))
        else:
            out = np.mean(arr, axis=0)
    out[np.any(np.isnan(arr), axis=0)] = np.nan
    return out


# ---------------------------------------------------------------- output ---


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6f}"


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns: dict):
    """Write ``{name: curve}`` as ``iter,<names>`` with 6-decimal dB values.

    Shorter or NaN entries become empty fields.
    """
    names = list(columns)
    length = max((len(c) for c in columns.values()), default=0)
    lines = [",".join(["iter"] + names)]
    for i in range(length):
        row = [str(i + 1)]
        for n in names:
            c = columns[n]
            row.append(_fmt(float(c[i])) if i < len(c) else "")
        lines.append(",".join(row))
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ------------------------------------------------------------------- run ---


@dataclass
class ExperimentResult:
    """Averaged curves, per-series diagnostics and written files."""

    traces: dict = field(default_factory=dict)
    se: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def summary_lines(self) -> list:
        out = []
        for name, d in self.diagnostics.get("series", {}).items():
            status = ", ".join(f"{k} {v}" for k, v in sorted(d["status"].items()))
            final = d["final_nmse_db"]
            tail = "n/a" if final is None else f"{final:.3f} dB"
            out.append(f"{name}: final {tail}; plateau {d['plateau_iteration']}; status {status}")
        return out


def _prefix(cfg: ExperimentConfig, case: Case, snr: float) -> str:
    parts = []
    if len(cfg.cases) > 1 or case.label:
        parts.append(case.label)
    if len(case.snr_db) > 1:
        parts.append(f"snr={snr:g}")
    return "/".join(parts) + "/" if parts else ""


def _se_curve(cfg: ExperimentConfig, solver: SolverConfig, alpha: float, sigma_w2: float, H) -> Optional[np.ndarray]:
    sig = cfg.signal
    T = solver.max_iters
    alg = solver.algorithm
    if alg == "AmpLasso":
        return amp_lasso_se(sig, sigma_w2, alpha, solver.lam, T).nmse_db
    if alg == "BayesAmp":
        return amp_se(sig, sigma_w2, alpha, T).nmse_db
    if alg == "VAMP" or (alg == "OAMP" and solver.w_choice == "LMMSE"):
        return oamp_se(sig, sigma_w2, build_spectral_model(H, 0), T).nmse_db
    if alg == "MAMP":
        spectral = build_spectral_model(H, 2 * T)
        tr = mamp_se(sig, sigma_w2, spectral, T, mc_samples=cfg.se_mc_samples, damping=solver.damping, seed=cfg.master_seed)
        return tr.nmse_db
    return None


def run_experiment(
    cfg: ExperimentConfig,
    out_dir=None,
    linear_average: bool = False,
    trials: Optional[int] = None,
    master_seed: Optional[int] = None,
    write: bool = True,
) -> ExperimentResult:
    """Run every case, SNR, trial and solver of ``cfg``.

    ``trials`` and ``master_seed`` override the config. Output files go to
    ``out_dir``, else ``$AMPKIT_OUT_DIR``, else ``./ampkit_out``; they are
    named ``<name>_trace.csv``, ``<name>_se.csv`` and ``<name>_diag.json``.
    A diverged solver is recorded, never fatal.
    """
    n_trials = cfg.trials if trials is None else int(trials)
    seed0 = cfg.master_seed if master_seed is None else int(master_seed)
    if n_trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    bayes_prior = cfg.prior if isinstance(cfg.prior, (BernoulliGaussian, Discrete)) else None
    result = ExperimentResult()
    series_diag = {}

    for case in cfg.cases:
        mamp_depth = max((2 * s.max_iters for s in case.solvers if s.algorithm == "MAMP"), default=None)
        for snr in case.snr_db:
            pre = _prefix(cfg, case, snr)
            curves = {s.name: [] for s in case.solvers}
            diag = {s.name: {"status": Counter(), "warnings": 0, "gaussianity": {}, "orthogonality_max": []} for s in case.solvers}
            first_H = None
            for t in range(n_trials):
                inst = synthesize(case.matrix, cfg.signal, snr, seed0 + t, cfg.complex_baseband)
                if first_H is None:
                    first_H = np.array(inst.H)
                spectral = build_spectral_model(inst.H, mamp_depth) if mamp_depth is not None else None
                for s in case.solvers:
                    tr = run_solver(inst, s, bayes_prior, spectral)
                    curves[s.name].append(_pad_curve(tr.nmse_db, tr.status, s.max_iters))
                    d = diag[s.name]
                    d["status"][tr.status.value] += 1
                    d["warnings"] += len(tr.warnings)
                    for it in cfg.gaussianity_at:
                        if it <= len(tr) and tr.inputs[it - 1] is not None and np.all(np.isfinite(tr.inputs[it - 1])):
                            rep = gaussianity(tr.inputs[it - 1] - inst.x)
                            entry = {"ks_statistic": rep.ks_statistic, "ks_critical_1pct": rep.ks_critical_1pct, "passed": rep.passed}
                            if t == 0:
                                entry["qq_points"] = rep.qq_points
                            d["gaussianity"].setdefault(str(it), []).append(entry)
                    if cfg.orthogonality_iters and s.algorithm in ("OAMP", "MAMP"):
                        rows = trace_orthogonality(tr, inst.x, cfg.orthogonality_iters)
                        d["orthogonality_max"].append([max(abs(v) for v in row) for row in rows])
            sigma_w2 = snr_to_noise_var(snr, cfg.complex_baseband)
            alpha = case.matrix.m / case.matrix.n
            for s in case.solvers:
                key = pre + s.name
                avg = average_curves(curves[s.name], linear=linear_average)
                result.traces[key] = avg
                d = diag[s.name]
                finite = avg[np.isfinite(avg)]
                d["final_nmse_db"] = float(avg[-1]) if np.isfinite(avg[-1]) else None
                d["best_nmse_db"] = float(finite.min()) if finite.size else None
                d["plateau_iteration"] = plateau_iteration(avg)
                d["status"] = dict(d["status"])
                series_diag[key] = d
                if cfg.se_enabled:
                    se = _se_curve(cfg, s, alpha, sigma_w2, first_H)
                    if se is not None:
                        result.se[pre + "SE-" + s.name] = np.asarray(se, dtype=float)

    result.diagnostics = {
        "name": cfg.name,
        "trials": n_trials,
        "master_seed": seed0,
        "averaging": "linear" if linear_average else "dB",
        "series": series_diag,
    }
    if write:
        out = Path(out_dir or os.environ.get(ENV_OUT_DIR) or DEFAULT_OUT_DIR)
        if "trace_csv" in cfg.emit:
            p = out / f"{cfg.name}_trace.csv"
            write_csv(p, result.traces)
            result.files.append(p)
        if "se_csv" in cfg.emit and result.se:
            p = out / f"{cfg.name}_se.csv"
            write_csv(p, result.se)
            result.files.append(p)
        if "diag_json" in cfg.emit:
            p = out / f"{cfg.name}_diag.json"
            _atomic_write(p, json.dumps(_jsonable(result.diagnostics), indent=2, sort_keys=True) + "\n")
            result.files.append(p)
    return result
