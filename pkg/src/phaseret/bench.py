"""Monte-Carlo experiment runner: optimality gaps, recovery, CRB attainment.

Three experiment kinds:

* ``gap``: random measurement vectors drawn uniformly; every solver's fit is
  compared to the PhaseLift lambda=0 lower bound.
* ``recovery``: random complex-Gaussian signals measured directly and via
  the impulse-augmented minimum-phase arm; records global-phase-aligned
  errors per arm and solver.
* ``crb``: fixed signal, sweeps over measurement count and SNR; records
  normalized MSE against the normalized Cramer-Rao bound.

Trials are deterministic: trial t uses ``SeedSequence([master_seed, t])``,
so runs are reproducible and trivially parallel.  Persistence writes
results.jsonl (one trial per line), summary.json, and plot-ready curves.csv.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import IterativeOptions, fienup_sf, fienup_solve
from .cork import AdmmOptions, solve_cork
from .crb import compute_crb
from .io import atomic_write_text
from .measurement import AugmentationSpec, augment_min_phase, deaugment
from .sdp import SdpOptions, phaselift_sf, phaselift_value
from .signals import (MeasurementSet, default_transform_length,
                      global_phase_distance, intensity_measure)
from .specfact import SfOptions, kolmogorov_sf

__all__ = ["ExperimentConfig", "run_gap_trial", "run_recovery_trial",
           "run_crb_study", "run_experiment", "aggregate_and_persist"]

TIMING_FIELDS = ("times",)  # stripped when comparing runs byte-for-byte


@dataclass
class ExperimentConfig:
    kind: str = "gap"                      # gap | recovery | crb
    n: int = 32
    trials: int = 50
    m_multiplier: float = 4.0              # recovery: M = multiplier * N
    m_range: tuple[float, float] = (2.0, 8.0)   # gap: M ~ U[2N, 8N]
    snr_db: float = 40.0                   # crb: SNR for the M sweep
    snr_sweep: tuple[float, float, int] = (30.0, 60.0, 7)
    m_sweep: tuple[float, float, int] = (2.0, 16.0, 8)
    crb_m_multiplier: float = 8.0          # crb: M for the SNR sweep
    solvers: tuple[str, ...] = ("cork", "phaselift", "phaselift_sf", "fienup")
    master_seed: int = 0
    output_dir: str | None = None
    rank_tol: float = 1e-4
    fit_slack: float = 1e-4
    thresholds: dict = field(default_factory=dict)

    def trial_rng(self, trial_index: int) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence([self.master_seed, trial_index]))

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        kwargs = {}
        for name in cls.__dataclass_fields__:
            if name in obj:
                value = obj[name]
                if isinstance(value, list):
                    value = tuple(value)
                kwargs[name] = value
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**kwargs)


def _fit(x, b: np.ndarray) -> float:
    model = intensity_measure(x, b.size)
    return float(np.linalg.norm(b - model) ** 2)


def run_gap_trial(config: ExperimentConfig, trial_index: int) -> dict:
    """One random least-squares instance; gaps against the SDP lower bound."""
    rng = config.trial_rng(trial_index)
    n = config.n
    lo, hi = config.m_range
    m = int(rng.integers(int(lo * n), int(hi * n) + 1))
    b = rng.uniform(size=m)
    bscale = float(np.linalg.norm(b) ** 2)
    ms = MeasurementSet(b, n)

    result = {"trial": trial_index, "kind": "gap", "n": n, "m": m,
              "b_norm2": bscale, "fits": {}, "gaps": {}, "gaps_rel": {},
              "iters": {}, "times": {}, "errors": {}}

    sdp_opts = SdpOptions(rank_tol=config.rank_tol, fit_slack=config.fit_slack)
    t0 = time.perf_counter()
    _, lower_bound, _ = phaselift_value(ms, 0.0, sdp_opts)
    result["times"]["phaselift"] = time.perf_counter() - t0
    result["fits"]["phaselift"] = lower_bound
    result["lower_bound"] = lower_bound

    def record(name, fit, elapsed, iters=None):
        result["fits"][name] = fit
        result["gaps"][name] = fit - lower_bound
        result["gaps_rel"][name] = (fit - lower_bound) / max(bscale, 1e-300)
        result["times"][name] = elapsed
        if iters is not None:
            result["iters"][name] = iters

    if "cork" in config.solvers:
        try:
            t0 = time.perf_counter()
            r, diag = solve_cork(ms)
            record("cork", diag.fit, time.perf_counter() - t0, diag.iters)
        except Exception as exc:  # noqa: BLE001 - per-solver capture
            result["errors"]["cork"] = str(exc)
    if "phaselift_sf" in config.solvers:
        try:
            t0 = time.perf_counter()
            x, lam, diag = phaselift_sf(ms, sdp_opts)
            record("phaselift_sf", _fit(x, b), time.perf_counter() - t0,
                   diag.solves)
            result["phaselift_sf_eig_ratio"] = diag.eig_ratio
            result["phaselift_sf_lambda"] = lam
            result["phaselift_sf_converged"] = diag.converged
        except Exception as exc:  # noqa: BLE001
            result["errors"]["phaselift_sf"] = str(exc)
    if "fienup" in config.solvers:
        try:
            t0 = time.perf_counter()
            x = fienup_solve(ms, IterativeOptions(seed=trial_index))
            record("fienup", _fit(x, b), time.perf_counter() - t0)
        except Exception as exc:  # noqa: BLE001
            result["errors"]["fienup"] = str(exc)
    return result


def run_recovery_trial(config: ExperimentConfig, trial_index: int) -> dict:
    """Direct vs minimum-phase measurement arms on one random signal."""
    rng = config.trial_rng(trial_index)
    n = config.n
    s = (rng.normal(size=n) + 1j * rng.normal(size=n)) / np.sqrt(2)
    s_energy = float(np.linalg.norm(s) ** 2)
    delta = 3.0 * n  # unit-variance heuristic impulse
    spec = AugmentationSpec(delta)
    smin = augment_min_phase(s, spec)
    m = int(config.m_multiplier * smin.size)
    l = default_transform_length(smin.size)

    result = {"trial": trial_index, "kind": "recovery", "n": n, "m": m,
              "delta": delta, "s_energy": s_energy,
              "errors_rel": {}, "fits_rel": {}, "times": {}, "errors": {}}

    # minimum-phase arm
    b_min = MeasurementSet(intensity_measure(smin, m), smin.size,
                           augmentation=spec)
    bscale = float(np.linalg.norm(b_min.b) ** 2)
    if "cork" in config.solvers:
        try:
            t0 = time.perf_counter()
            r, diag = solve_cork(b_min, AdmmOptions(l=l))
            xhat = kolmogorov_sf(r, SfOptions(l=l))
            shat = deaugment(xhat, spec)
            result["times"]["cork_minphase"] = time.perf_counter() - t0
            result["errors_rel"]["cork_minphase"] = \
                global_phase_distance(s, shat) / s_energy
            result["fits_rel"]["cork_minphase"] = diag.fit / bscale
        except Exception as exc:  # noqa: BLE001
            result["errors"]["cork_minphase"] = str(exc)
    if "fienup" in config.solvers:
        try:
            t0 = time.perf_counter()
            xhat = fienup_sf(b_min, IterativeOptions(seed=trial_index, sf_l=l))
            shat = deaugment(xhat, spec)
            result["times"]["fienup_sf_minphase"] = time.perf_counter() - t0
            result["errors_rel"]["fienup_sf_minphase"] = \
                global_phase_distance(s, shat) / s_energy
            result["fits_rel"]["fienup_sf_minphase"] = _fit(xhat, b_min.b) / bscale
        except Exception as exc:  # noqa: BLE001
            result["errors"]["fienup_sf_minphase"] = str(exc)

    # direct arm: same solver stack without augmentation
    m_direct = int(config.m_multiplier * n)
    b_dir = MeasurementSet(intensity_measure(s, m_direct), n)
    bscale_dir = float(np.linalg.norm(b_dir.b) ** 2)
    if "cork" in config.solvers:
        try:
            t0 = time.perf_counter()
            l_dir = default_transform_length(n)
            r, diag = solve_cork(b_dir, AdmmOptions(l=l_dir))
            shat = kolmogorov_sf(r, SfOptions(l=l_dir))
            result["times"]["cork_direct"] = time.perf_counter() - t0
            result["errors_rel"]["cork_direct"] = \
                global_phase_distance(s, shat) / s_energy
            result["fits_rel"]["cork_direct"] = diag.fit / bscale_dir
        except Exception as exc:  # noqa: BLE001
            result["errors"]["cork_direct"] = str(exc)
    return result


def _recover_min_phase(b: MeasurementSet, spec: AugmentationSpec, l: int):
    r, _ = solve_cork(b, AdmmOptions(l=l))
    xhat = kolmogorov_sf(r, SfOptions(l=l))
    return deaugment(xhat, spec)


def run_crb_study(config: ExperimentConfig) -> list[dict]:
    """Sweep M at fixed SNR and SNR at fixed M; returns per-point rows."""
    rng = config.trial_rng(2**31 - 1)  # signal draw index, outside trial range
    n = config.n
    s = (rng.normal(size=n) + 1j * rng.normal(size=n)) / np.sqrt(2)
    s_energy = float(np.linalg.norm(s) ** 2)
    spec = AugmentationSpec(3.0 * n)
    smin = augment_min_phase(s, spec)
    l = default_transform_length(smin.size)

    def point(m: int, snr_db: float, series: str, x_value: float) -> dict:
        b_clean = intensity_measure(smin, m)
        power = float(np.linalg.norm(b_clean) ** 2)
        sigma2 = power / (m * 10.0 ** (snr_db / 10.0))
        crb = compute_crb(smin, m, sigma2)
        errors = []
        t0 = time.perf_counter()
        for t in range(config.trials):
            trial_rng = config.trial_rng(t)
            noisy = b_clean + trial_rng.normal(scale=np.sqrt(sigma2), size=m)
            ms = MeasurementSet(noisy, smin.size, sigma2=sigma2,
                                augmentation=spec)
            shat = _recover_min_phase(ms, spec, l)
            errors.append(float(np.linalg.norm(s - shat) ** 2))
        elapsed = time.perf_counter() - t0
        mse = float(np.mean(errors))
        return {"kind": "crb", "series": series, "x": x_value, "m": m,
                "snr_db": snr_db, "sigma2": sigma2,
                "mse_norm": mse / s_energy, "crb_norm": crb / s_energy,
                "mse_over_crb": mse / crb, "trials": config.trials,
                "times": {"sweep_point": elapsed}}

    rows = []
    lo, hi, count = config.m_sweep
    for mult in np.linspace(lo, hi, int(count)):
        rows.append(point(int(mult * smin.size), config.snr_db, "m_sweep",
                          float(mult)))
    lo, hi, count = config.snr_sweep
    for snr in np.linspace(lo, hi, int(count)):
        rows.append(point(int(config.crb_m_multiplier * smin.size),
                          float(snr), "snr_sweep", float(snr)))
    return rows


def run_experiment(config: ExperimentConfig) -> list[dict]:
    if config.kind == "gap":
        return [run_gap_trial(config, t) for t in range(config.trials)]
    if config.kind == "recovery":
        return [run_recovery_trial(config, t) for t in range(config.trials)]
    if config.kind == "crb":
        return run_crb_study(config)
    raise ValueError(f"unknown experiment kind: {config.kind!r}")


def _strip_timing(row: dict) -> dict:
    return {k: v for k, v in row.items() if k not in TIMING_FIELDS}


def _quantiles(values) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"median": float(np.median(arr)),
            "q25": float(np.quantile(arr, 0.25)),
            "q75": float(np.quantile(arr, 0.75)),
            "min": float(arr.min()), "max": float(arr.max()),
            "mean": float(arr.mean()), "count": int(arr.size)}


def summarize(results: list[dict]) -> dict:
    """Medians/quantiles of every numeric per-trial metric."""
    if not results:
        raise ValueError("need at least one result")
    summary: dict = {"trials": len(results)}
    kind = results[0].get("kind")
    summary["kind"] = kind
    numeric: dict[str, list[float]] = {}
    for row in results:
        for key, value in _strip_timing(row).items():
            if isinstance(value, dict):
                for sub, v in value.items():
                    if isinstance(v, (int, float)) and not isinstance(v, bool):
                        numeric.setdefault(f"{key}.{sub}", []).append(float(v))
            elif isinstance(value, (int, float)) and not isinstance(value, bool):
                numeric.setdefault(key, []).append(float(value))
    summary["metrics"] = {k: _quantiles(v) for k, v in sorted(numeric.items())}
    return summary


def _curves_rows(results: list[dict]) -> list[tuple]:
    rows = []
    for row in results:
        if row.get("kind") == "crb":
            rows.append((row["x"], row["mse_norm"], f"{row['series']}:mse"))
            rows.append((row["x"], row["crb_norm"], f"{row['series']}:crb"))
        elif row.get("kind") == "gap":
            for solver, gap in row.get("gaps", {}).items():
                rows.append((row["trial"], gap, f"gap:{solver}"))
        elif row.get("kind") == "recovery":
            for arm, err in row.get("errors_rel", {}).items():
                rows.append((row["trial"], err, f"error:{arm}"))
    return rows


def aggregate_and_persist(results: list[dict], output_dir: str) -> dict:
    """Write results.jsonl, summary.json, and curves.csv; returns paths."""
    if not results:
        raise ValueError("need at least one result")
    os.makedirs(output_dir, exist_ok=True)
    paths = {
        "results": os.path.join(output_dir, "results.jsonl"),
        "summary": os.path.join(output_dir, "summary.json"),
        "curves": os.path.join(output_dir, "curves.csv"),
    }
    try:
        lines = [json.dumps(row, sort_keys=True) for row in results]
        atomic_write_text(paths["results"], "\n".join(lines) + "\n")
        atomic_write_text(paths["summary"],
                          json.dumps(summarize(results), indent=2, sort_keys=True) + "\n")
        buf = _io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["x", "y", "series"])
        writer.writerows(_curves_rows(results))
        atomic_write_text(paths["curves"], buf.getvalue())
    except OSError as exc:
        raise OSError(f"failed writing report under {output_dir}: {exc}") from exc
    return paths


def check_thresholds(config: ExperimentConfig, results: list[dict]) -> list[str]:
    """Evaluate optional pass/fail thresholds; returns failure messages."""
    failures = []
    th = config.thresholds or {}
    if "cork_gap_rel_max" in th:
        gaps = [r["gaps_rel"]["cork"] for r in results if "cork" in r.get("gaps_rel", {})]
        worst = max(gaps) if gaps else float("inf")
        if worst > th["cork_gap_rel_max"]:
            failures.append(
                f"cork relative gap {worst:.3g} > {th['cork_gap_rel_max']:.3g}")
    if "minphase_err_rel_max" in th:
        errs = [r["errors_rel"].get("cork_minphase") for r in results
                if r.get("errors_rel", {}).get("cork_minphase") is not None]
        worst = max(errs) if errs else float("inf")
        if worst > th["minphase_err_rel_max"]:
            failures.append(
                f"min-phase arm error {worst:.3g} > {th['minphase_err_rel_max']:.3g}")
    if "mse_over_crb_max" in th:
        ratios = [r["mse_over_crb"] for r in results if "mse_over_crb" in r]
        worst = max(ratios) if ratios else float("inf")
        if worst > th["mse_over_crb_max"]:
            failures.append(
                f"MSE/CRB {worst:.3g} > {th['mse_over_crb_max']:.3g}")
    return failures
