"""Classical alternating-projection baselines: GS, Fienup, Fienup-SF.

Both iterate between the Fourier-magnitude set {y : |F y| = sqrt(b)} and the
compact-support set {y in C^M : y_n = 0 for n >= N}.  Plain alternating
projections is the Gerchberg-Saxton algorithm, which monotonically
decreases the cost

    cost(x) = min over unit-modulus psi of || diag(sqrt(b)) psi - F_M x ||^2
            = || sqrt(b) - |F_M x| ||^2.

Dykstra's correction with unit step gives Fienup's algorithm.  Fienup-SF
re-expresses the Fienup output through its autocorrelation and factors it,
yielding a minimum-phase estimate with the identical fit (the intensity
model depends on the signal only through its autocorrelation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import MeasurementSet, autocorrelation
from .specfact import SfOptions, kolmogorov_sf

__all__ = ["IterativeOptions", "gs_solve", "fienup_solve", "fienup_sf"]


@dataclass
class IterativeOptions:
    max_iters: int = 1000
    tol: float = 1e-10
    seed: int = 0
    gs_refine_iters: int = 5000   # cap on the GS refinement after Fienup
    sf_l: int | None = None       # transform length for the Fienup-SF step


def _magnitude_project(y: np.ndarray, root_b: np.ndarray) -> np.ndarray:
    """Signal-domain projection onto {y : |F y| = sqrt(b)}."""
    spectrum = np.fft.fft(y)
    mag = np.abs(spectrum)
    phase = np.where(mag > 0, spectrum / np.where(mag == 0, 1, mag), 1.0)
    return np.fft.ifft(root_b * phase)


def _support_project(y: np.ndarray, n: int) -> np.ndarray:
    out = y.copy()
    out[n:] = 0.0
    return out


def _gs_cost(x_sup: np.ndarray, root_b: np.ndarray) -> float:
    return float(np.linalg.norm(root_b - np.abs(np.fft.fft(x_sup))) ** 2)


def _random_start(root_b: np.ndarray, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    phases = np.exp(2j * np.pi * rng.uniform(size=root_b.size))
    return np.fft.ifft(root_b * phases)


def gs_solve(b: MeasurementSet, opts: IterativeOptions | None = None,
             y0: np.ndarray | None = None):
    """Alternating projections from a random-phase start.

    Returns ``(x, cost_history)`` where ``x`` has length N and the history
    holds the cost after every support projection (non-increasing).
    """
    opts = opts or IterativeOptions()
    if b.m < b.n:
        raise ValueError("gs_solve needs m >= n")
    root_b = np.sqrt(np.maximum(np.asarray(b.b, dtype=float), 0.0))
    y = _random_start(root_b, opts.seed) if y0 is None else y0.copy()
    history = []
    for _ in range(opts.max_iters):
        x_sup = _support_project(y, b.n)
        history.append(_gs_cost(x_sup, root_b))
        y = _magnitude_project(x_sup, root_b)
        if len(history) >= 11:
            prev, cur = history[-11], history[-1]
            if prev - cur <= opts.tol * max(prev, 1.0):
                break
    x_sup = _support_project(y, b.n)
    history.append(_gs_cost(x_sup, root_b))
    return x_sup[: b.n], np.asarray(history)


def fienup_solve(b: MeasurementSet, opts: IterativeOptions | None = None):
    """Dykstra-corrected alternating projections, then GS refinement.

    The Dykstra phase runs for ``opts.max_iters`` iterations (the increments
    make the iterates converge toward the intersection of the two sets when
    it is nonempty); the GS phase then polishes until the cost stalls.
    """
    opts = opts or IterativeOptions()
    if b.m < b.n:
        raise ValueError("fienup_solve needs m >= n")
    root_b = np.sqrt(np.maximum(np.asarray(b.b, dtype=float), 0.0))
    y = _random_start(root_b, opts.seed)
    p = np.zeros_like(y)
    q = np.zeros_like(y)
    for _ in range(opts.max_iters):
        w = _magnitude_project(y + p, root_b)
        p = y + p - w
        y = _support_project(w + q, b.n)
        q = w + q - y

    refine = IterativeOptions(max_iters=opts.gs_refine_iters, tol=opts.tol,
                              seed=opts.seed)
    x, _ = gs_solve(b, refine, y0=y)
    return x


def fienup_sf(b: MeasurementSet, opts: IterativeOptions | None = None):
    """Fienup followed by autocorrelation + spectral factorization.

    The output is minimum phase and produces the same intensity model (and
    hence the same fit) as the raw Fienup estimate.
    """
    opts = opts or IterativeOptions()
    x = fienup_solve(b, opts)
    r = autocorrelation(x)
    return kolmogorov_sf(r, SfOptions(l=opts.sf_l))
