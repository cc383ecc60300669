import numpy as np
import pytest

from phaseret.cork import (AdmmOptions, admm_iterate, solve_cork,
                           _Constants, _initial_state)
from phaseret.signals import (MeasurementSet, autocorrelation,
                              correlation_psd_check,
                              default_transform_length, doubled_lags,
                              intensity_measure)


def make_instance(seed, n, m_mult=4):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    return x, MeasurementSet(intensity_measure(x, m_mult * n), n)


def test_noiseless_fit_reaches_zero():
    x, ms = make_instance(0, 16)
    r, diag = solve_cork(ms)
    assert diag.converged
    assert diag.fit <= 1e-12 * np.dot(ms.b, ms.b)
    want = autocorrelation(x)
    assert np.abs(r - want).max() <= 1e-6 * want[0].real


def test_scalar_instance():
    # N = 1: b is flat at |x0|^2, solution r = [|x0|^2]
    r, diag = solve_cork(MeasurementSet(np.full(4, 9.0), 1))
    assert r[0] == pytest.approx(9.0, abs=1e-10)
    assert diag.fit <= 1e-18


def test_single_iterate_matches_hand_computation():
    # N = 1, M = 2, L = 64: recompute one ADMM sweep with explicit matrices.
    b = np.array([2.0, 1.0])
    n, m = 1, 2
    l = default_transform_length(n)
    rho = m / l
    cons = _Constants(b, n, l, rho, False)
    state = _initial_state(cons)
    z0, u0 = state.z.copy(), state.u.copy()
    state = admm_iterate(state, cons)

    fl = np.exp(-2j * np.pi * np.outer(np.arange(l), np.arange(n)) / l)
    fm = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(n)) / m)
    itil = np.diag(doubled_lags(np.ones(n)))
    r_want = (fm.conj().T @ b + rho * fl.conj().T @ (z0 - u0)) / (m + rho * l)
    spec = (fl @ (itil @ r_want)).real
    z_want = np.maximum(0.0, spec + u0)
    u_want = u0 + spec - z_want

    assert np.abs(state.r - r_want).max() <= 1e-12
    assert np.abs(state.z - z_want).max() <= 1e-12
    assert np.abs(state.u - u_want).max() <= 1e-12


def test_least_squares_initialization_solves_noiseless():
    # for M >= 2N the first iterate is already the unconstrained optimum,
    # so a realizable b converges essentially immediately
    _, ms = make_instance(1, 8, m_mult=2)
    _, diag = solve_cork(ms)
    assert diag.iters <= 3


@pytest.mark.parametrize("seed", range(4))
def test_feasibility_at_exit(seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0.0, 1.0, size=64)  # generic b: no exact factorization
    r, diag = solve_cork(MeasurementSet(b, 16))
    min_val, _, _ = correlation_psd_check(r, diag.l)
    assert min_val >= -1e-8 * max(r[0].real, 1.0)


def test_fit_optimality_against_random_candidates():
    # the returned fit must beat the fit of any random candidate signal
    rng = np.random.default_rng(5)
    b = rng.uniform(0.0, 1.0, size=48)
    _, diag = solve_cork(MeasurementSet(b, 12))
    for _ in range(50):
        x = rng.normal(size=12) + 1j * rng.normal(size=12)
        x *= np.sqrt(b.sum() / 48) / np.linalg.norm(x)
        d = b - intensity_measure(x, 48)
        assert diag.fit <= np.dot(d, d) + 1e-9 * np.dot(b, b)


def test_scale_equivariance():
    _, ms = make_instance(6, 10)
    r1, _ = solve_cork(ms)
    r2, _ = solve_cork(MeasurementSet(4.0 * ms.b, 10))
    assert np.abs(r2 - 4.0 * r1).max() <= 1e-6 * r2[0].real


def test_real_mode_returns_real_correlation():
    rng = np.random.default_rng(7)
    x = rng.normal(size=9)
    ms = MeasurementSet(intensity_measure(x, 36), 9, real_signal=True)
    r, _ = solve_cork(ms, AdmmOptions(real_signal=True))
    assert np.abs(r.imag).max() == 0.0
    want = autocorrelation(x).real
    assert np.abs(r.real - want).max() <= 1e-6 * want[0]


def test_underdetermined_cg_path():
    # M < 2N exercises the conjugate-gradient solve for the r-update
    x, ms = make_instance(8, 12, m_mult=1)
    assert ms.m == 12 < 24
    r, diag = solve_cork(ms)
    assert diag.underdetermined
    assert diag.fit <= 1e-8 * np.dot(ms.b, ms.b)


def test_residual_history_and_iters_to():
    rng = np.random.default_rng(9)
    b = rng.uniform(0.0, 1.0, size=64)
    _, diag = solve_cork(MeasurementSet(b, 16))
    k = diag.iters_to(1e-4)
    assert k is not None and 1 <= k <= diag.iters
    primal, dual, scale = diag.residual_history[k - 1]
    thresh = 1e-10 * np.sqrt(diag.l) + 1e-4 * scale
    assert primal <= thresh and dual <= thresh


def test_rejects_bad_transform_length():
    with pytest.raises(ValueError):
        solve_cork(MeasurementSet(np.ones(8), 2), AdmmOptions(l=100))
    with pytest.raises(ValueError):
        solve_cork(MeasurementSet(np.ones(8), 2), AdmmOptions(l=2))
