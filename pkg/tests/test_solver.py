import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mblab.dispersion import PhaseParams
from mblab.solver import (
    GridSpec, SolverDivergence, SolverParams, SpectralState, diagnostics, discrete_second_iterate,
    duhamel_iterates, gaussian_bump, integrate, l2_norm, linear_propagate, picard_crosscheck,
    relative_drift, rescale_state, scaling_covariance_check, snapshot_rows, step,
)

P1 = PhaseParams(1.0, 0.0)
P2 = PhaseParams(4.0, 3.0)
GRID = GridSpec(64 * np.pi, 256)


def smooth_state(k0=1.0, w=3.0, a=1.0, grid=GRID):
    return SpectralState.from_functions(grid, gaussian_bump(k0, w, a), gaussian_bump(k0 / 2, w, 0.8 * a))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(10.0, 32)
    with pytest.raises(ValueError):
        GridSpec(10.0, 96)
    with pytest.raises(ValueError):
        GridSpec(-1.0, 64)
    k = GridSpec(2 * np.pi, 64).k
    assert k.min() == -32 and k.max() == 31


def test_linear_propagate_identity_phase_and_reversibility():
    s = smooth_state()
    same = linear_propagate(s, P1, P2, 0.0)
    assert np.array_equal(same.u_half, s.u_half) and np.array_equal(same.v_half, s.v_half)
    # single mode
    h = np.zeros(GRID.M // 2 + 1, dtype=complex)
    h[5] = 1.0
    one = SpectralState(GRID, h, h.copy())
    out = linear_propagate(one, P1, P2, 0.37)
    k0 = GRID.kr[5]
    assert out.u_half[5] == pytest.approx(np.exp(1j * k0 ** 3 * 0.37), rel=1e-15)
    assert out.v_half[5] == pytest.approx(np.exp(1j * (4 * k0 ** 3 - 3 * k0) * 0.37), rel=1e-15)
    back = linear_propagate(linear_propagate(s, P1, P2, 0.01), P1, P2, -0.01)
    for a, b in ((back.u_half, s.u_half), (back.v_half, s.v_half)):
        assert np.all(np.abs(a - b) <= 2 * np.spacing(np.abs(b)) + 1e-300)
    assert l2_norm(GRID, out.u_half) == pytest.approx(l2_norm(GRID, one.u_half), rel=1e-15)


def test_step_structure():
    P = SolverParams(P1, P2, 1e-3, 1e-3)
    z = SpectralState(GRID, np.zeros(129, complex), np.zeros(129, complex))
    out = step(z, P)
    assert not np.any(out.u_half) and not np.any(out.v_half)
    # v = 0: u is linear
    s = smooth_state()
    s0 = SpectralState(GRID, s.u_half, np.zeros_like(s.v_half))
    out = step(s0, P)
    lin = linear_propagate(s0, P1, P2, 1e-3)
    assert np.allclose(out.u_half, lin.u_half, rtol=0, atol=1e-16)
    # u = 0, v small: u is sourced at second order
    r = [l2_norm(GRID, step(SpectralState(GRID, 0 * s.u_half, d * s.v_half), P).u_half) for d in (1e-2, 1e-3)]
    assert r[0] / r[1] == pytest.approx(100.0, rel=1e-6)


def test_dealiased_band_and_hermitian():
    P = SolverParams(P1, P2, 1e-3, 0.05)
    traj, _ = integrate(smooth_state(), P, [0.05])
    s = traj[-1]
    assert not np.any(s.u_half[~GRID.band]) and not np.any(s.v_half[~GRID.band])
    full = s.u_hat
    n = GRID.M
    assert np.all(full[n - np.arange(1, n // 2)] == np.conj(full[np.arange(1, n // 2)]))
    u, v = s.fields()
    assert u.dtype == float


def test_divergence_reports_step():
    s = smooth_state()
    s.u_half[3] = np.nan
    with pytest.raises(SolverDivergence) as e:
        step(s, SolverParams(P1, P2, 1e-3, 1e-3), index=7)
    assert e.value.step == 7


def test_stability_guard():
    with pytest.raises(ValueError):
        integrate(smooth_state(a=100.0), SolverParams(P1, P2, 0.25, 1.0))


def test_conservation_over_unit_time():
    P = SolverParams(P1, P2, 1e-3, 1.0)
    _, d = integrate(smooth_state(), P, np.linspace(0, 1, 11))
    assert relative_drift(d.mass_u) <= 1e-12 and relative_drift(d.mass_v) <= 1e-12
    assert relative_drift(d.l2_energy) <= 1e-6
    assert relative_drift(d.hamiltonian) <= 1e-5


def test_drift_order_under_dt_halving():
    drifts = []
    for dt in (1 / 256, 1 / 512):
        _, d = integrate(smooth_state(), SolverParams(P1, P2, dt, 1.0), np.linspace(0, 1, 11))
        drifts.append((relative_drift(d.l2_energy), relative_drift(d.hamiltonian)))
    for j in (0, 1):
        assert math.log2(drifts[0][j] / drifts[1][j]) >= 4.0


def test_conserved_quantities_by_time_differencing():
    # d/dt by centred differences on a fine trajectory: conserved ones vanish
    # to discretisation error, the u-energy alone does not
    P = SolverParams(P1, P2, 1 / 2048, 0.25)
    ts = np.linspace(0, 0.25, 9)
    traj, d = integrate(smooth_state(), P, ts)
    h = ts[1] - ts[0]
    eu = [l2_norm(GRID, s.u_half) ** 2 for s in traj]
    for series in (d.l2_energy, d.hamiltonian, d.mass_u, d.mass_v):
        a = np.asarray(series)
        rate = np.abs(a[2:] - a[:-2]) / (2 * h)
        assert rate.max() <= 1e-9 * max(1.0, np.abs(a).max())
    rate_u = np.abs(np.diff(eu)) / h
    assert rate_u.max() > 1e-3


def test_linear_regime_matches_propagator():
    s = smooth_state()
    a = 1e-8
    small = SpectralState(GRID, a * s.u_half, a * s.v_half)
    P = SolverParams(P1, P2, 1e-3, 1.0)
    out = integrate(small, P, [1.0])[0][-1]
    lin = linear_propagate(small, P1, P2, 1.0)
    assert np.max(np.abs(out.u_half - lin.u_half)) <= 1e-12
    assert np.max(np.abs(out.v_half - lin.v_half)) <= 1e-12


def test_scaling_covariance():
    s = smooth_state(0.3, 6.0)
    assert scaling_covariance_check(s, P2, 1.0, 0.5) <= 1e-12
    assert scaling_covariance_check(s, P2, 2.0, 1.0) <= 1e-6
    lin = SpectralState(GRID, s.u_half, np.zeros_like(s.v_half))
    assert scaling_covariance_check(lin, P2, 2.0, 1.0) <= 1e-10


def test_rescale_guards():
    with pytest.raises(ValueError):
        scaling_covariance_check(smooth_state(), P2, 0.5, 1.0)
    with pytest.raises(ValueError):
        rescale_state(smooth_state(), 2.0, 128)


def test_duhamel_psi2_matches_closed_form_kernel():
    # time quadrature of the Duhamel integral vs the exact-in-time kernel sum
    s = smooth_state()
    for t in (0.1, 0.5):
        _, _, _, psi2 = duhamel_iterates(s.u_half, s.v_half, GRID, P1, P2, t)
        closed = discrete_second_iterate(s.u_half, s.v_half, GRID, P1, P2, t)
        assert np.max(np.abs(psi2 - 1j * closed)) <= 1e-10 * np.max(np.abs(psi2))


def test_picard_crosscheck_slopes():
    r = picard_crosscheck(smooth_state(), SolverParams(P1, P2, 1e-3, 0.5), (1e-1, 1e-2, 1e-3))
    assert r.passed
    assert r.slope_u == pytest.approx(3.0, abs=0.3) and r.slope_v == pytest.approx(3.0, abs=0.3)


def test_picard_crosscheck_zero_delta_and_zero_phi():
    s = smooth_state()
    r = picard_crosscheck(s, SolverParams(P1, P2, 1e-3, 0.2), (0.0, 1e-1, 1e-2, 1e-3))
    assert r.residual_u[0] == 0.0 and r.residual_v[0] == 0.0
    nophi = SpectralState(GRID, np.zeros_like(s.u_half), s.v_half)
    r = picard_crosscheck(nophi, SolverParams(P1, P2, 1e-3, 0.2), (1e-1, 1e-2, 1e-3))
    assert r.psi2_max <= 1e-12
    assert r.slope_v == pytest.approx(3.0, abs=0.3)


def test_snapshot_rows_shapes():
    xs, ks = snapshot_rows(smooth_state())
    assert len(xs) == GRID.M and len(ks) == GRID.M and len(xs[0]) == 3


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 2.0), st.floats(-5, 5))
def test_property_propagator_unitary(beta, dt, seedish):
    rng = np.random.default_rng(int(abs(seedish) * 1000))
    h = (rng.normal(size=129) + 1j * rng.normal(size=129)) * GRID.band
    h[0] = h[0].real
    s = SpectralState(GRID, h, h.copy())
    out = linear_propagate(s, P1, PhaseParams(4.0, beta), dt)
    assert np.allclose(np.abs(out.v_half), np.abs(h), rtol=1e-15, atol=0)
    m = diagnostics(s, SolverParams(P1, PhaseParams(4.0, beta)))
    m2 = diagnostics(out, SolverParams(P1, PhaseParams(4.0, beta)))
    assert m2[0] == pytest.approx(m[0], rel=1e-12, abs=1e-14)
    assert m2[2] == pytest.approx(m[2], rel=1e-12)
