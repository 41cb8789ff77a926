import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mblab.dispersion import FreqTriple, PhaseParams, g1, g1_factored, m_alpha
from mblab.frozen import ALPHA1_RATIO_RANGE, PROBE_SLOPE_BETA3
from mblab.resonance import (
    ConvolutionProbeSpec, RegionSpec, SlotFunction, alpha1_ratio, alpha1_ratio_check,
    extremizer_probe, g1_magnitude_check, g1_ratio_range, phase_sum, strip_measure_beta0,
    trichotomy_scan, weighted_convolution_ratio,
)

N12 = 2.0 ** 12


def test_region_validation():
    with pytest.raises(ValueError):
        RegionSpec(5.0)
    with pytest.raises(ValueError):
        RegionSpec(100.0, eta1_band=(2.0, 1.0))
    with pytest.raises(ValueError):
        RegionSpec(100.0, sample_counts=(8, 64))
    with pytest.raises(ValueError):
        trichotomy_scan(PhaseParams(3.0, 1.0), RegionSpec(100.0))


def test_negative_beta_minimum_is_analytic():
    for beta in (-3.0, -0.75):
        r = trichotomy_scan(PhaseParams(4.0, beta), RegionSpec(N12))
        exact = 1 + 3 * (-beta / 3) * N12
        assert r.min_bracket_G >= exact * (1 - 1e-12)
        assert r.min_bracket_G <= exact * 1.02


def test_zero_beta_measure_matches_strip():
    r = trichotomy_scan(PhaseParams(4.0, 0.0), RegionSpec(N12), [2.0, 10.0, 100.0])
    for K, m in r.measure_below.items():
        exact = strip_measure_beta0(N12, K)
        assert 0.5 <= m / exact <= 2.0
        # cell counting converges at this resolution
        assert m == pytest.approx(exact, rel=2e-2)
    # order of magnitude N sqrt(K/(3N))
    assert r.measure_below[10.0] == pytest.approx(N12 * math.sqrt(10 / (3 * N12)), rel=1.0)


def test_positive_beta_factors_never_both_small():
    r = trichotomy_scan(PhaseParams(4.0, 3.0), RegionSpec(N12, eta2_band=(-4.0, 4.0)))
    assert r.both_factors_small == 0


def test_measures_monotone_in_K_and_in_negative_beta():
    Ks = [2.0, 5.0, 1e4, 3e4, 1e5]
    prev = None
    for beta in (-0.03, -0.3, -3.0):
        r = trichotomy_scan(PhaseParams(4.0, beta), RegionSpec(256.0, sample_counts=(256, 1025)), Ks)
        vals = [r.measure_below[k] for k in Ks]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        if prev is not None:
            assert all(a <= b for a, b in zip(vals, prev))
        prev = vals


def test_g1_example_alpha8():
    p = PhaseParams(8.0, 1.0)
    M = 1e4
    t = FreqTriple(M, -M / 2)
    e1, e3 = M, t.eta3
    closed = -3 * p.alpha * e3 * ((e1 + e3 / 2) ** 2 + m_alpha(8) * e3 ** 2) + p.beta * e3
    assert g1(p, t) == pytest.approx(closed, rel=1e-12)
    comp = abs(e3) * (e1 ** 2 + t.eta2 ** 2 + e3 ** 2)
    ratio = abs(closed) / comp
    assert 0 < ratio < math.inf
    assert abs(p.beta * e3) / abs(closed) <= 1e-7


@pytest.mark.parametrize("alpha", [8.0, -2.0, 4.5, -0.3])
def test_g1_magnitude_ranges(alpha):
    p = PhaseParams(alpha, 0.7)
    lo, hi = g1_magnitude_check(p, 10_000, seed=1)
    elo, ehi = g1_ratio_range(alpha)
    # beta shifts the ratio by at most |beta|/sum eta^2 <= |beta| 1e-4
    slack = abs(p.beta) * 1e-4
    assert elo - slack <= lo and hi <= ehi + slack
    # the coarser published window, with |alpha|
    a = abs(alpha)
    assert min(3 * a * m_alpha(alpha), 1) / 4 <= lo and hi <= 12 * a * 4
    lo2, hi2 = g1_magnitude_check(p, 20_000, seed=1)
    assert lo2 == pytest.approx(lo, rel=0.1) and hi2 == pytest.approx(hi, rel=0.1)


def test_g1_precondition():
    for alpha in (1.0, 3.0, 4.0):
        with pytest.raises(ValueError):
            g1_magnitude_check(PhaseParams(alpha, 0.0), 10)


def test_alpha1_examples():
    N = 1e4
    xi2, xi3 = N, -N - 1.0
    xi = 0.0
    xi1 = xi - xi2 - xi3
    r = alpha1_ratio(1.0, xi, xi1, xi2)
    assert r == pytest.approx(1 / (3 * N ** 2), rel=2e-4)
    assert alpha1_ratio(0.0, xi, xi1, xi2) == 1 / abs(3 * xi2 * xi3)
    r2 = alpha1_ratio(1.0, xi, 2 * xi1, 2 * xi2)
    assert r / r2 == pytest.approx(4.0, rel=1e-3)
    # G1 = 3 eta1 eta2 eta3 + beta eta3 at alpha = 1
    p = PhaseParams(1.0, 1.0)
    t = FreqTriple(xi2, xi - xi1 - xi2)
    assert abs(xi1 - xi) / abs(g1(p, t)) == pytest.approx(r, rel=1e-9)


def test_alpha1_ratio_range():
    for seed in (0, 1, 2):
        for beta in (1.0, -1.0, 0.0):
            lo, hi = alpha1_ratio_check(beta, seed=seed)
            assert 1 / 12 * (1 - 1e-6) <= lo and hi <= 1 / 3 * (1 + 1e-6)
            assert lo >= ALPHA1_RATIO_RANGE[0] / 1.1 and hi <= ALPHA1_RATIO_RANGE[1] * 1.1


def test_phase_sum_matches_direct_at_moderate_scale():
    rng = np.random.default_rng(0)
    ph = (PhaseParams(1.0, 0.0), PhaseParams(4.0, 3.0), PhaseParams(2.0, -1.0))
    N = 7.0
    leads = (2.0, -1.0, -1.0)
    r = rng.uniform(-1, 1, (3, 100))
    direct = sum(p.alpha * (l * N + x) ** 3 - p.beta * (l * N + x) for p, l, x in zip(ph, leads, r))
    assert np.allclose(phase_sum(ph, N, leads, tuple(r)), direct, rtol=1e-12, atol=1e-10)


def _probe(shifts=(0.0, 0.0, 0.0), amp=(1.0, 1.0, 1.0), lead3=0.0):
    p = PhaseParams(4.0, 3.0)
    slots = (
        SlotFunction(0.0, 1.0, 1.5, amplitude=amp[0], tau_shift=shifts[0]),
        SlotFunction(0.0, -3.0, -2.0, amplitude=amp[1], tau_shift=shifts[1], shell_width=2.0),
        SlotFunction(lead3, 0.5, 2.0, shell_center=5.0, shell_width=40.0, amplitude=amp[2],
                     tau_shift=shifts[2]),
    )
    return ConvolutionProbeSpec(slots, (PhaseParams(1.0, 0.0), p, p), 1.0, 0.3, 0.7, (12, 8, 12, 8))


def test_probe_disjoint_sumset_is_zero():
    assert weighted_convolution_ratio(_probe(lead3=5.0)) == 0.0


def test_probe_scale_invariance_and_tau_translation():
    base = weighted_convolution_ratio(_probe())
    assert base > 0
    assert weighted_convolution_ratio(_probe(amp=(3.0, 0.5, 7.0))) == pytest.approx(base, rel=1e-12)
    # shifting each slot's tau support and phase reference by c_i, sum c_i = 0
    assert weighted_convolution_ratio(_probe(shifts=(2.5, -4.0, 1.5))) == pytest.approx(base, rel=1e-12)
    # an unbalanced shift moves L3 out of its shell pattern and changes the value
    assert weighted_convolution_ratio(_probe(shifts=(2.5, -4.0, 9.5))) != pytest.approx(base, rel=1e-3)


def test_probe_guards():
    s = _probe()
    with pytest.raises(ValueError):
        ConvolutionProbeSpec(s.slots, s.phases, 1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        ConvolutionProbeSpec(s.slots, s.phases, 1.0, 0.0, 0.6, (1000, 1000, 1000, 1000))


def test_extremizer_ratio_grows_with_N():
    Ns = 2.0 ** np.arange(8, 13)
    r = [weighted_convolution_ratio(extremizer_probe(n)) for n in Ns]
    slope = np.polyfit(np.log(Ns), np.log(r), 1)[0]
    assert slope > 0
    assert slope == pytest.approx(PROBE_SLOPE_BETA3, abs=1e-3)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([8.0, 5.0, -1.0, -2.0]), st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_property_g1_ratio_within_exact_range(alpha, a, b):
    c = -a - b
    if abs(c) < 1 or max(abs(a), abs(b), abs(c)) < 10:
        return
    p = PhaseParams(alpha, 0.0)
    r = abs(g1_factored(p, a, c)) / (abs(c) * (a * a + b * b + c * c))
    lo, hi = g1_ratio_range(alpha)
    assert lo * (1 - 1e-9) <= r <= hi * (1 + 1e-9)
