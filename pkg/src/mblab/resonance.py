"""Near-resonant sets of the quadratic interactions.

* ``trichotomy_scan``: <G0> over {eta1 in [N, 2N]} at alpha = 4 on a grid in
  the strip coordinate w = 2 eta2 + eta1, where G0 = -3 eta1 (w^2 - beta/3).
* ``g1_magnitude_check`` / ``alpha1_ratio_check``: two-sided ratio scans for
  G1 away from the resonant alphas.
* ``weighted_convolution_ratio``: discrete trilinear form over the zero-sum
  set {xi1+xi2+xi3 = 0, tau1+tau2+tau3 = 0} for box x shell test functions.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .dispersion import PhaseParams, bracket, g1_factored, m_alpha

MAX_CELLS = 10 ** 8


@dataclass(frozen=True)
class RegionSpec:
    """Sampling region for trichotomy_scan.

    eta1_band is relative to N; eta2_band is an absolute band for the strip
    coordinate w = 2 eta2 + eta1 (so eta2 = (w - eta1)/2).  sample_counts are
    the cell counts along eta1 and w.
    """
    N: float
    eta1_band: tuple = (1.0, 2.0)
    eta2_band: tuple = (-1.0, 1.0)
    sample_counts: tuple = (1024, 4097)

    def __post_init__(self):
        if not self.N > 10:
            raise ValueError("N must exceed 10")
        for lo, hi in (self.eta1_band, self.eta2_band):
            if not hi > lo:
                raise ValueError("bands must be nonempty")
        if min(self.sample_counts) < 16:
            raise ValueError("at least 16 samples per axis")
        if self.sample_counts[0] * self.sample_counts[1] > MAX_CELLS:
            raise ValueError("grid exceeds the cell guard")


@dataclass
class ScanResult:
    min_bracket_G: float
    measure_below: dict
    both_factors_small: int
    grid: dict = field(default_factory=dict)


def _alpha4_g0(beta, eta1, w):
    return -3.0 * eta1 * (w * w - beta / 3.0)


def trichotomy_scan(p: PhaseParams, region: RegionSpec, thresholds=(10.0,)) -> ScanResult:
    """min <G0> over the grid nodes and cell-counted measures of {<G0> <= K}.

    Measures are in (eta1, eta2) area; a w-cell of width dw has eta2 width dw/2.
    both_factors_small counts cells with |w + b1| < b1 and |w - b1| < b1
    (only meaningful for beta > 0).
    """
    if p.alpha != 4:
        raise ValueError("trichotomy_scan needs alpha = 4")
    N = region.N
    n1, nw = region.sample_counts
    e_lo, e_hi = region.eta1_band[0] * N, region.eta1_band[1] * N
    w_lo, w_hi = region.eta2_band
    d1, dw = (e_hi - e_lo) / n1, (w_hi - w_lo) / nw

    # nodes for the minimum (include band edges), centres for the measure
    e_nodes = np.linspace(e_lo, e_hi, n1 + 1)
    w_nodes = np.linspace(w_lo, w_hi, nw + 1)
    if w_lo < 0 < w_hi:
        w_nodes = np.union1d(w_nodes, [0.0])
    e_c = e_lo + d1 * (np.arange(n1) + 0.5)
    w_c = w_lo + dw * (np.arange(nw) + 0.5)

    thresholds = sorted(float(k) for k in thresholds)
    counts = np.zeros(len(thresholds), dtype=np.int64)
    gmin = math.inf
    both = 0
    b1 = p.beta1 if p.beta > 0 else None
    # slabs in eta1 keep memory bounded; merge is min / sum
    slab = max(1, 2 ** 22 // max(nw, 1))
    for i in range(0, n1 + 1, slab):
        e = e_nodes[i:i + slab, None]
        gmin = min(gmin, float(np.min(1.0 + np.abs(_alpha4_g0(p.beta, e, w_nodes[None, :])))))
    for i in range(0, n1, slab):
        g = 1.0 + np.abs(_alpha4_g0(p.beta, e_c[i:i + slab, None], w_c[None, :]))
        counts += np.array([np.count_nonzero(g <= k) for k in thresholds])
    if b1 is not None:
        both = int(np.count_nonzero((np.abs(w_c + b1) < b1) & (np.abs(w_c - b1) < b1))) * n1
    cell = d1 * dw / 2.0
    return ScanResult(gmin, {k: float(c) * cell for k, c in zip(thresholds, counts)}, both,
                      {"N": N, "eta1": (e_lo, e_hi, n1), "w": (w_lo, w_hi, nw), "cell_area": cell})


def strip_measure_beta0(N, K, band=(1.0, 2.0)):
    """Exact area of {<G0> <= K} over eta1 in band*N at alpha = 4, beta = 0."""
    lo, hi = band[0] * N, band[1] * N
    return math.sqrt((K - 1.0) / 3.0) * 2.0 * (math.sqrt(hi) - math.sqrt(lo))


def g1_ratio_range(alpha):
    """Exact range of |G1|/(|eta3| sum eta_i^2) at beta = 0 for m_alpha > 0."""
    m = m_alpha(alpha)
    base = 1.5 * abs(alpha)
    return base * min(1.0, 4 * m / 3), base * max(1.0, 4 * m / 3)


def _zero_sum_triples(rng, n, lo=1e2, hi=1e6):
    M = 10.0 ** rng.uniform(math.log10(lo), math.log10(hi), n)
    th = rng.uniform(0, 2 * math.pi, n)
    e = np.stack([np.cos(th), np.sin(th)])
    e = np.vstack([e, -e.sum(axis=0)])
    e *= M / np.abs(e).max(axis=0)
    return e[0], e[1], e[2]


def g1_magnitude_check(p: PhaseParams, n_samples=10_000, seed=0):
    """(min, max) of |G1|/(|eta3| sum eta_i^2) over random zero-sum triples.

    max |eta_i| is log-uniform on [1e2, 1e6]; samples with |eta3| < 1 are
    dropped.  G1 uses the factored form with the m_alpha completion.
    """
    if not m_alpha(p.alpha) > 0:
        raise ValueError("g1_magnitude_check needs m_alpha > 0 (alpha < 0 or alpha > 4)")
    rng = np.random.default_rng(seed)
    e1, e2, e3 = _zero_sum_triples(rng, n_samples)
    keep = np.abs(e3) >= 1
    e1, e2, e3 = e1[keep], e2[keep], e3[keep]
    r = np.abs(g1_factored(p, e1, e3)) / (np.abs(e3) * (e1 ** 2 + e2 ** 2 + e3 ** 2))
    return float(r.min()), float(r.max())


def alpha1_ratio(beta, xi, xi1, xi2):
    """|xi1 - xi| / |G1(xi2, xi - xi1 - xi2, xi1 - xi)| at alpha = 1."""
    a, b = xi2, xi - xi1 - xi2
    return 1.0 / np.abs(3.0 * a * b + beta)


def alpha1_ratio_check(beta, n_samples=10_000, seed=0, N=1e4):
    """(min, max) of N^2 |xi1 - xi|/|G1| with |xi2| ~ |xi - xi1 - xi2| ~ N.

    Both magnitudes are uniform on [N, 2N] with random signs; xi1 - xi is
    then fixed by the zero sum.
    """
    rng = np.random.default_rng(seed)
    a = N * rng.uniform(1, 2, n_samples) * rng.choice([-1.0, 1.0], n_samples)
    b = N * rng.uniform(1, 2, n_samples) * rng.choice([-1.0, 1.0], n_samples)
    xi = rng.uniform(-N, N, n_samples)
    xi1 = xi - a - b
    r = N * N * alpha1_ratio(beta, xi, xi1, a)
    return float(r.min()), float(r.max())


# weighted convolution probe

@dataclass(frozen=True)
class SlotFunction:
    """Box in frequency times a shell around tau = phi(xi) + tau_shift.

    The frequency box is lead*scale + [lo, hi]; the shell is
    |L - shell_center| <= shell_width/2 with L = tau - phi(xi) - tau_shift.
    """
    lead: float
    lo: float
    hi: float
    shell_center: float = 0.0
    shell_width: float = 1.0
    amplitude: float = 1.0
    tau_shift: float = 0.0

    def norm(self):
        return abs(self.amplitude) * math.sqrt((self.hi - self.lo) * self.shell_width)


@dataclass(frozen=True)
class ConvolutionProbeSpec:
    slots: tuple                 # three SlotFunction
    phases: tuple                # three PhaseParams
    scale: float                 # common frequency scale N of the leads
    s: float = 0.0
    b: float = 0.6
    resolution: tuple = (32, 16, 32, 16)   # cells in (xi1, tau1, xi2, tau2)

    def __post_init__(self):
        if len(self.slots) != 3 or len(self.phases) != 3:
            raise ValueError("three slots and three phases required")
        if not 0.5 < self.b < 1:
            raise ValueError("b must lie in (1/2, 1)")
        if math.prod(self.resolution) > MAX_CELLS:
            raise ValueError("grid exceeds the cell guard")


def phase_sum(phases, scale, leads, rests):
    """sum_i phi_i(lead_i N + rest_i) with the N-powers grouped.

    The N^3 and N^2 coefficients cancel for resonant configurations; grouping
    keeps that cancellation out of the O(1) result.
    """
    a3 = a2 = a1 = a0 = 0.0
    for p, l, r in zip(phases, leads, rests):
        a3 = a3 + p.alpha * l ** 3
        a2 = a2 + 3.0 * p.alpha * l * l * r
        a1 = a1 + 3.0 * p.alpha * l * r * r - p.beta * l
        a0 = a0 + p.alpha * r ** 3 - p.beta * r
    N = scale
    return ((a3 * N + a2) * N + a1) * N + a0


def weighted_convolution_ratio(spec: ConvolutionProbeSpec) -> float:
    """|int_A xi3 <xi3>^s prod f_i / (<xi1>^s <xi2>^s <L1>^b <L2>^b <L3>^(1-b))| / prod ||f_i||.

    Midpoint sum over (xi1, tau1, xi2, tau2) cells covering the supports of
    f1, f2; (xi3, tau3) = -(xi1 + xi2, tau1 + tau2).  Slot i's tau variable is
    written as phi_i(xi_i) + tau_shift_i + L_i, a unit-Jacobian shear.
    """
    f1, f2, f3 = spec.slots
    p1, p2, p3 = spec.phases
    n1, m1, n2, m2 = spec.resolution
    N = spec.scale

    def cells(lo, hi, n):
        h = (hi - lo) / n
        return lo + h * (np.arange(n) + 0.5), h

    r1, h1 = cells(f1.lo, f1.hi, n1)
    r2, h2 = cells(f2.lo, f2.hi, n2)
    L1, k1 = cells(f1.shell_center - f1.shell_width / 2, f1.shell_center + f1.shell_width / 2, m1)
    L2, k2 = cells(f2.shell_center - f2.shell_width / 2, f2.shell_center + f2.shell_width / 2, m2)

    R1, R2 = np.meshgrid(r1, r2, indexing="ij")
    l3 = -(f1.lead + f2.lead)
    R3 = -(R1 + R2)
    x1, x2, x3 = f1.lead * N + R1, f2.lead * N + R2, l3 * N + R3
    G = phase_sum((p1, p2, p3), N, (f1.lead, f2.lead, l3), (R1, R2, R3))

    in3 = (l3 == f3.lead) & (R3 >= f3.lo) & (R3 <= f3.hi)
    wxi = x3 * bracket(x3) ** spec.s / (bracket(x1) ** spec.s * bracket(x2) ** spec.s)
    wxi = np.where(in3, wxi, 0.0)

    # tau3 = -(tau1 + tau2) so L3 = -L1 - L2 - G - (shift1 + shift2 + shift3)
    shift = f1.tau_shift + f2.tau_shift + f3.tau_shift
    w1 = bracket(L1) ** -spec.b
    w2 = bracket(L2) ** -spec.b
    S = L1[:, None] + L2[None, :]
    W12 = w1[:, None] * w2[None, :]
    total = 0.0
    lo3 = f3.shell_center - f3.shell_width / 2
    hi3 = f3.shell_center + f3.shell_width / 2
    for i in range(n1):
        gi = G[i][:, None, None]                         # (n2, 1, 1)
        L3 = -S[None] - gi - shift                       # (n2, m1, m2)
        ok = (L3 >= lo3) & (L3 <= hi3)
        val = np.where(ok, W12[None] * bracket(L3) ** (spec.b - 1.0), 0.0)
        total += float(np.sum(wxi[i][:, None, None] * val))
    amp = f1.amplitude * f2.amplitude * f3.amplitude
    lhs = amp * total * h1 * h2 * k1 * k2
    return abs(lhs) / (f1.norm() * f2.norm() * f3.norm())


def extremizer_probe(N, s=0.0, b=0.6, beta=3.0, resolution=(32, 16, 32, 16)):
    """Probe for the alpha = 4, beta > 0 bump pair thickened by unit shells.

    Slot 1 (phase (1, 0)) sits on 2N + b1 + [0, g], slot 2 (phase (4, beta)) on
    -N + [g, 2g], g = 1/N; slot 3 is the reflected output box
    -(N + b1) - [g, 3g] with its shell centred on -G over the boxes and
    wide enough to hold L1 + L2 + G.
    """
    p = PhaseParams(4.0, beta)
    b1 = p.beta1
    g = 1.0 / N
    phases = (PhaseParams(1.0, 0.0), p, p)
    lo1, hi1 = b1, b1 + g
    lo2, hi2 = g, 2 * g
    # range of G over the two boxes from a fine sample
    r1 = np.linspace(lo1, hi1, 65)[:, None]
    r2 = np.linspace(lo2, hi2, 65)[None, :]
    G = phase_sum(phases, N, (2.0, -1.0, -1.0), (r1, r2, -(r1 + r2)))
    gmin, gmax = float(G.min()), float(G.max())
    slots = (
        SlotFunction(2.0, lo1, hi1),
        SlotFunction(-1.0, lo2, hi2),
        SlotFunction(-1.0, -b1 - 3 * g, -b1 - g,
                     shell_center=-(gmin + gmax) / 2, shell_width=(gmax - gmin) + 2.0),
    )
    return ConvolutionProbeSpec(slots, phases, float(N), s, b, resolution)
