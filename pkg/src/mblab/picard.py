"""Second and third Picard iterates for frequency-bump data, windowed H^s
norms of the iterates and log-log growth fits over an N ladder.

Frequencies are handled as lead*N + rest (see :class:`ScaledFreq`); every
quadrature runs in the rest coordinates, so resonance functions that are
O(1) while the frequencies are O(N) keep full relative accuracy.

Conventions: F(fg) = F(f) * F(g) (no 2 pi), and the returned fields use the
closed forms

    psi2^(xi, t) = 2 i xi e^{i phi(xi) t} int phi^(xi1) psi^(xi - xi1) K(G0) dxi1
    psi3^(xi, t) = -3 i [I1(xi, t) - I2(xi, t)]

with K(G) = (e^{iGt} - 1)/G.  Differentiating the Duhamel formula with
d/dx -> i xi gives i times these expressions; the unimodular factor does
not affect any norm.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss

from .dispersion import (
    PhaseParams, ScaledFreq, bracket, g0_cofactor, g0_factored, g1_factored, g2_factored,
    lambda_shift, roots_of_f,
)

KINDS = ("beta-positive", "beta-negative", "beta-zero", "general-alpha")
SERIES_SWITCH = 1e-6


class UnderResolvedError(RuntimeError):
    """Quadrature nodes are too coarse for the bump widths."""


# data

@dataclass(frozen=True)
class BumpProfile:
    """amplitude * indicator of lead*scale + [l, r]."""
    amplitude: float
    interval: tuple
    lead: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        l, r = self.interval
        if not l < r:
            raise ValueError("bump interval needs l < r")
        if not self.amplitude > 0:
            raise ValueError("bump amplitude must be positive")

    @property
    def lo(self):
        return self.interval[0]

    @property
    def hi(self):
        return self.interval[1]

    @property
    def width(self):
        return self.interval[1] - self.interval[0]

    def absolute(self):
        base = self.lead * self.scale
        return base + self.interval[0], base + self.interval[1]

    def __call__(self, xi):
        a, b = self.absolute()
        xi = np.asarray(xi, dtype=float)
        return np.where((xi >= a) & (xi <= b), self.amplitude, 0.0)

    def reflected(self):
        return BumpProfile(self.amplitude, (-self.interval[1], -self.interval[0]), -self.lead, self.scale)


def bump_sobolev_norm(bumps, s, n=64):
    """H^s norm of a union of disjoint bumps (Gauss on each bump)."""
    x, w = leggauss(n)
    tot = 0.0
    for b in bumps:
        lo, hi = b.absolute()
        xi = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        tot += b.amplitude ** 2 * 0.5 * (hi - lo) * float(np.sum(w * bracket(xi) ** (2 * s)))
    return math.sqrt(tot)


@dataclass(frozen=True)
class ConstructionId:
    kind: str
    alpha: float
    beta: float
    s: float
    N: float

    def __post_init__(self):
        k, a, b = self.kind, self.alpha, self.beta
        if k not in KINDS:
            raise ValueError(f"unknown construction {k!r}")
        if k == "beta-positive" and not (a == 4 and b > 0):
            raise ValueError("beta-positive needs alpha = 4, beta > 0")
        if k == "beta-negative" and not (a == 4 and b < 0):
            raise ValueError("beta-negative needs alpha = 4, beta < 0")
        if k == "beta-zero" and not (a == 4 and b == 0):
            raise ValueError("beta-zero needs alpha = 4, beta = 0")
        if k == "general-alpha" and not (0 < a < 4 and a != 1):
            raise ValueError("general-alpha needs alpha in (0, 4), alpha != 1")
        if not self.N > 1:
            raise ValueError("N must exceed 1")

    @property
    def params(self):
        return PhaseParams(self.alpha, self.beta)

    @property
    def gamma(self):
        """Bump width parameter of the construction."""
        return {"beta-positive": 1.0 / self.N, "beta-negative": self.N ** -0.5,
                "beta-zero": self.N ** -0.5, "general-alpha": self.N ** -2.0}[self.kind]

    def with_N(self, N):
        return ConstructionId(self.kind, self.alpha, self.beta, self.s, float(N))

    def with_s(self, s):
        return ConstructionId(self.kind, self.alpha, self.beta, float(s), self.N)


@dataclass(frozen=True)
class Window:
    """Frequency window lead*scale + [lo, hi]."""
    name: str
    lead: float
    lo: float
    hi: float
    scale: float

    def absolute(self):
        return self.lead * self.scale + self.lo, self.lead * self.scale + self.hi


def build_data(c: ConstructionId):
    """(phi_hat, psi_hat) as tuples of BumpProfile."""
    N, s, g = c.N, c.s, c.gamma
    amp = g ** -0.5 * N ** -s
    p = c.params
    if c.kind in ("beta-positive", "beta-zero"):
        b1 = p.beta1
        phi = (BumpProfile(amp, (b1, b1 + g), 2.0, N),)
        psi = (BumpProfile(amp, (g, 2 * g), -1.0, N),)
    elif c.kind == "beta-negative":
        phi = ()
        psi = (BumpProfile(amp, (0.0, 4 * g), 1.0, N),
               BumpProfile(amp, (-9 * g, -5 * g), -1.0, N))
    else:
        c1 = roots_of_f(c.alpha).c1
        lam = lambda_shift(c.alpha, c.beta)
        phi = (BumpProfile(amp, (0.0, g), 1.0, N),)
        psi = (BumpProfile(amp, (lam / N - g, lam / N + g), -(1.0 + c1), N),)
    for bumps in (phi, psi):
        if bumps:
            nrm = bump_sobolev_norm(bumps, s)
            if not 0.25 <= nrm <= 4.0:
                raise ValueError(f"data norm {nrm:.3g} outside [1/4, 4]")
    return phi, psi


def construction_window(c: ConstructionId) -> Window:
    """Lower-bound window of the construction (E1, E2 or their analogues)."""
    N, g = c.N, c.gamma
    if c.kind in ("beta-positive", "beta-zero"):
        b1 = c.params.beta1
        return Window("E1", 1.0, b1 + 1.75 * g, b1 + 2.25 * g, N)
    if c.kind == "beta-negative":
        return Window("E2", -1.0, -12 * g, -11 * g, N)
    c1 = roots_of_f(c.alpha).c1
    lam = lambda_shift(c.alpha, c.beta)
    return Window("E1", -c1, lam / N, lam / N + g, N)


def output_support(phi_hat, psi_hat, order):
    """Windows covering the support of the order-2 or order-3 iterate."""
    if order == 2:
        pairs = [(a, b) for a in phi_hat for b in psi_hat]
        spans = [(a.lead + b.lead, a.lo + b.lo, a.hi + b.hi, a.scale) for a, b in pairs]
    else:
        spans = [(a.lead + b.lead + c.lead, a.lo + b.lo + c.lo, a.hi + b.hi + c.hi, a.scale)
                 for a in psi_hat for b in psi_hat for c in psi_hat]
    merged = {}
    for lead, lo, hi, sc in spans:
        if lead in merged:
            l0, h0, _ = merged[lead]
            merged[lead] = (min(l0, lo), max(h0, hi), sc)
        else:
            merged[lead] = (lo, hi, sc)
    return [Window("full-support", lead, lo, hi, sc) for lead, (lo, hi, sc) in sorted(merged.items())]


# kernels

def kernel(G, t):
    """K(G, t) = (e^{iGt} - 1)/G with a series branch for |Gt| < 1e-6."""
    G = np.asarray(G, dtype=float)
    x = G * t
    small = np.abs(x) < SERIES_SWITCH
    xs = np.where(small, 1.0, x)
    big = (-2.0 * np.sin(0.5 * xs) ** 2 + 1j * np.sin(xs)) / xs
    ser = 1j - x / 2 - 1j * x * x / 6 + x ** 3 / 24
    return t * np.where(small, ser, big)


def phase_factor(p: PhaseParams, lead, rest, scale, t):
    """e^{i phi(lead*scale + rest) t}; the cube is expanded in powers of scale."""
    l, r, N = lead, np.asarray(rest, dtype=float), scale
    cube = ((l ** 3 * N + 3 * l * l * r) * N + 3 * l * r * r) * N + r ** 3
    ph = p.alpha * cube - p.beta * (l * N + r)
    return np.exp(1j * ph * t)


def cheb_moments(omega, n):
    """M_k = int_{-1}^{1} T_k(u) e^{i omega u} du, k = 0..n, for |omega| > n."""
    w = float(omega)
    e_p, e_m = np.exp(1j * w), np.exp(-1j * w)
    E = lambda k: e_p - (-1) ** k * e_m
    M = np.empty(n + 1, dtype=complex)
    M[0] = 2 * math.sin(w) / w
    if n >= 1:
        M[1] = (2 * math.cos(w) - M[0]) / (1j * w)
    if n >= 2:
        M[2] = (E(2) - 4 * M[1]) / (1j * w)
    for k in range(2, n):
        D = E(k - 1) - 1j * w * M[k - 1]
        M[k + 1] = (E(k + 1) - (k + 1) * (2 * M[k] + D / (k - 1))) / (1j * w)
    return M


def filon_integral(F, theta, a, b, deg=40):
    """int_a^b F(y) e^{i theta(y)} dy for smooth F and monotone theta.

    The linear part of theta is integrated exactly against a Chebyshev
    interpolant of F(y) e^{i (theta - linear part)}.
    """
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    ta, tb = theta(np.array([a]))[0], theta(np.array([b]))[0]
    tc, om = 0.5 * (ta + tb), 0.5 * (tb - ta)

    def B(u):
        y = c + h * u
        return F(y) * np.exp(1j * (theta(y) - tc - om * u))
    coef = C.chebinterpolate(B, deg)
    return h * np.exp(1j * tc) * np.dot(coef, cheb_moments(om, deg))


# node layout

def _gauss(n):
    x, w = leggauss(n)
    return x, w


def _window_layout(window, breaks, min_width, n=16):
    """Composite Gauss nodes on [lo, hi] cut at breaks and into panels of
    length <= min_width/8.  Returns rest nodes, weights, piece edges and the
    piece index of each node."""
    lo, hi = window.lo, window.hi
    cuts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    gx, gw = _gauss(n)
    xs, ws, pid, edges = [], [], [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 1e-15 * max(1.0, abs(a)):
            continue
        m = max(1, math.ceil((b - a) / (min_width / 8)))
        pe = np.linspace(a, b, m + 1)
        for u, v in zip(pe[:-1], pe[1:]):
            xs.append(0.5 * (u + v) + 0.5 * (v - u) * gx)
            ws.append(0.5 * (v - u) * gw)
            pid.append(np.full(n, len(edges)))
            edges.append((u, v))
    x = np.concatenate(xs)
    gaps = np.diff(np.concatenate([[lo], x, [hi]]))
    if gaps.max() > min_width / 64:
        raise UnderResolvedError(f"window node spacing {gaps.max():.3g} exceeds bump width/64")
    return x, np.concatenate(ws), edges, np.concatenate(pid)


@dataclass
class IterateField:
    order: int
    t: float
    window: Window
    xi_rest: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    pieces: list
    piece_of: np.ndarray
    blocks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def xi_nodes(self):
        return self.window.lead * self.window.scale + self.xi_rest

    def block_values(self, key, part):
        """Values of block key=(a, b) for part 1 (I1) or 2 (I2), prefactor included."""
        return self.blocks[key][part - 1]


def windowed_norm(f: IterateField, s, window=None, values=None):
    """(int_window <xi>^{2s} |F|^2 dxi)^{1/2} with the field's quadrature.

    window=None uses every node.  Otherwise the window edges must coincide
    with piece edges of the field.
    """
    v = f.values if values is None else values
    if window is None:
        mask = np.ones(v.shape, dtype=bool)
    else:
        if window.lead != f.window.lead or window.scale != f.window.scale:
            raise ValueError("window outside sampled range")
        tol = 1e-9 * (f.window.hi - f.window.lo)
        if window.lo < f.window.lo - tol or window.hi > f.window.hi + tol:
            raise ValueError("window outside sampled range")
        keep = [i for i, (a, b) in enumerate(f.pieces) if a >= window.lo - tol and b <= window.hi + tol]
        covered = sum(f.pieces[i][1] - f.pieces[i][0] for i in keep)
        if abs(covered - (window.hi - window.lo)) > tol:
            raise ValueError("window edges are not piece edges of the field")
        mask = np.isin(f.piece_of, keep)
    xi = f.xi_nodes[mask]
    tot = float(np.sum(f.weights[mask] * bracket(xi) ** (2 * s) * np.abs(v[mask]) ** 2))
    return math.sqrt(tot)


def _min_width(*bump_sets):
    return min(b.width for bs in bump_sets for b in bs)


# second iterate

def second_iterate(phi_hat, psi_hat, p: PhaseParams, t, window: Window, nodes_per_bump=32,
                   extra_breaks=(), window_nodes=16) -> IterateField:
    """F psi2 on the window; inner xi1 integrals over the exact overlap sets."""
    if not t > 0:
        raise ValueError("t must be positive")
    N = window.scale
    w = window.lead
    breaks = list(extra_breaks)
    for a in phi_hat:
        for b in psi_hat:
            D = (w - a.lead - b.lead) * N
            breaks += [ea + eb - D for ea in (a.lo, a.hi) for eb in (b.lo, b.hi)]
    wmin = _min_width(phi_hat, psi_hat)
    x, wts, pieces, pid = _window_layout(window, breaks, wmin, window_nodes)
    gx, gw = _gauss(nodes_per_bump)
    acc = np.zeros(x.size, dtype=complex)
    amin = np.full(x.size, 0.0)
    for a in phi_hat:
        for b in psi_hat:
            D = (w - a.lead - b.lead) * N
            lo = np.maximum(a.lo, x + D - b.hi)
            hi = np.minimum(a.hi, x + D - b.lo)
            ok = hi > lo
            if not ok.any():
                continue
            lo_, hi_ = lo[ok], hi[ok]
            y = 0.5 * (lo_ + hi_)[:, None] + 0.5 * (hi_ - lo_)[:, None] * gx[None, :]
            xi1 = ScaledFreq(a.lead, y, N)
            eta3 = ScaledFreq(-w, -x[ok][:, None], N)
            G = g0_factored(p, xi1, eta3)
            acc[ok] += a.amplitude * b.amplitude * 0.5 * (hi_ - lo_) * (kernel(G, t) @ gw)
            amin[ok] += hi_ - lo_
    if not np.any(amin > 0):
        warnings.warn("empty overlap set for every window node; returning zeros")
    xi = w * N + x
    vals = 2j * xi * phase_factor(p, w, x, N, t) * acc
    return IterateField(2, t, window, x, wts, vals, pieces, pid,
                        meta={"nodes_per_bump": nodes_per_bump, "overlap_measure": amin})


# third iterate

def _cofactor_q(p, xi1_minus_xi, xi2):
    """Q with (xi - xi1)/G1(xi2, xi - xi1 - xi2, xi1 - xi) = -1/Q."""
    return g0_cofactor(p, xi1_minus_xi, xi2)


def third_iterate(psi_hat, p: PhaseParams, t, window: Window, nodes=32, phi_hat=(),
                  filon_degree=40, extra_breaks=(), window_nodes=16) -> IterateField:
    """F psi3 = -3i (I1 - I2) on the window for data with phi = 0.

    Blocks are keyed by (a, b): xi1 in bump a, xi2 in bump b (summed over the
    bump holding xi - xi1 - xi2).  Each block holds (I1_ab, I2_ab) including
    the prefactor xi e^{i phi(xi) t}.
    """
    if len(phi_hat):
        raise ValueError("third_iterate formula needs phi = 0 data")
    if not t > 0:
        raise ValueError("t must be positive")
    N, w = window.scale, window.lead
    bumps = tuple(psi_hat)
    breaks = list(extra_breaks)
    for A in bumps:
        for B in bumps:
            for Cb in bumps:
                D = (w - A.lead - B.lead - Cb.lead) * N
                breaks += [ea + eb + ec - D for ea in (A.lo, A.hi) for eb in (B.lo, B.hi)
                           for ec in (Cb.lo, Cb.hi)]
    wmin = _min_width(bumps)
    xs, wts, pieces, pid = _window_layout(window, breaks, wmin, window_nodes)
    gx, gw = _gauss(nodes)
    nb = len(bumps)
    I1 = {(i, j): np.zeros(xs.size, dtype=complex) for i in range(nb) for j in range(nb)}
    I2 = {(i, j): np.zeros(xs.size, dtype=complex) for i in range(nb) for j in range(nb)}
    n_filon = 0

    for k, x in enumerate(xs):
        for i, A in enumerate(bumps):
            for j, B in enumerate(bumps):
                for Cb in bumps:
                    D = (w - A.lead - B.lead - Cb.lead) * N
                    lo1 = max(A.lo, x + D - Cb.hi - B.hi)
                    hi1 = min(A.hi, x + D - Cb.lo - B.lo)
                    if not hi1 > lo1:
                        continue
                    amp = A.amplitude * B.amplitude * Cb.amplitude
                    kinks = [x + D - Cb.hi - B.lo, x + D - Cb.lo - B.hi]
                    cuts = sorted({lo1, hi1, *[q for q in kinks if lo1 < q < hi1]})
                    v1, v2, nf = _block_pieces(p, t, N, x, w, A, B, Cb, D, cuts, gx, gw,
                                               filon_degree)
                    I1[(i, j)][k] += amp * v1
                    I2[(i, j)][k] += amp * v2
                    n_filon += nf
    xi = w * N + xs
    pref = xi * phase_factor(p, w, xs, N, t)
    blocks = {key: (pref * I1[key], pref * I2[key]) for key in I1}
    tot1 = sum(b[0] for b in blocks.values())
    tot2 = sum(b[1] for b in blocks.values())
    vals = -3j * (tot1 - tot2)
    return IterateField(3, t, window, xs, wts, vals, pieces, pid, blocks,
                        meta={"nodes": nodes, "filon_pieces": n_filon, "filon_degree": filon_degree})


def _inner(p, N, x, w, A, B, Cb, D, y1, gx, gw):
    """Gauss nodes in xi2 for each xi1 rest y1 (1-d array) and 1/Q there."""
    lo2 = np.maximum(B.lo, x + D - y1 - Cb.hi)
    hi2 = np.minimum(B.hi, x + D - y1 - Cb.lo)
    ln = np.maximum(hi2 - lo2, 0.0)
    y2 = 0.5 * (lo2 + hi2)[:, None] + 0.5 * ln[:, None] * gx[None, :]
    xi1_m_xi = ScaledFreq(A.lead - w, (y1 - x)[:, None], N)
    xi2 = ScaledFreq(B.lead, y2, N)
    invq = -1.0 / _cofactor_q(p, xi1_m_xi, xi2)          # (xi - xi1)/G1
    return y2, 0.5 * ln[:, None] * gw[None, :], invq


def _g1_outer(p, N, x, w, A, y1):
    """G1(xi1, -xi, xi - xi1) as a function of the xi1 rest."""
    return g1_factored(p, ScaledFreq(A.lead, y1, N), ScaledFreq(w - A.lead, x - y1, N))


def _block_pieces(p, t, N, x, w, A, B, Cb, D, cuts, gx, gw, deg):
    v1 = 0j
    v2 = 0j
    nf = 0
    for a, b in zip(cuts[:-1], cuts[1:]):
        y1 = 0.5 * (a + b) + 0.5 * (b - a) * gx
        wy = 0.5 * (b - a) * gw
        y2, w2, invq = _inner(p, N, x, w, A, B, Cb, D, y1, gx, gw)
        # I1: kernel in G2(xi1, xi2, xi - xi1 - xi2, -xi)
        G2 = g2_factored(p, ScaledFreq(A.lead, y1[:, None], N), ScaledFreq(B.lead, y2, N),
                         ScaledFreq(w - A.lead - B.lead, x - y1[:, None] - y2, N))
        v1 += np.sum(wy[:, None] * w2 * invq * kernel(G2, t))
        # I2: kernel depends on xi1 only
        H = np.sum(w2 * invq, axis=1)
        G1 = _g1_outer(p, N, x, w, A, y1)
        span = abs(G1[-1] - G1[0]) * t
        if span < 4 * deg:
            v2 += np.sum(wy * H * kernel(G1, t))
            continue
        # fast phase: -H/G1 by Gauss, H e^{iG1 t}/G1 by Filon
        nf += 1
        v2 += -np.sum(wy * H / G1)

        def F(yy):
            _, ww, iq = _inner(p, N, x, w, A, B, Cb, D, yy, gx, gw)
            return np.sum(ww * iq, axis=1) / _g1_outer(p, N, x, w, A, yy)
        v2 += filon_integral(F, lambda yy: _g1_outer(p, N, x, w, A, yy) * t, a, b, deg)
    return v1, v2, nf


# growth

def predicted_exponent(c: ConstructionId):
    s = c.s
    return {"beta-positive": (1 - 2 * s) / 2, "beta-negative": (1 - 4 * s) / 2,
            "beta-zero": 0.75 - s, "general-alpha": -s}[c.kind]


def iterate_for(c: ConstructionId, t, window=None, **kw) -> IterateField:
    phi, psi = build_data(c)
    win = construction_window(c) if window is None else window
    if c.kind == "beta-negative":
        return third_iterate(psi, c.params, t, win, **kw)
    return second_iterate(phi, psi, c.params, t, win, **kw)


@dataclass
class GrowthFit:
    ladder: list                      # (N, windowed norm)
    slope: float
    intercept: float
    residual: float
    predicted_exponent: float
    passed: bool
    secondary_slope: float            # fit without the two smallest N
    tolerance: float = 0.1


def fit_loglog(Ns, vals):
    lx, ly = np.log(np.asarray(Ns, float)), np.log(np.asarray(vals, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    (m, c), res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    r = float(np.sqrt(np.mean((A @ np.array([m, c]) - ly) ** 2)))
    return float(m), float(c), r


def check_ladder(ladder):
    ladder = [float(n) for n in ladder]
    if len(ladder) < 5:
        raise ValueError("ladder needs at least 5 points")
    for n in ladder:
        e = math.log2(n)
        if e != round(e):
            raise ValueError("ladder must be dyadic")
    if max(ladder) > 2.0 ** 18:
        raise ValueError("ladder exceeds N = 2^18")
    return ladder


def growth_fit(c: ConstructionId, t, ladder, tolerance=0.1, **kw) -> GrowthFit:
    """Windowed norm at each N, least-squares slope in log-log, pass flag."""
    ladder = check_ladder(ladder)
    pts = []
    for N in ladder:
        cN = c.with_N(N)
        f = iterate_for(cN, t, **kw)
        pts.append((N, windowed_norm(f, c.s)))
    m, b, r = fit_loglog(*zip(*pts))
    m2 = fit_loglog(*zip(*pts[2:]))[0] if len(pts) >= 5 else float("nan")
    pred = predicted_exponent(c)
    return GrowthFit(pts, m, b, r, pred, abs(m - pred) <= tolerance, m2, tolerance)


def crossing_point(s_values, slopes):
    """s where the fitted slope(s) line crosses zero (least squares in s)."""
    m, b = np.polyfit(np.asarray(s_values, float), np.asarray(slopes, float), 1)
    return float(-b / m)


# diagnostics used by tests and reports

def sine_bound_ratio(c: ConstructionId, t, field_=None):
    """min over E1 of |F psi2| / (gamma^-1 N^-2s xi t |A_xi| / 2)."""
    f = iterate_for(c, t) if field_ is None else field_
    g = c.gamma
    A = f.meta["overlap_measure"]
    bound = g ** -1 * c.N ** (-2 * c.s) * f.xi_nodes * t * A / 2
    return float(np.min(np.abs(f.values) / bound))


def g0_window_max(c: ConstructionId, n=33):
    """max |G0(xi1, xi - xi1, -xi)| over the overlap sets of the window."""
    phi, psi = build_data(c)
    win = construction_window(c)
    N = c.N
    x = np.linspace(win.lo, win.hi, n)
    out = 0.0
    for a in phi:
        for b in psi:
            D = (win.lead - a.lead - b.lead) * N
            lo = np.maximum(a.lo, x + D - b.hi)
            hi = np.minimum(a.hi, x + D - b.lo)
            for xx, l, h in zip(x, lo, hi):
                if h <= l:
                    continue
                y = np.linspace(l, h, n)
                G = g0_factored(c.params, ScaledFreq(a.lead, y, N), ScaledFreq(-win.lead, -xx, N))
                out = max(out, float(np.max(np.abs(G))))
    return out


def block_rms(f: IterateField, key, part):
    """RMS over the field's window of one block (prefactor included)."""
    v = f.block_values(key, part)
    L = f.window.hi - f.window.lo
    return math.sqrt(float(np.sum(f.weights * np.abs(v) ** 2)) / L)
