"""Quadrature of one-dimensional weight integrals over the real line and
empirical constants for their upper bounds.

Five integrand families are supported (``<x> = 1 + |x|``):

* ``tau-pair``     1 / (<x - a>^r1 <-x - b>^r2),       bound <a + b>^-r2
* ``quad-rough``   1 / <s2 x^2 + s1 x + s0>^r,          bound |s2|^-1/2
* ``cubic-rough``  1 / <s3 x^3 + ... + s0>^r,           bound |s3|^-1/3
* ``quad-sharp``   as quad-rough with r > 1,            bound |s2|^-1/2 <s0 - s1^2/(4 s2)>^-1/2
* ``cubic-sharp``  1 / <x^3 + s2 x^2 + s1 x + s0>^r,     bound <3 s1 - s2^2>^-1/4

The line is cut at the kinks and critical points of the integrand.  Each
bounded piece is integrated in a local coordinate anchored at a breakpoint
(local Taylor coefficients, so |p| near a root is evaluated without
cancellation) and pre-split geometrically away from the anchor.  The two
tails beyond the truncation radius R are mapped exactly onto [0, 1].
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .quadrature import adaptive_gk

LEMMAS = ("tau-pair", "quad-rough", "cubic-rough", "quad-sharp", "cubic-sharp")

# default rho grids for ratio scans
RHO_GRIDS = {
    "tau-pair": (1.01, 1.5, 2.0),
    "quad-rough": (0.51, 1.01, 1.5, 2.0),
    "cubic-rough": (0.34, 1.01, 1.5, 2.0),
    "quad-sharp": (1.01, 1.5, 2.0),
    "cubic-sharp": (1.01, 1.5, 2.0),
}

SIGMA_RANGE = (1e-2, 1e6)
DEGENERATE_S2 = 1e-8


class PreconditionError(ValueError):
    """The requested integral is outside the hypotheses of its bound."""


@dataclass(frozen=True)
class WeightIntegralSpec:
    """One weight integral.

    rho is (r,) or (r1, r2) for tau-pair.  sigma is (a, b) for tau-pair and
    the ascending coefficients (s0, s1, ...) otherwise; cubic-sharp takes
    (s0, s1, s2) or (s0, s1, s2, 1).
    """
    lemma: str
    rho: tuple
    sigma: tuple

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(float(r) for r in np.atleast_1d(self.rho)))
        object.__setattr__(self, "sigma", tuple(float(s) for s in np.atleast_1d(self.sigma)))
        check_spec(self)

    @property
    def poly(self):
        """Ascending polynomial coefficients (not for tau-pair)."""
        if self.lemma == "cubic-sharp":
            return np.array(self.sigma[:3] + (1.0,))
        return np.array(self.sigma)


def check_spec(spec):
    lem, rho, sig = spec.lemma, spec.rho, spec.sigma
    if lem not in LEMMAS:
        raise PreconditionError(f"unknown lemma {lem!r}")
    if not all(map(math.isfinite, rho + sig)):
        raise PreconditionError("rho and sigma must be finite")
    if lem == "tau-pair":
        if len(rho) != 2 or len(sig) != 2:
            raise PreconditionError("tau-pair needs rho=(r1, r2) and sigma=(a, b)")
        r1, r2 = rho
        if not (r1 > 1 and 0 <= r2 <= r1):
            raise PreconditionError("tau-pair needs r1 > 1 and 0 <= r2 <= r1")
        return
    if len(rho) != 1:
        raise PreconditionError(f"{lem} takes a single exponent")
    r = rho[0]
    if lem in ("quad-rough", "quad-sharp"):
        if len(sig) != 3:
            raise PreconditionError("quadratic weights need sigma=(s0, s1, s2)")
        if sig[2] == 0:
            raise PreconditionError("s2 must be nonzero")
        if lem == "quad-rough" and not r > 0.5:
            raise PreconditionError("quad-rough needs rho > 1/2")
    elif lem == "cubic-rough":
        if len(sig) != 4:
            raise PreconditionError("cubic-rough needs sigma=(s0, s1, s2, s3)")
        if sig[3] == 0:
            raise PreconditionError("s3 must be nonzero")
        if not r > 1 / 3:
            raise PreconditionError("cubic-rough needs rho > 1/3")
    elif lem == "cubic-sharp":
        if len(sig) == 4 and sig[3] != 1:
            raise PreconditionError("cubic-sharp is monic")
        if len(sig) not in (3, 4):
            raise PreconditionError("cubic-sharp needs sigma=(s0, s1, s2)")
    if lem in ("quad-sharp", "cubic-sharp") and not r > 1:
        raise PreconditionError(f"{lem} needs rho > 1")


@dataclass(frozen=True)
class RatioReport:
    integral: float
    bound: float
    ratio: float
    truncation_radius: float
    node_count: int
    spec: WeightIntegralSpec | None = field(default=None, compare=False)
    index: int = -1


# breakpoints and local expansions

def _polyval(c, x):
    # ascending coefficients
    y = np.zeros_like(np.asarray(x, dtype=float)) + c[-1]
    for a in c[-2::-1]:
        y = y * x + a
    return y


def _taylor(c, x0):
    """Ascending Taylor coefficients of the polynomial c about x0."""
    d = len(c) - 1
    out = np.empty(d + 1)
    cur = np.array(c, dtype=float)
    for k in range(d + 1):
        out[k] = _polyval(cur, x0) / math.factorial(k)
        cur = cur[1:] * np.arange(1, len(cur))
    return out


def _polish(c, x, iters=6):
    dc = c[1:] * np.arange(1, len(c))
    fx = abs(_polyval(c, x))
    for _ in range(iters):
        d = _polyval(dc, x)
        if d == 0 or fx == 0:
            break
        y = x - _polyval(c, x) / d
        fy = abs(_polyval(c, y)) if math.isfinite(y) else math.inf
        if not fy < fx:
            break
        x, fx = y, fy
    return x


def _real_roots(c):
    """Real roots of an ascending coefficient vector, Newton polished."""
    c = np.trim_zeros(np.asarray(c, dtype=float), "b")
    if len(c) < 2:
        return []
    out = []
    for r in np.roots(c[::-1]):
        if abs(r.imag) > 1e-4 * (1 + abs(r.real)):
            continue
        x = _polish(c, float(r.real))
        scale = np.sum(np.abs(c) * np.abs(x) ** np.arange(len(c)))
        if abs(_polyval(c, x)) <= 1e-9 * scale:
            out.append(x)
    return out


def _breakpoints(c):
    """Anchors for a polynomial weight: (x0, is_root) sorted by x0.

    Real roots of p (kinks of |p|) plus real parts of the roots of p, p'
    and p'' (near-minima of |p|).
    """
    pts = {}
    for x in _real_roots(c):
        pts[x] = True
    d1 = c[1:] * np.arange(1, len(c))
    d2 = d1[1:] * np.arange(1, len(d1))
    for q in (c, d1, d2):
        q = np.trim_zeros(np.asarray(q, dtype=float), "b")
        if len(q) < 2:
            continue
        for r in np.roots(q[::-1]):
            x = float(r.real)
            if not any(abs(x - y) <= 1e-13 * (1 + abs(y)) for y in pts):
                pts[x] = False
    xs = sorted(pts)
    # merge near-duplicates, keeping root status
    merged = []
    for x in xs:
        if merged and abs(x - merged[-1][0]) <= 1e-13 * (1 + abs(x)):
            merged[-1] = (merged[-1][0], merged[-1][1] or pts[x])
        else:
            merged.append((x, pts[x]))
    return merged


def _local_scale(tc):
    """Length over which the local expansion changes by O(1 + |c0|)."""
    c0 = abs(tc[0])
    w = math.inf
    with np.errstate(over="ignore"):
        # subnormal coefficients give an infinite scale, which min() drops
        for k in range(1, len(tc)):
            if tc[k] != 0:
                w = min(w, float((1 + c0) / np.abs(tc[k])) ** (1.0 / k))
    return w


def _geometric_cuts(w, Y, resolution):
    """Cut points 0 < w < 4w < ... < Y, each cell split `resolution` times."""
    pts = [0.0]
    y = w
    while y < Y:
        pts.append(y)
        y *= 4.0
    pts.append(Y)
    pts = np.array(pts)
    if resolution > 1:
        f = np.linspace(0, 1, resolution + 1)[:-1]
        pts = np.concatenate([a + (b - a) * f for a, b in zip(pts[:-1], pts[1:])] + [[Y]])
    return pts


class _Pieces:
    """Collects (anchor coefficient row, y-interval) pairs for one integral."""

    def __init__(self):
        self.rows, self.a, self.b, self.tag = [], [], [], []

    def add(self, row, cuts):
        t = len(self.rows)
        self.rows.append(row)
        self.a.extend(cuts[:-1])
        self.b.extend(cuts[1:])
        self.tag.extend([t] * (len(cuts) - 1))


def _poly_middle(c, rho, R, resolution):
    """Pieces covering [-R, R] for the weight 1/<p>^rho."""
    bps = _breakpoints(c)
    xs = [x for x, _ in bps]
    pcs = _Pieces()
    edges = [-R] + xs + [R]
    for i, (x0, is_root) in enumerate(bps):
        tc = _taylor(c, x0)
        if is_root:
            tc[0] = 0.0
        w = _local_scale(tc)
        for sgn, other in ((-1, edges[i]), (1, edges[i + 2])):
            # left neighbour is shared with the previous anchor: meet at the midpoint
            if (sgn < 0 and i > 0) or (sgn > 0 and i < len(bps) - 1):
                Y = 0.5 * abs(other - x0)
            else:
                Y = abs(other - x0)
            if Y <= 0:
                continue
            row = tc * float(sgn) ** np.arange(len(tc))
            pcs.add(row, _geometric_cuts(min(w, Y), Y, resolution))
    return pcs


def _poly_eval(rows, rho):
    def f(y, tag):
        cc = rows[tag]                          # (n, d+1)
        acc = np.zeros_like(y) + cc[:, -1:]
        for k in range(cc.shape[1] - 2, -1, -1):
            acc = acc * y + cc[:, k:k + 1]
        return (1.0 + np.abs(acc)) ** (-rho)
    return f


def _tail(H, kappa, R, rtol):
    """int_R^inf x^-kappa H(1/x) dx for H smooth and positive on [0, 1/R].

    With x = R v^-m the integral is m R^(1-kappa) int_0^1 v^(m(kappa-1)-1)
    H(v^m / R) dv; m = 1/(kappa-1) flattens the power when kappa < 2.
    """
    m = 1.0 / (kappa - 1.0) if kappa < 2 else 1.0
    e = m * (kappa - 1.0) - 1.0

    def g(v, tag):
        return v ** e * H(v ** m / R, tag)
    val, err, nfev = adaptive_gk(g, [0.0, 0.0], [1.0, 1.0], tag=[0, 1], rtol=rtol)
    return m * R ** (1.0 - kappa) * val, nfev


def _integrate_poly(spec, radius_factor, resolution, rtol):
    c = spec.poly
    rho = spec.rho[0]
    d = len(c) - 1
    xs = [x for x, _ in _breakpoints(c)]
    R = radius_factor * (2.0 * (1.0 + max(abs(x) for x in xs)) + 2.0 * abs(c[-1]) ** (-1.0 / d))
    pcs = _poly_middle(c, rho, R, resolution)
    rows = np.array(pcs.rows)
    mid, _, n1 = adaptive_gk(_poly_eval(rows, rho), pcs.a, pcs.b, pcs.tag, rtol=rtol)

    # tails: |p(+-x)| = x^d (y^d + |q(y)|) with y = 1/x, q(y) = sum a_k y^(d-k)
    qp = np.array(c[::-1])                      # coefficient of y^j is a_(d-j)
    qm = np.array([c[d - j] * (-1) ** (d - j) for j in range(d + 1)])
    qs = np.stack([qp, qm])

    def H(y, tag):
        q = qs[tag]
        acc = np.zeros_like(y) + q[:, -1:]
        for j in range(d - 1, -1, -1):
            acc = acc * y + q[:, j:j + 1]
        return (y ** d + np.abs(acc)) ** (-rho)
    tail, n2 = _tail(H, d * rho, R, rtol)
    return mid + tail, R, n1 + n2


def _integrate_tau(spec, radius_factor, resolution, rtol):
    r1, r2 = spec.rho
    a, b = spec.sigma
    R = radius_factor * 2.0 * (1.0 + max(abs(a), abs(b)))
    # kinks at x = a and x = -b; weight scale is 1 at each kink
    bps = sorted({a, -b})
    edges = [-R] + bps + [R]
    pcs = _Pieces()
    for i, x0 in enumerate(bps):
        for sgn, other in ((-1, edges[i]), (1, edges[i + 2])):
            if (sgn < 0 and i > 0) or (sgn > 0 and i < len(bps) - 1):
                Y = 0.5 * abs(other - x0)
            else:
                Y = abs(other - x0)
            if Y > 0:
                pcs.add((x0, float(sgn)), _geometric_cuts(min(1.0, Y), Y, resolution))
    rows = np.array(pcs.rows)

    def f(y, tag):
        x = rows[tag, :1] + rows[tag, 1:] * y
        return (1 + np.abs(x - a)) ** (-r1) * (1 + np.abs(x + b)) ** (-r2)
    mid, _, n1 = adaptive_gk(f, pcs.a, pcs.b, pcs.tag, rtol=rtol)

    lin = np.array([[1 - a, 1 + b], [1 + a, 1 - b]])

    def H(y, tag):
        k = lin[tag]
        return (1 + k[:, :1] * y) ** (-r1) * (1 + k[:, 1:] * y) ** (-r2)
    tail, n2 = _tail(H, r1 + r2, R, rtol)
    return mid + tail, R, n1 + n2


def integrate_report(spec: WeightIntegralSpec, radius_factor=1.0, resolution=1, rtol=1e-10):
    """Integral with truncation radius and node count (bound fields unset)."""
    check_spec(spec)
    if spec.lemma == "tau-pair":
        val, R, n = _integrate_tau(spec, radius_factor, resolution, rtol / resolution)
    else:
        val, R, n = _integrate_poly(spec, radius_factor, resolution, rtol / resolution)
    return val, R, n


def integrate_weight(spec: WeightIntegralSpec, **kw) -> float:
    """Integral of the weight over the real line."""
    return integrate_report(spec, **kw)[0]


def bound_value(spec: WeightIntegralSpec) -> float:
    """Right-hand side of the bound with constant 1."""
    check_spec(spec)
    s = spec.sigma
    if spec.lemma == "tau-pair":
        return (1 + abs(s[0] + s[1])) ** (-spec.rho[1])
    if spec.lemma == "quad-rough":
        return abs(s[2]) ** -0.5
    if spec.lemma == "cubic-rough":
        return abs(s[3]) ** (-1.0 / 3.0)
    if spec.lemma == "quad-sharp":
        return abs(s[2]) ** -0.5 * (1 + abs(s[0] - s[1] ** 2 / (4 * s[2]))) ** -0.5
    return (1 + abs(3 * s[1] - s[2] ** 2)) ** -0.25


def ratio_report(spec, index=-1, **kw) -> RatioReport:
    val, R, n = integrate_report(spec, **kw)
    b = bound_value(spec)
    return RatioReport(val, b, val / b, R, n, spec, index)


# sampling

def _log_uniform(rng, size):
    lo, hi = np.log10(SIGMA_RANGE)
    mag = 10.0 ** rng.uniform(lo, hi, size)
    return mag * rng.choice([-1.0, 1.0], size)


def draw_sigmas(lemma, n_samples, seed):
    """Seeded coefficient draws; also returns the tau-pair exponent fractions."""
    rng = np.random.default_rng(seed)
    width = {"tau-pair": 2, "quad-rough": 3, "quad-sharp": 3,
             "cubic-rough": 4, "cubic-sharp": 3}[lemma]
    sig = _log_uniform(rng, (n_samples, width))
    frac = rng.uniform(0.0, 1.0, n_samples)
    if lemma in ("quad-rough", "quad-sharp"):
        # near-degenerate leading coefficients are excluded
        bad = np.abs(sig[:, 2]) < DEGENERATE_S2
        sig[bad, 2] = np.copysign(DEGENERATE_S2, sig[bad, 2])
    return sig, frac


def make_spec(lemma, rho, sigma, frac=1.0):
    if lemma == "tau-pair":
        return WeightIntegralSpec(lemma, (rho, frac * rho), tuple(sigma))
    return WeightIntegralSpec(lemma, (rho,), tuple(sigma))


@dataclass
class ScanResult:
    lemma: str
    best: RatioReport                        # maximum over every rho and sample
    per_rho: dict                            # rho -> maximal RatioReport
    reports: list                            # every RatioReport, in (rho, index) order


def ratio_scan(lemma, rho_grid=None, n_samples=200, seed=0, **kw) -> ScanResult:
    """Maximal integral/bound ratio over seeded draws; deterministic in seed.

    The same coefficient draws are reused for every exponent in rho_grid.
    Ties are broken by (ratio, sample index).
    """
    if lemma not in LEMMAS:
        raise PreconditionError(f"unknown lemma {lemma!r}")
    rho_grid = tuple(RHO_GRIDS[lemma] if rho_grid is None else rho_grid)
    sig, frac = draw_sigmas(lemma, n_samples, seed)
    reports, per_rho = [], {}
    for rho in rho_grid:
        reps = [ratio_report(make_spec(lemma, rho, sig[i], frac[i]), index=i, **kw)
                for i in range(n_samples)]
        reports.extend(reps)
        per_rho[rho] = max(reps, key=lambda r: (r.ratio, r.index))
    best = max(per_rho.values(), key=lambda r: (r.ratio, r.index))
    return ScanResult(lemma, best, per_rho, reports)


def report_rows(result: ScanResult):
    """CSV rows: lemma, rho..., sigma..., integral, bound, ratio."""
    rows = []
    for r in result.reports:
        s = r.spec
        rows.append({"lemma": s.lemma, "index": r.index,
                     **{f"rho{i}": v for i, v in enumerate(s.rho)},
                     **{f"sigma{i}": v for i, v in enumerate(s.sigma)},
                     "integral": r.integral, "bound": r.bound, "ratio": r.ratio,
                     "truncation_radius": r.truncation_radius, "node_count": r.node_count})
    return rows
