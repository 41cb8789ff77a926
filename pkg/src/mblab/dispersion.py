"""Phase and resonance polynomials, roots of the resonance quadratic,
scaling, and discrete Sobolev / X^{s,b} norms.

All functions accept scalars or numpy arrays.  The ``*_factored`` variants
also accept :class:`ScaledFreq` values; these keep the O(N) part of a
frequency separate so that resonance functions of size O(1) can be
evaluated at N ~ 1e5 without cancellation.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate


def bracket(x):
    """Japanese bracket <x> = 1 + |x|."""
    return 1.0 + np.abs(x)


@dataclass(frozen=True)
class PhaseParams:
    """Dispersion pair (alpha, beta) of phi(xi) = alpha xi^3 - beta xi."""
    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")

    @property
    def beta1(self):
        if self.beta < 0:
            raise ValueError("beta1 = sqrt(beta/3) needs beta >= 0")
        return math.sqrt(self.beta / 3.0)

    @property
    def beta2(self):
        if self.beta > 0:
            raise ValueError("beta2 = sqrt(-beta/3) needs beta <= 0")
        return math.sqrt(-self.beta / 3.0)


@dataclass(frozen=True)
class FreqTriple:
    """Zero-sum triple; only eta1, eta2 are stored."""
    eta1: object
    eta2: object

    @property
    def eta3(self):
        return -self.eta1 - self.eta2

    def as_tuple(self):
        return self.eta1, self.eta2, self.eta3


@dataclass(frozen=True)
class FreqQuad:
    """Zero-sum quadruple; only eta1..eta3 are stored."""
    eta1: object
    eta2: object
    eta3: object

    @property
    def eta4(self):
        return -self.eta1 - self.eta2 - self.eta3

    def as_tuple(self):
        return self.eta1, self.eta2, self.eta3, self.eta4


@dataclass(frozen=True)
class RootInfo:
    kind: str            # 'two-real' | 'double-root' | 'complex-pair'
    c1: float | None = None
    c2: float | None = None

    @property
    def real(self):
        return self.kind != "complex-pair"


@dataclass(frozen=True)
class ScaledFreq:
    """Frequency lead*scale + rest with the large part kept symbolic.

    Linear combinations act on ``lead`` and ``rest`` separately, so
    combinations whose leads cancel are exact in floating point.
    """
    lead: float
    rest: object
    scale: float

    @property
    def value(self):
        return self.lead * self.scale + self.rest

    def _check(self, other):
        if other.scale != self.scale:
            raise ValueError("ScaledFreq scales differ")

    def __add__(self, other):
        if isinstance(other, ScaledFreq):
            self._check(other)
            return ScaledFreq(self.lead + other.lead, self.rest + other.rest, self.scale)
        return ScaledFreq(self.lead, self.rest + other, self.scale)

    __radd__ = __add__

    def __neg__(self):
        return ScaledFreq(-self.lead, -self.rest, self.scale)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        if isinstance(k, ScaledFreq):
            raise TypeError("ScaledFreq only supports scalar multiplication")
        return ScaledFreq(k * self.lead, k * self.rest, self.scale)

    __rmul__ = __mul__


def value_of(x):
    return x.value if isinstance(x, ScaledFreq) else x


def phase(p: PhaseParams, xi):
    return p.alpha * xi ** 3 - p.beta * xi


def g0(p: PhaseParams, t: FreqTriple):
    """eta1^3 + phi(eta2) + phi(eta3) on the zero-sum surface."""
    return t.eta1 ** 3 + phase(p, t.eta2) + phase(p, t.eta3)


def g1(p: PhaseParams, t: FreqTriple):
    """phi(eta1) + phi(eta2) + eta3^3."""
    return phase(p, t.eta1) + phase(p, t.eta2) + t.eta3 ** 3


def g2(p: PhaseParams, q: FreqQuad):
    """Sum of four phases on the zero-sum surface."""
    return sum(phase(p, e) for e in q.as_tuple())


def g2_product(p: PhaseParams, q: FreqQuad):
    e1, e2, e3, _ = q.as_tuple()
    return -3.0 * p.alpha * (e1 + e2) * (e1 + e3) * (e2 + e3)


def f_quadratic(alpha, x):
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    return x * x + x + (alpha - 1.0) / (3.0 * alpha)


def m_alpha(alpha):
    """Vertex value f(-1/2) = (alpha-4)/(12 alpha)."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    return (alpha - 4.0) / (12.0 * alpha)


def roots_of_f(alpha) -> RootInfo:
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if alpha == 4:
        return RootInfo("double-root", -0.5, -0.5)
    if alpha < 0 or alpha > 4:
        return RootInfo("complex-pair")
    h = 0.5 * math.sqrt((4.0 - alpha) / (3.0 * alpha))
    return RootInfo("two-real", -0.5 - h, -0.5 + h)


def g0_closed(p: PhaseParams, t: FreqTriple):
    """-3 alpha eta1^3 f(eta3/eta1) + beta eta1 (eta1 != 0)."""
    e1 = t.eta1
    return -3.0 * p.alpha * e1 ** 3 * f_quadratic(p.alpha, t.eta3 / e1) + p.beta * e1


def g0_alpha4(p: PhaseParams, t: FreqTriple):
    """alpha = 4 form -3 eta1 [(2 eta2 + eta1)^2 - beta/3]."""
    if p.alpha != 4:
        raise ValueError("alpha = 4 only")
    w = 2 * t.eta2 + t.eta1
    return -3.0 * t.eta1 * (w * w - p.beta / 3.0)


def g0_alpha4_split(p: PhaseParams, t: FreqTriple):
    """alpha = 4, beta > 0: -3 eta1 (w + beta1)(w - beta1), w = 2 eta2 + eta1."""
    if p.alpha != 4 or p.beta <= 0:
        raise ValueError("alpha = 4 and beta > 0 only")
    b1 = p.beta1
    w = 2 * t.eta2 + t.eta1
    return -3.0 * t.eta1 * (w + b1) * (w - b1)


def g0_cofactor(p: PhaseParams, eta1, eta3):
    """G0 / eta1 = beta - 3 alpha eta1^2 f(eta3/eta1), from the root factorization.

    Arguments may be ScaledFreq; the linear forms are built before any
    product so that cancelling O(N) parts drop out exactly.
    """
    info = roots_of_f(p.alpha)
    if info.real:
        a = value_of(eta3 - info.c1 * eta1)
        b = value_of(eta3 - info.c2 * eta1)
        q = a * b
    else:
        w = value_of(eta3 + 0.5 * eta1)
        e1 = value_of(eta1)
        q = w * w + m_alpha(p.alpha) * e1 * e1
    return p.beta - 3.0 * p.alpha * q


def g0_factored(p: PhaseParams, eta1, eta3):
    """G0(eta1, -eta1-eta3, eta3), cancellation-safe."""
    return value_of(eta1) * g0_cofactor(p, eta1, eta3)


def g1_factored(p: PhaseParams, eta1, eta3):
    """G1(eta1, -eta1-eta3, eta3) = G0(eta3, ., eta1), cancellation-safe."""
    return g0_factored(p, eta3, eta1)


def g2_factored(p: PhaseParams, eta1, eta2, eta3):
    """G2(eta1, eta2, eta3, -eta1-eta2-eta3) as a product of pair sums."""
    return (-3.0 * p.alpha * value_of(eta1 + eta2) * value_of(eta1 + eta3)
            * value_of(eta2 + eta3))


def lambda_shift(alpha, beta):
    """beta / sqrt(3 alpha (4 - alpha)), alpha in (0, 4)."""
    if not 0 < alpha < 4:
        raise ValueError("lambda_shift needs alpha in (0, 4)")
    return beta / math.sqrt(3.0 * alpha * (4.0 - alpha))


def scale_system(p: PhaseParams, lam) -> PhaseParams:
    """Coefficients of the system satisfied by the lambda-rescaled solution."""
    if not lam >= 1:
        raise ValueError("scaling parameter must be >= 1")
    return PhaseParams(p.alpha, p.beta / lam ** 2)


def rescale_field(u, lam):
    """u -> u^lam(x, t) = lam^-2 u(x/lam, t/lam^3) for a callable u(x, t)."""
    if not lam >= 1:
        raise ValueError("scaling parameter must be >= 1")
    return lambda x, t: u(x / lam, t / lam ** 3) / lam ** 2


@dataclass(frozen=True)
class NormSpec:
    s: float = 0.0
    b: float = 0.0


@dataclass(frozen=True)
class SampledSpectrum:
    """Samples of a frequency-side function with a quadrature rule tag.

    weight_rule is 'trapezoid', 'simpson', or 'weights' (explicit
    quadrature weights supplied in ``weights``).
    """
    xi_nodes: np.ndarray
    values: np.ndarray
    weight_rule: str = "trapezoid"
    weights: np.ndarray | None = None

    def __post_init__(self):
        xi = np.asarray(self.xi_nodes, dtype=float)
        v = np.asarray(self.values)
        if xi.shape != v.shape or xi.ndim != 1:
            raise ValueError("nodes and values must be 1-d of equal length")
        if xi.size > 1 and np.any(np.diff(xi) <= 0):
            raise ValueError("xi_nodes must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")


def sobolev_norm(spec: SampledSpectrum, s):
    """(int <xi>^{2s} |g(xi)|^2 dxi)^{1/2} by the declared rule."""
    xi = np.asarray(spec.xi_nodes, dtype=float)
    if xi.size == 0:
        raise ValueError("empty spectrum")
    y = bracket(xi) ** (2 * s) * np.abs(spec.values) ** 2
    rule = spec.weight_rule
    if rule == "weights":
        if spec.weights is None or len(spec.weights) != xi.size:
            raise ValueError("explicit weights missing")
        total = float(np.dot(spec.weights, y))
    elif xi.size < 2:
        raise ValueError("need at least two nodes for a composite rule")
    elif rule == "trapezoid":
        total = float(integrate.trapezoid(y, xi))
    elif rule == "simpson":
        total = float(integrate.simpson(y, x=xi))
    else:
        raise ValueError(f"unknown weight rule {rule!r}")
    return math.sqrt(max(total, 0.0))


def xsb_norm(w_hat, xi, tau, spec: NormSpec, p: PhaseParams, cell=None):
    """Cell-sum approximation of ||<xi>^s <tau - phi(xi)>^b w||_{L^2}.

    w_hat has shape (len(xi), len(tau)) and holds cell-centre samples.
    ``cell`` = (dxi, dtau) overrides the spacing (needed for one-cell grids).
    """
    w = np.asarray(w_hat)
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if w.size == 0 or xi.size == 0 or tau.size == 0:
        raise ValueError("empty grid")
    if w.shape != (xi.size, tau.size):
        raise ValueError("w_hat shape must be (len(xi), len(tau))")
    if cell is None:
        if xi.size < 2 or tau.size < 2:
            raise ValueError("cell sizes required for degenerate grids")
        cell = (xi[1] - xi[0], tau[1] - tau[0])
    X, T = np.meshgrid(xi, tau, indexing="ij")
    wt = bracket(X) ** (2 * spec.s) * bracket(T - phase(p, X)) ** (2 * spec.b)
    return math.sqrt(float(np.sum(wt * np.abs(w) ** 2)) * cell[0] * cell[1])
