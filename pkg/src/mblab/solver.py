"""Pseudospectral integrating-factor RK4 solver for

    u_t + a1 u_xxx + b1 u_x = -v v_x
    v_t + a2 v_xxx + b2 v_x = -(u v)_x

on a periodic box, with Duhamel-iterate cross-checks and the scaling check.

States hold Fourier-series coefficients c_k = fft(f)/M in numpy order, so
products are plain convolutions of coefficients and L2 norms are
L * sum |c_k|^2.  Internally the half spectrum (rfft) is stepped, which keeps
position fields real and the spectrum Hermitian by construction.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .dispersion import PhaseParams


class SolverDivergence(FloatingPointError):
    def __init__(self, step, msg="non-finite state"):
        super().__init__(f"{msg} at step {step}")
        self.step = step


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    L: float
    M: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.M < 64 or self.M & (self.M - 1):
            raise ValueError("M must be a power of two >= 64")

    @property
    def x(self):
        return self.L * np.arange(self.M) / self.M

    @property
    def k(self):
        """Full-spectrum wavenumbers in numpy order."""
        return 2 * np.pi * np.fft.fftfreq(self.M, d=self.L / self.M)

    @property
    def kr(self):
        """Half-spectrum wavenumbers (rfft order)."""
        return 2 * np.pi * np.fft.rfftfreq(self.M, d=self.L / self.M)

    @property
    def kmax_index(self):
        """Largest retained |index| under the 2/3 rule."""
        return (self.M - 1) // 3

    @property
    def band(self):
        """Mask of retained half-spectrum modes."""
        return np.arange(self.M // 2 + 1) <= self.kmax_index


def to_half(c):
    return np.asarray(c)[: c.shape[-1] // 2 + 1]


def to_full(h, M):
    """Hermitian extension of a half spectrum to numpy order."""
    out = np.zeros(M, dtype=complex)
    out[: M // 2 + 1] = h
    out[M // 2 + 1:] = np.conj(h[1: M // 2][::-1])
    return out


@dataclass
class SpectralState:
    grid: GridSpec
    u_half: np.ndarray
    v_half: np.ndarray
    time: float = 0.0

    @property
    def u_hat(self):
        return to_full(self.u_half, self.grid.M)

    @property
    def v_hat(self):
        return to_full(self.v_half, self.grid.M)

    def fields(self):
        M = self.grid.M
        return np.fft.irfft(self.u_half * M, M), np.fft.irfft(self.v_half * M, M)

    @classmethod
    def from_fields(cls, grid, u, v, time=0.0, dealias=True):
        M = grid.M
        uh = np.fft.rfft(np.asarray(u, float)) / M
        vh = np.fft.rfft(np.asarray(v, float)) / M
        if dealias:
            uh = np.where(grid.band, uh, 0)
            vh = np.where(grid.band, vh, 0)
        return cls(grid, uh, vh, time)

    @classmethod
    def from_functions(cls, grid, f, g, center=True):
        """Sample f, g at x - L/2 (centre of the box) when center is set."""
        x = grid.x - (grid.L / 2 if center else 0.0)
        return cls.from_fields(grid, f(x), g(x))

    def copy(self):
        return SpectralState(self.grid, self.u_half.copy(), self.v_half.copy(), self.time)


@dataclass(frozen=True)
class SolverParams:
    p1: PhaseParams = PhaseParams(1.0, 0.0)
    p2: PhaseParams = PhaseParams(4.0, 0.0)
    dt: float = 1e-3
    T: float = 1.0

    def __post_init__(self):
        if not self.dt > 0 or not self.T >= 0:
            raise ValueError("dt must be positive and T non-negative")


@dataclass
class Diagnostics:
    times: list = field(default_factory=list)
    mass_u: list = field(default_factory=list)
    mass_v: list = field(default_factory=list)
    l2_energy: list = field(default_factory=list)
    hamiltonian: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.times, self.mass_u, self.mass_v, self.l2_energy, self.hamiltonian))


def _symbol(p: PhaseParams, k):
    return p.alpha * k ** 3 - p.beta * k


def linear_propagate(state: SpectralState, p1: PhaseParams, p2: PhaseParams, dt) -> SpectralState:
    """Exact linear flow: each mode times e^{i phi(k) dt}."""
    k = state.grid.kr
    return SpectralState(state.grid, state.u_half * np.exp(1j * _symbol(p1, k) * dt),
                         state.v_half * np.exp(1j * _symbol(p2, k) * dt), state.time + dt)


def _nonlinear(grid, uh, vh):
    M = grid.M
    u = np.fft.irfft(uh * M, M)
    v = np.fft.irfft(vh * M, M)
    ik = 1j * grid.kr
    nu = -ik * np.fft.rfft(0.5 * v * v) / M
    nv = -ik * np.fft.rfft(u * v) / M
    band = grid.band
    return np.where(band, nu, 0), np.where(band, nv, 0)


def nonlinear_speed(state):
    """dt * max|k| * max(|u|, |v|) must stay O(1) for the RK4 substeps."""
    u, v = state.fields()
    kmax = 2 * np.pi * state.grid.kmax_index / state.grid.L
    return kmax * max(np.max(np.abs(u)), np.max(np.abs(v)), 0.0)


def check_stability(state, params, limit=2.0):
    c = params.dt * nonlinear_speed(state)
    if c > limit:
        raise ValueError(f"dt * max|k| * max|u,v| = {c:.3g} exceeds {limit}")


def step(state: SpectralState, params: SolverParams, index=0) -> SpectralState:
    """One integrating-factor RK4 step; the linear part is exact."""
    g = state.grid
    h = params.dt
    k = g.kr
    Eu = np.exp(0.5j * _symbol(params.p1, k) * h)
    Ev = np.exp(0.5j * _symbol(params.p2, k) * h)
    u, v = state.u_half, state.v_half
    a_u, a_v = _nonlinear(g, u, v)
    b_u, b_v = _nonlinear(g, Eu * (u + 0.5 * h * a_u), Ev * (v + 0.5 * h * a_v))
    c_u, c_v = _nonlinear(g, Eu * u + 0.5 * h * b_u, Ev * v + 0.5 * h * b_v)
    d_u, d_v = _nonlinear(g, Eu * Eu * u + h * Eu * c_u, Ev * Ev * v + h * Ev * c_v)
    un = Eu * Eu * u + h / 6 * (Eu * Eu * a_u + 2 * Eu * (b_u + c_u) + d_u)
    vn = Ev * Ev * v + h / 6 * (Ev * Ev * a_v + 2 * Ev * (b_v + c_v) + d_v)
    if not (np.all(np.isfinite(un)) and np.all(np.isfinite(vn))):
        raise SolverDivergence(index)
    # the band mask is applied inside _nonlinear; modes outside stay at zero
    return SpectralState(g, un, vn, state.time + h)


def l2_norm(grid, h):
    """L2 norm of the real field with half spectrum h."""
    w = np.full(h.shape, 2.0)
    w[0] = 1.0
    if grid.M % 2 == 0:
        w[-1] = 1.0
    return math.sqrt(grid.L * float(np.sum(w * np.abs(h) ** 2)))


def diagnostics(state: SpectralState, params: SolverParams):
    """(mass_u, mass_v, l2_energy, hamiltonian).

    hamiltonian = 1/2 int (a1 u_x^2 - b1 u^2 + a2 v_x^2 - b2 v^2 - u v^2); with
    this normalisation the system reads u_t = d/dx dH/du, v_t = d/dx dH/dv.
    The cubic term is exact on the grid since 3 * kmax_index < M.
    """
    g = state.grid
    L, M = g.L, g.M
    u, v = state.fields()
    ux = np.fft.irfft(1j * g.kr * state.u_half * M, M)
    vx = np.fft.irfft(1j * g.kr * state.v_half * M, M)
    mean = lambda f: L * float(np.mean(f))
    p1, p2 = params.p1, params.p2
    H = 0.5 * mean(p1.alpha * ux * ux - p1.beta * u * u + p2.alpha * vx * vx - p2.beta * v * v - u * v * v)
    return (L * state.u_half[0].real, L * state.v_half[0].real,
            l2_norm(g, state.u_half) ** 2 + l2_norm(g, state.v_half) ** 2, H)


def integrate(state0: SpectralState, params: SolverParams, sample_times=None):
    """Step to params.T; returns (states at sample times, Diagnostics)."""
    check_stability(state0, params)
    n = int(round(params.T / params.dt))
    if abs(n * params.dt - params.T) > 1e-9 * max(1.0, params.T):
        raise ValueError("T must be a multiple of dt")
    if sample_times is None:
        sample_times = [0.0, params.T]
    idx = sorted({int(round(t / params.dt)) for t in sample_times})
    if idx and (idx[0] < 0 or idx[-1] > n):
        raise ValueError("sample times outside [0, T]")
    want = set(idx)
    diag = Diagnostics()
    traj = []
    s = state0.copy()

    def record(st):
        traj.append(st.copy())
        m_u, m_v, e, H = diagnostics(st, params)
        diag.times.append(st.time)
        diag.mass_u.append(m_u)
        diag.mass_v.append(m_v)
        diag.l2_energy.append(e)
        diag.hamiltonian.append(H)

    if 0 in want:
        record(s)
    for i in range(1, n + 1):
        s = step(s, params, i)
        if i in want:
            record(s)
    return traj, diag


def relative_drift(series):
    a = np.asarray(series, float)
    return float(np.max(np.abs(a - a[0])) / abs(a[0]))


# Duhamel iterates on the grid

def _product_half(grid, ah, bh):
    M = grid.M
    a = np.fft.irfft(ah * M, M)
    b = np.fft.irfft(bh * M, M)
    return np.where(grid.band, np.fft.rfft(a * b) / M, 0)


def _time_nodes(t, rate, n=16):
    """Composite Gauss nodes on [0, t], panels short enough for rate * panel <= 1."""
    m = max(1, math.ceil(rate * t))
    gx, gw = leggauss(n)
    e = np.linspace(0.0, t, m + 1)
    tau = (0.5 * (e[:-1] + e[1:]))[:, None] + (0.5 * np.diff(e))[:, None] * gx[None, :]
    w = (0.5 * np.diff(e))[:, None] * gw[None, :]
    return tau.ravel(), w.ravel()


def duhamel_iterates(phi_half, psi_half, grid: GridSpec, p1, p2, t):
    """(phi1, psi1, phi2, psi2) half spectra at time t.

    phi2 = -int_0^t S1(t - s) d/dx (psi1^2)(s) ds and
    psi2 = -2 int_0^t S2(t - s) d/dx (phi1 psi1)(s) ds,
    by composite Gauss quadrature in s (products dealiased as in the solver).
    """
    k = grid.kr
    w1, w2 = _symbol(p1, k), _symbol(p2, k)
    band = grid.band
    rate = 3 * float(np.max(np.abs(np.concatenate([w1[band], w2[band]])))) + 1.0
    tau, wt = _time_nodes(t, rate)
    ik = 1j * k
    phi2 = np.zeros_like(phi_half, dtype=complex)
    psi2 = np.zeros_like(psi_half, dtype=complex)
    for s, w in zip(tau, wt):
        f1 = phi_half * np.exp(1j * w1 * s)
        g1 = psi_half * np.exp(1j * w2 * s)
        phi2 += w * np.exp(1j * w1 * (t - s)) * (-ik) * _product_half(grid, g1, g1)
        psi2 += w * np.exp(1j * w2 * (t - s)) * (-2 * ik) * _product_half(grid, f1, g1)
    return phi_half * np.exp(1j * w1 * t), psi_half * np.exp(1j * w2 * t), phi2, psi2


@dataclass
class CrosscheckReport:
    deltas: list
    residual_u: list
    residual_v: list
    slope_u: float
    slope_v: float
    psi2_max: float
    passed: bool
    expected: float = 3.0
    tolerance: float = 0.3


def _slope(d, r):
    d, r = np.asarray(d, float), np.asarray(r, float)
    return float(np.polyfit(np.log(d), np.log(r), 1)[0])


def picard_crosscheck(state_data: SpectralState, params: SolverParams, delta_ladder=(1e-1, 1e-2, 1e-3),
                      t=None) -> CrosscheckReport:
    """Residuals of v - d psi1 - d^2/2 psi2 and u - d phi1 - d^2/2 phi2 over a d ladder."""
    t = params.T if t is None else t
    g = state_data.grid
    run = replace(params, T=t)
    phi1, psi1, phi2, psi2 = duhamel_iterates(state_data.u_half, state_data.v_half, g,
                                              params.p1, params.p2, t)
    ru, rv = [], []
    for d in delta_ladder:
        s0 = SpectralState(g, d * state_data.u_half, d * state_data.v_half)
        if d == 0:
            ru.append(0.0)
            rv.append(0.0)
            continue
        traj, _ = integrate(s0, run, [t])
        s = traj[-1]
        ru.append(l2_norm(g, s.u_half - d * phi1 - 0.5 * d * d * phi2))
        rv.append(l2_norm(g, s.v_half - d * psi1 - 0.5 * d * d * psi2))
    pos = [i for i, d in enumerate(delta_ladder) if d > 0]
    su = _slope([delta_ladder[i] for i in pos], [ru[i] for i in pos])
    sv = _slope([delta_ladder[i] for i in pos], [rv[i] for i in pos])
    ok = abs(su - 3) <= 0.3 and abs(sv - 3) <= 0.3
    return CrosscheckReport(list(delta_ladder), ru, rv, su, sv, float(np.max(np.abs(psi2))), ok)


def discrete_second_iterate(phi_half, psi_half, grid: GridSpec, p1, p2, t):
    """psi2 on the grid from the closed-form kernel, in the picard convention
    (2 i k e^{i phi2(k) t} sum phi^ psi^ K(G0)); the Duhamel value is i times this."""
    from .picard import kernel
    M = grid.M
    k = grid.k
    n = np.fft.fftfreq(M, 1.0 / M).astype(int)
    band = np.abs(n) <= grid.kmax_index
    phi = to_full(phi_half, M)
    psi = to_full(psi_half, M)
    out = np.zeros(M, dtype=complex)
    idx = np.nonzero(band & (np.abs(phi) > 0))[0]
    for i in idx:
        j = (np.arange(M) - i) % M                      # psi index so that k1 + k2 = k
        n2 = n[j]
        ok = band[j] & (np.abs(n[i] + n2) <= grid.kmax_index) & band
        G = _symbol(p1, k[i]) + _symbol(p2, k[j]) - _symbol(p2, k)
        out += np.where(ok, phi[i] * psi[j] * kernel(G, t), 0)
    return to_half(2j * k * np.exp(1j * _symbol(p2, k) * t) * out)


# scaling

def rescale_state(state: SpectralState, lam, M_new=None) -> SpectralState:
    """u^lam(x) = lam^-2 u(x/lam) on the lam*L box; mode n keeps index n."""
    M_new = state.grid.M if M_new is None else M_new
    if M_new < state.grid.M:
        raise ResolutionError("rescaled grid must have at least as many modes")
    g = GridSpec(state.grid.L * lam, M_new)
    def pad(h):
        out = np.zeros(M_new // 2 + 1, dtype=complex)
        out[: h.size] = h
        return out * lam ** -2
    s = SpectralState(g, pad(state.u_half), pad(state.v_half), state.time * lam ** 3)
    s.u_half[~g.band] = 0
    s.v_half[~g.band] = 0
    return s


def values_at_scaled_points(state: SpectralState, M_ref):
    """u, v at x = lam * x_j, x_j the nodes of an M_ref grid (index-aligned)."""
    M = state.grid.M
    out = []
    for h in (state.u_half, state.v_half):
        full = to_full(h, M)
        n = np.fft.fftfreq(M, 1.0 / M).astype(int)
        folded = np.zeros(M_ref, dtype=complex)
        np.add.at(folded, n % M_ref, full)
        out.append(np.real(np.fft.ifft(folded) * M_ref))
    return out


def scaling_covariance_check(state0: SpectralState, p: PhaseParams, lam, T, dt=1e-3, M_factor=None,
                             p1: PhaseParams = PhaseParams(1.0, 0.0)):
    """max |lam^-2 (u, v)(x, T) - (u', v')(lam x, lam^3 T)| where (u', v') solves
    the (alpha, lam^-2 beta) system from the rescaled data on the lam*L box."""
    if lam < 1:
        raise ValueError("lambda must be >= 1")
    if M_factor is None:
        M_factor = 2 ** math.ceil(math.log2(lam)) if lam > 1 else 1
    base = SolverParams(p1, p, dt, T)
    a = integrate(state0, base, [T])[0][-1]
    s_lam = rescale_state(state0, lam, state0.grid.M * M_factor)
    q1 = PhaseParams(p1.alpha, p1.beta / lam ** 2)
    q2 = PhaseParams(p.alpha, p.beta / lam ** 2)
    b = integrate(s_lam, SolverParams(q1, q2, dt * lam ** 3, T * lam ** 3), [T * lam ** 3])[0][-1]
    ua, va = a.fields()
    ub, vb = values_at_scaled_points(b, a.grid.M)
    return float(max(np.max(np.abs(ua / lam ** 2 - ub)), np.max(np.abs(va / lam ** 2 - vb))))


def snapshot_rows(state: SpectralState):
    """(x, u, v) rows and (xi, |u_hat|, |v_hat|) rows in numpy mode order."""
    u, v = state.fields()
    g = state.grid
    return (list(zip(g.x, u, v)),
            list(zip(g.k, np.abs(state.u_hat), np.abs(state.v_hat))))


def gaussian_bump(k0, width, amplitude=1.0):
    """x -> amplitude * exp(-x^2/(2 width^2)) cos(k0 x), a smooth frequency-localized datum."""
    return lambda x: amplitude * np.exp(-0.5 * (x / width) ** 2) * np.cos(k0 * x)
