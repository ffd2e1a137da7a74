"""Polar-form dynamics about a plane wave and nonlinear decay/growth runs.

Writing P = (r0 + rho) * exp(i*(theta0*x + phi)) and Omega = w0 + h turns the
coupled system (with unit linear growth) into real evolution equations for
pi = (rho, phi, h) on a 1D periodic domain:

    rho_t = rho_xx - (w0+h)*rho_x - u(r)*(2*rho_x*(theta0+phi_x) + r*phi_xx)
            + r*(1 - r^2 - (theta0+phi_x)^2 - s1(r)*h_x)
    phi_t = -(w0+h)*(theta0+phi_x) + (2*rho_x*(theta0+phi_x) + u(r)*rho_xx)/r
            - u(r)*(theta0+phi_x)^2 + phi_xx - v(r)*r^2 - s2(r)*h_x
    h_t   = m*h_xx - (w0+h)*h_x - 2*kappa(r)*r*rho_x

with r = r0 + rho.  The integrator advances the exact linearization of this
system by per-mode 3x3 matrix exponentials and treats the strictly nonlinear
remainder explicitly, so per-mode growth/decay rates in the linear regime
reproduce the dispersion eigenvalues to round-off plus O(amplitude).

The polar chart requires r0 + rho > 0 pointwise; breakdown raises
:class:`ChartBreakdown`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import dispersion
from .model import PlaneWave, SystemParams
from .solver import SolverConfig, StepUnstable
from .spectral import Grid, SpectralField

CHART_FLOOR_FRACTION = 0.01


class ChartBreakdown(RuntimeError):
    """The polar amplitude r0 + rho reached zero during evolution."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class AmplitudeVanishes(ValueError):
    """|P| is not bounded away from zero; the polar chart does not apply."""


@dataclass
class PerturbationState:
    """Real perturbation fields (rho, phi, h) on a 1D periodic grid."""

    grid: Grid
    rho: np.ndarray
    phi: np.ndarray
    h: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.grid.dim != 1:
            raise ValueError("polar perturbations are one-dimensional")
        for name in ("rho", "phi", "h"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.grid.shape:
                raise ValueError(f"{name} does not match the grid shape")
            setattr(self, name, arr)

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "PerturbationState":
        z = np.zeros(grid.shape)
        return cls(grid=grid, rho=z.copy(), phi=z.copy(), h=z.copy(), t=t)

    def stack(self) -> np.ndarray:
        return np.stack([self.rho, self.phi, self.h])

    def joint_l2(self) -> float:
        return float(np.sqrt(np.mean(self.rho**2 + self.phi**2 + self.h**2)))


@dataclass
class RemainderBundle:
    """Nonlinear remainder fields (psi1, psi2, psi3)."""

    psi1: np.ndarray
    psi2: np.ndarray
    psi3: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.psi1, self.psi2, self.psi3])

    def joint_l2(self) -> float:
        return float(np.sqrt(np.mean(self.psi1**2 + self.psi2**2 + self.psi3**2)))


def compose_polar(
    wave: PlaneWave, state: PerturbationState
) -> tuple[SpectralField, SpectralField]:
    """Return the full fields (P, Omega) represented by the polar state.

    The carrier wavenumber theta0 must be a multiple of 2*pi/L for the
    composed amplitude field to be periodic on the grid.
    """
    grid = state.grid
    kmin = grid.k_min_positive
    if abs(wave.theta0 / kmin - round(wave.theta0 / kmin)) > 1e-9:
        raise ValueError(
            "theta0 must be a multiple of 2*pi/length to compose periodic fields"
        )
    x = grid.axis_coordinates()
    P = (wave.r0 + state.rho) * np.exp(1j * (wave.theta0 * x + state.phi))
    omega = wave.w0 + state.h
    return (
        SpectralField.from_physical(grid, P),
        SpectralField.from_physical(grid, omega),
    )


def polar_decompose(P: SpectralField, wave: PlaneWave):
    """Split a complex field into (rho, phi) relative to the carrier wave.

    The phase is unwrapped along x and the gauge is fixed by shifting the
    mean of phi into [-pi, pi).  Requires min|P| > 0.1*r0.
    """
    grid = P.grid
    if grid.dim != 1:
        raise ValueError("polar decomposition is one-dimensional")
    values = P.physical()
    amplitude = np.abs(values)
    if float(np.min(amplitude)) <= 0.1 * wave.r0:
        raise AmplitudeVanishes(
            "min |P| <= 0.1*r0; the polar chart has broken down"
        )
    rho = amplitude - wave.r0
    x = grid.axis_coordinates()
    theta = np.unwrap(np.angle(values))
    phi = theta - wave.theta0 * x
    phi = phi - 2.0 * np.pi * np.floor((np.mean(phi) + np.pi) / (2.0 * np.pi))
    return rho, phi


def true_linearization(
    params: SystemParams, wave: PlaneWave
) -> dispersion.LinearizationMatrices:
    """Exact Frechet derivative of the polar dynamics at pi = 0.

    Extends the decoupled matrices by the gradient-placed density coupling
    and by the two entries that the closed-form analysis keeps inside its
    remainder: the rho_xx coefficient c0/r0 in the phase equation and the
    advective phase/amplitude coupling 2*theta0/r0.
    """
    if wave.r0 <= 0:
        raise ValueError("the polar linearization requires r0 > 0")
    mats = dispersion.build_matrices(params, wave, "kappa_gradient")
    A = mats.A.copy()
    B = mats.B.copy()
    C = mats.C.copy()
    c0 = params.u_coeffs[0]
    A[1, 0] += c0 / wave.r0
    B[1, 0] += 2.0 * wave.theta0 / wave.r0
    # Exact rho-coefficient without assuming the circle constraint.
    C[0, 0] = (1.0 - wave.r0**2 - wave.theta0**2) - 2.0 * wave.r0**2
    return dispersion.LinearizationMatrices(A=A, B=B, C=C, coupling_mode="kappa_gradient")


class _PolarWorkspace:
    """Precomputed spectral data for the polar integrator."""

    def __init__(self, grid: Grid, params: SystemParams, wave: PlaneWave, config: SolverConfig):
        if params.xi != 1.0:
            raise ValueError("the polar dynamics are normalized to xi = 1")
        self.grid = grid
        self.params = params
        self.wave = wave
        self.config = config
        n = grid.n
        self.k = 2.0 * np.pi / grid.length * np.arange(n // 2 + 1)
        self.ik = 1j * self.k
        idx = np.arange(n // 2 + 1)
        self.mask = idx <= n / 3.0
        if config.k_cutoff is not None:
            self.mask = self.mask & (self.k <= config.k_cutoff + 1e-12)
        mats = true_linearization(params, wave)
        self.M = (
            -(self.k[:, None, None] ** 2) * mats.A
            + 1j * self.k[:, None, None] * mats.B
            + mats.C
        )
        self.E, self.P1, self.P2 = _matrix_phis(self.M, config.dt)
        if config.scheme == "imex-bdf2":
            eye = np.eye(3)
            self.bdf_inv = np.linalg.inv(3.0 * eye - 2.0 * config.dt * self.M)

    def to_hats(self, state: PerturbationState) -> np.ndarray:
        n = self.grid.n
        return np.stack(
            [np.fft.rfft(state.rho) / n, np.fft.rfft(state.phi) / n, np.fft.rfft(state.h) / n],
            axis=-1,
        )

    def to_fields(self, hats: np.ndarray):
        n = self.grid.n
        return tuple(np.fft.irfft(hats[:, i] * n, n=n) for i in range(3))

    def rhs_hats(self, hats: np.ndarray, t: float) -> np.ndarray:
        """Nonlinear remainder (full polar tendency minus the linear part)."""
        n = self.grid.n
        rho, phi, h = self.to_fields(hats)
        r = self.wave.r0 + rho
        floor = CHART_FLOOR_FRACTION * self.wave.r0
        if float(np.min(r)) <= floor:
            raise ChartBreakdown("polar amplitude r0 + rho reached zero", t)
        amax = max(float(np.max(np.abs(a))) for a in (rho, phi, h))
        if amax > self.config.blowup_threshold:
            raise StepUnstable(
                f"perturbation magnitude exceeded {self.config.blowup_threshold:g}", t
            )
        d = lambda col, order: np.fft.irfft((self.ik**order) * hats[:, col] * n, n=n)
        rho_x, rho_xx = d(0, 1), d(0, 2)
        phi_x, phi_xx = d(1, 1), d(1, 2)
        h_x, h_xx = d(2, 1), d(2, 2)
        p = self.params
        w = self.wave
        tx = w.theta0 + phi_x
        u_r = p.u_coeffs[0] + p.u_coeffs[1] * r
        v_r = p.v_coeffs[0] + p.v_coeffs[1] * r
        s1_r = p.s1_coeffs[0] + p.s1_coeffs[1] * r
        s2_r = p.s2_coeffs[0] + p.s2_coeffs[1] * r
        kap_r = p.kappa_coeffs[0] + p.kappa_coeffs[1] * r

        rho_t = (
            rho_xx
            - (w.w0 + h) * rho_x
            - u_r * (2.0 * rho_x * tx + r * phi_xx)
            + r * (1.0 - r**2 - tx**2 - s1_r * h_x)
        )
        phi_t = (
            -(w.w0 + h) * tx
            + (2.0 * rho_x * tx + u_r * rho_xx) / r
            - u_r * tx**2
            + phi_xx
            - v_r * r**2
            - s2_r * h_x
        )
        h_t = p.m * h_xx - (w.w0 + h) * h_x - 2.0 * kap_r * r * rho_x

        full = np.stack(
            [np.fft.rfft(rho_t) / n, np.fft.rfft(phi_t) / n, np.fft.rfft(h_t) / n],
            axis=-1,
        )
        if self.config.dealias:
            full = full * self.mask[:, None]
        linear = np.einsum("mij,mj->mi", self.M, hats)
        return full - linear

    def apply_mask(self, hats: np.ndarray) -> np.ndarray:
        return hats * self.mask[:, None]


def _matrix_phis(M_stack: np.ndarray, dt: float):
    """exp(M*dt) and the first two phi-functions for a stack of 3x3 blocks.

    Uses the augmented-matrix identity: the exponential of
    [[A, I, 0], [0, 0, I], [0, 0, 0]] carries exp(A), phi1(A), phi2(A) in
    its first block row.
    """
    nm = M_stack.shape[0]
    E = np.empty((nm, 3, 3), dtype=complex)
    P1 = np.empty_like(E)
    P2 = np.empty_like(E)
    eye = np.eye(3)
    for j in range(nm):
        W = np.zeros((9, 9), dtype=complex)
        W[0:3, 0:3] = M_stack[j] * dt
        W[0:3, 3:6] = eye
        W[3:6, 6:9] = eye
        EW = scipy.linalg.expm(W)
        E[j] = EW[0:3, 0:3]
        P1[j] = EW[0:3, 3:6]
        P2[j] = EW[0:3, 6:9]
    return E, P1, P2


@dataclass
class PolarTrajectory:
    """Recorded polar evolution: times, spectral snapshots and norms."""

    times: np.ndarray
    hats: list[np.ndarray]
    rows: list[dict]
    final: PerturbationState
    status: str = "completed"
    failure_time: float | None = None

    def mode_amplitudes(self, mode_index: int) -> np.ndarray:
        """Euclidean norm of the (rho, phi, h) coefficients of one mode."""
        return np.array([np.linalg.norm(h[mode_index]) for h in self.hats])

    def component_mode_amplitudes(self, mode_index: int, component: int) -> np.ndarray:
        return np.array([np.abs(h[mode_index, component]) for h in self.hats])

    def hs_norms(self) -> np.ndarray:
        return np.array([row["Hs_pi"] for row in self.rows])


def _hs_norm_from_hats(hats: np.ndarray, k: np.ndarray, n: int, s: float, drop_mean: bool) -> float:
    weight = (1.0 + k**2) ** s
    mult = np.full(k.shape, 2.0)
    mult[0] = 1.0
    if n % 2 == 0:
        mult[-1] = 1.0
    power = np.sum(np.abs(hats) ** 2, axis=-1)
    if drop_mean:
        power = power.copy()
        power[0] = 0.0
    return float(np.sqrt(np.sum(mult * weight * power)))


def evolve_polar(
    state0: PerturbationState,
    params: SystemParams,
    wave: PlaneWave,
    config: SolverConfig,
    tolerate_blowup: bool = False,
) -> PolarTrajectory:
    """Integrate the polar perturbation dynamics.

    The per-mode linearization advances exactly through matrix exponentials;
    the strictly nonlinear remainder is integrated with the two-stage
    exponential scheme (or extrapolated semi-implicit BDF2).  Raises
    ChartBreakdown or StepUnstable unless ``tolerate_blowup`` converts the
    latter into an early, partially recorded trajectory.
    """
    ws = _PolarWorkspace(state0.grid, params, wave, config)
    dt = config.dt
    n_steps = int(round((config.t_end - state0.t) / dt))
    hats = ws.apply_mask(ws.to_hats(state0))
    times = [state0.t]
    snaps = [hats.copy()]
    rows = [_polar_row(ws, hats, state0.t)]
    status, fail_t = "completed", None
    history = None
    t = state0.t
    try:
        for i in range(n_steps):
            if config.scheme == "imex-bdf2":
                hats, history = _bdf2_polar_step(ws, hats, t, history)
            else:
                hats = _etd2_polar_step(ws, hats, t)
            t = state0.t + (i + 1) * dt
            if (i + 1) % config.cadence == 0 or i == n_steps - 1:
                times.append(t)
                snaps.append(hats.copy())
                rows.append(_polar_row(ws, hats, t))
    except StepUnstable as exc:
        if not tolerate_blowup:
            raise
        status, fail_t = "unstable", exc.t

    rho, phi, h = ws.to_fields(hats)
    final = PerturbationState(grid=state0.grid, rho=rho, phi=phi, h=h, t=t)
    return PolarTrajectory(
        times=np.array(times),
        hats=snaps,
        rows=rows,
        final=final,
        status=status,
        failure_time=fail_t,
    )


def _polar_row(ws: _PolarWorkspace, hats: np.ndarray, t: float) -> dict:
    n = ws.grid.n
    mult = np.full(ws.k.shape, 2.0)
    mult[0] = 1.0
    if n % 2 == 0:
        mult[-1] = 1.0
    l2 = np.sqrt(np.sum(mult[:, None] * np.abs(hats) ** 2, axis=0))
    return {
        "t": t,
        "L2_rho": float(l2[0]),
        "L2_phi": float(l2[1]),
        "L2_h": float(l2[2]),
        "Hs_pi": _hs_norm_from_hats(
            hats, ws.k, n, ws.config.hs_exponent, drop_mean=True
        ),
    }


def _etd2_polar_step(ws: _PolarWorkspace, hats: np.ndarray, t: float) -> np.ndarray:
    dt = ws.config.dt
    N0 = ws.rhs_hats(hats, t)
    a = np.einsum("mij,mj->mi", ws.E, hats) + dt * np.einsum("mij,mj->mi", ws.P1, N0)
    a = ws.apply_mask(a)
    N1 = ws.rhs_hats(a, t + dt)
    out = a + dt * np.einsum("mij,mj->mi", ws.P2, N1 - N0)
    return ws.apply_mask(out)


def _bdf2_polar_step(ws: _PolarWorkspace, hats: np.ndarray, t: float, history):
    dt = ws.config.dt
    if history is None:
        N0 = ws.rhs_hats(hats, t)
        new = _etd2_polar_step(ws, hats, t)
        return new, (hats, np.einsum("mij,mj->mi", ws.M, hats) + N0)
    prev_hats, prev_full = history
    N0 = ws.rhs_hats(hats, t)
    full = np.einsum("mij,mj->mi", ws.M, hats) + N0
    expl = 2.0 * N0 - (prev_full - np.einsum("mij,mj->mi", ws.M, prev_hats))
    rhs = 4.0 * hats - prev_hats + 2.0 * dt * expl
    new = np.einsum("mij,mj->mi", ws.bdf_inv, rhs)
    return ws.apply_mask(new), (hats, full)


def remainder(
    state: PerturbationState, params: SystemParams, wave: PlaneWave
) -> RemainderBundle:
    """Evaluate the nonlinear remainder fields (psi1, psi2, psi3) term by term.

    These are the remainder expressions paired with the closed-form
    linearization; they vanish at pi = 0 once the drift compatibility
    w0*theta0 + u(r0)*theta0^2 = 0 holds (and the nonlinear-dispersion
    contribution v(r0)*r0^2 vanishes).  All products are dealiased.
    """
    grid = state.grid
    n = grid.n
    k = 2.0 * np.pi / grid.length * np.arange(n // 2 + 1)
    mask = np.arange(n // 2 + 1) <= n / 3.0

    def d(arr, order=1):
        return np.fft.irfft(((1j * k) ** order) * np.fft.rfft(arr), n=n)

    rho, phi, h = state.rho, state.phi, state.h
    rho_x, rho_xx = d(rho), d(rho, 2)
    phi_x, phi_xx = d(phi), d(phi, 2)
    h_x = d(h)

    r0, th0, w0 = wave.r0, wave.theta0, wave.w0
    c0, c1 = params.u_coeffs
    r = r0 + rho
    u0 = c0 + c1 * r0
    s1_r = params.s1_coeffs[0] + params.s1_coeffs[1] * r
    s1_0 = params.s1(r0)
    s2_r = params.s2_coeffs[0] + params.s2_coeffs[1] * r
    s2_0 = params.s2(r0)
    v_r = params.v_coeffs[0] + params.v_coeffs[1] * r
    v_0 = params.v(r0)
    vp_0 = params.v_prime(r0)
    kap = params.kappa(r0)

    psi1 = (
        -2.0 * th0 * c1 * rho * rho_x
        - 2.0 * (c0 + c1 * r) * phi * rho_x
        - u0 * rho * phi_xx
        - h * rho_x
        - r0 * (rho**2 + phi_x**2 + (s1_r - s1_0) * h_x)
        - rho * (2.0 * r0 * rho + rho**2 + 2.0 * th0 * phi_x + phi_x**2 + s1_r * h_x)
    )
    psi2 = (
        -h * phi_x
        - w0 * th0
        - u0 * (th0**2 + phi_x**2)
        + c0 * rho_xx / r
        - c1 * (2.0 * th0 * phi_x + phi_x**2)
        - 2.0 * rho_x * (th0 + phi_x) / r
        - v_r * rho**2
        - (s2_r - s2_0) * h_x
        - r0**2 * (v_r - vp_0 * rho)
        - 2.0 * r0 * rho * (v_0 - v_r)
    )
    psi3 = -h * h_x - 2.0 * kap * rho * rho_x

    def clean(arr):
        return np.fft.irfft(np.fft.rfft(arr) * mask, n=n)

    return RemainderBundle(psi1=clean(psi1), psi2=clean(psi2), psi3=clean(psi3))


@dataclass
class QuadraticOrderReport:
    """Scaling of the remainder norm against perturbation size."""

    eps: np.ndarray
    quadratic_ratios: np.ndarray  # ||psi(eps*dir)|| / eps^2
    linear_ratios: np.ndarray  # ||psi(eps*dir)|| / eps
    spread: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "eps": list(self.eps),
            "quadratic_ratios": list(self.quadratic_ratios),
            "linear_ratios": list(self.linear_ratios),
            "spread": self.spread,
            "pass": self.passed,
        }


def quadratic_order_check(
    pi_dir: PerturbationState,
    params: SystemParams,
    wave: PlaneWave,
    eps_list,
    spread_tolerance: float = 0.10,
) -> QuadraticOrderReport:
    """Measure ||psi(eps*dir)||_{L2} / eps^2 across scales.

    The direction is normalized to unit joint L2 norm.  On parameter slices
    where the remainder has vanishing derivative at zero the quadratic
    ratios are bounded and flat (spread below the tolerance); elsewhere the
    linear ratios stay bounded away from zero, revealing first-order
    leakage.
    """
    eps = np.asarray(list(eps_list), dtype=float)
    scale = pi_dir.joint_l2()
    if scale == 0.0:
        zeros = np.zeros_like(eps)
        return QuadraticOrderReport(eps, zeros, zeros, 0.0, True)
    base = PerturbationState(
        grid=pi_dir.grid,
        rho=pi_dir.rho / scale,
        phi=pi_dir.phi / scale,
        h=pi_dir.h / scale,
    )
    norms = []
    for e in eps:
        state = PerturbationState(
            grid=base.grid, rho=e * base.rho, phi=e * base.phi, h=e * base.h
        )
        norms.append(remainder(state, params, wave).joint_l2())
    norms = np.array(norms)
    quad = norms / eps**2
    lin = norms / eps
    spread = float(np.max(quad) / max(np.min(quad), 1e-300) - 1.0)
    return QuadraticOrderReport(
        eps=eps,
        quadratic_ratios=quad,
        linear_ratios=lin,
        spread=spread,
        passed=spread < spread_tolerance,
    )


@dataclass
class DecayReport:
    sigma_fit: float
    spectral_gap: float
    rel_err: float
    alpha_fit: float
    alpha_reference: float
    passed: bool
    degenerate: bool
    times: np.ndarray
    norms: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "fit_type": "exponential",
            "rate": self.sigma_fit,
            "reference_rate": self.spectral_gap,
            "rel_err": self.rel_err,
            "alpha_fit": self.alpha_fit,
            "alpha_reference": self.alpha_reference,
            "pass": self.passed,
            "degenerate": self.degenerate,
        }


def resolved_spectral_gap(
    params: SystemParams, wave: PlaneWave, grid: Grid, k_cutoff: float | None = None
) -> float:
    """max Re(lambda) over the nonzero wavenumbers resolved on the grid."""
    mats = dispersion.build_matrices(params, wave, "kappa_gradient")
    kmin = grid.k_min_positive
    j_max = int(grid.n / 3.0)
    ks = kmin * np.arange(1, j_max + 1)
    if k_cutoff is not None:
        ks = ks[ks <= k_cutoff + 1e-12]
    lams = dispersion.spectrum_table(mats, ks)
    return float(np.max(lams.real))


def decay_experiment(
    params: SystemParams,
    wave: PlaneWave,
    pi0: PerturbationState,
    s: float,
    config: SolverConfig,
    fit_window: tuple[float, float] = (1e-4, 1e-1),
) -> DecayReport:
    """Fit the decay rate of ||pi||_{H^{s+1}} against the spectral gap.

    The k = 0 modes (neutral translation/phase/drift directions) are
    projected out of the data and of the recorded norms.  An exponential
    rate is fitted on the window where the norm lies in
    ``fit_window`` times its initial value; the algebraic exponent
    -0.5*(1.5+s) is reported alongside as a whole-line reference, not as a
    pass/fail gate.
    """
    grid = pi0.grid
    state0 = PerturbationState(
        grid=grid,
        rho=pi0.rho - np.mean(pi0.rho),
        phi=pi0.phi - np.mean(pi0.phi),
        h=pi0.h - np.mean(pi0.h),
        t=pi0.t,
    )
    cfg = replace(config, hs_exponent=s + 1.0)
    traj = evolve_polar(state0, params, wave, cfg)
    times = traj.times
    norms = traj.hs_norms()
    norm0 = norms[0]
    alpha_ref = -0.5 * (1.5 + s)
    gap = resolved_spectral_gap(params, wave, grid, config.k_cutoff)
    if norm0 == 0.0:
        return DecayReport(
            sigma_fit=0.0,
            spectral_gap=gap,
            rel_err=np.inf,
            alpha_fit=0.0,
            alpha_reference=alpha_ref,
            passed=False,
            degenerate=True,
            times=times,
            norms=norms,
        )
    lo, hi = fit_window
    mask = (norms >= lo * norm0) & (norms <= hi * norm0) & (norms > 0)
    degenerate = int(np.sum(mask)) < 3
    if degenerate:
        sigma_fit, alpha_fit = 0.0, 0.0
        rel_err = np.inf
    else:
        sigma_fit = float(np.polyfit(times[mask], np.log(norms[mask]), 1)[0])
        alpha_fit = float(
            np.polyfit(np.log1p(times[mask]), np.log(norms[mask]), 1)[0]
        )
        rel_err = abs(sigma_fit - gap) / abs(gap) if gap != 0 else np.inf
    return DecayReport(
        sigma_fit=sigma_fit,
        spectral_gap=gap,
        rel_err=rel_err,
        alpha_fit=alpha_fit,
        alpha_reference=alpha_ref,
        passed=bool(rel_err <= 0.10),
        degenerate=degenerate,
        times=times,
        norms=norms,
    )


@dataclass
class GrowthReport:
    rate: float
    reference_rate: float
    rel_err: float
    omega_plus: float
    passed: bool
    k_seed: float
    times: np.ndarray
    amplitudes: np.ndarray
    status: str

    def to_json_dict(self) -> dict:
        return {
            "fit_type": "exponential-growth",
            "rate": self.rate,
            "reference_rate": self.reference_rate,
            "rel_err": self.rel_err,
            "omega_plus": self.omega_plus,
            "pass": self.passed,
            "k_seed": self.k_seed,
            "status": self.status,
        }


def instability_experiment(
    params: SystemParams,
    wave: PlaneWave,
    k_seed: float,
    amp: float,
    config: SolverConfig,
    grid: Grid | None = None,
    rate_tolerance: float = 0.05,
    fit_ceiling: float = 1e-4,
) -> GrowthReport:
    """Seed one Fourier mode along its fastest eigenvector and fit its growth.

    The linear-regime growth rate of the seeded mode is compared against the
    largest real part of the dispersion eigenvalues at ``k_seed`` (relative
    tolerance 5 percent by default).  Also reports the infimum of positive
    real parts over the resolved band.  A spectral cutoff (default twice the
    seeded wavenumber) pins the resolved band, since negative drift
    diffusivity grows without bound in k.  Blow-up after the linear window
    is tolerated; failure to grow on an unstable slice fails the report.
    """
    grid = grid or Grid(dim=1, n=256, length=2.0 * np.pi)
    kmin = grid.k_min_positive
    j_seed = int(round(k_seed / kmin))
    if abs(k_seed - j_seed * kmin) > 1e-9 or j_seed <= 0 or j_seed > grid.n // 2:
        raise ValueError("k_seed must be a positive resolvable grid wavenumber")
    if config.k_cutoff is None:
        config = replace(config, k_cutoff=2.0 * abs(k_seed))

    mats = dispersion.build_matrices(params, wave, "kappa_gradient")
    sample = dispersion.eigenvalues_at_k(mats, k_seed)
    lam_max = sample.lambdas[0]
    M = dispersion.pencil(mats, k_seed)
    eigvals, eigvecs = np.linalg.eig(M)
    vec = eigvecs[:, int(np.argmax(eigvals.real))]
    vec = vec / np.linalg.norm(vec)

    n = grid.n
    hats = np.zeros((n // 2 + 1, 3), dtype=complex)
    hats[j_seed] = amp * vec
    fields = tuple(np.fft.irfft(hats[:, i] * n, n=n) for i in range(3))
    state0 = PerturbationState(grid=grid, rho=fields[0], phi=fields[1], h=fields[2])

    traj = evolve_polar(state0, params, wave, config, tolerate_blowup=True)
    amps = traj.mode_amplitudes(j_seed)
    times = traj.times
    # Fit inside the linear window: before the amplitude peaks (nonlinear
    # saturation bends the curve) and below the smallness ceiling.
    peak = int(np.argmax(amps))
    if amps[peak] > 2.0 * amps[0]:
        idx = np.arange(len(amps))
        mask = (idx <= peak) & (amps > 0) & (amps <= max(fit_ceiling, 4.0 * amps[0]))
    else:
        mask = amps > 0
    if int(np.sum(mask)) >= 3:
        rate = float(np.polyfit(times[mask], np.log(amps[mask]), 1)[0])
    else:
        rate = float("nan")
    reference = float(lam_max.real)
    rel_err = abs(rate - reference) / abs(reference) if reference != 0 else np.inf

    ks_band = kmin * np.arange(1, int(config.k_cutoff / kmin) + 1)
    lams = dispersion.spectrum_table(mats, ks_band)
    positive = lams.real[lams.real > 0]
    omega_plus = float(np.min(positive)) if positive.size else 0.0

    grew = bool(np.isfinite(rate) and rate > 0) if reference > 0 else bool(rate <= 0)
    passed = bool(np.isfinite(rate) and rel_err <= rate_tolerance and grew)
    return GrowthReport(
        rate=rate,
        reference_rate=reference,
        rel_err=float(rel_err),
        omega_plus=omega_plus,
        passed=passed,
        k_seed=float(k_seed),
        times=times,
        amplitudes=amps,
        status=traj.status,
    )
