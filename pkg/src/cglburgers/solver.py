"""Time integration of the coupled complex-amplitude / drift system.

The stiff diffusion terms are advanced exactly by the diagonal heat
propagator; advection, cubic saturation, growth and coupling terms are
treated explicitly at second order.  The default scheme is an exponential
two-stage Runge-Kutta method; a semi-implicit BDF2 alternative is available
for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import ConstantCoefficients, SystemParams
from .spectral import Grid, SpectralField

BLOWUP_DEFAULT = 1e6

SCHEMES = ("exponential-rk2", "imex-bdf2")


class StepUnstable(RuntimeError):
    """A norm exceeded the blow-up threshold during time stepping."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass
class FieldState:
    """Complex amplitude P and real drift field Omega at time t."""

    P: SpectralField
    omega: tuple[SpectralField, ...]
    t: float = 0.0

    def __post_init__(self):
        self.omega = tuple(self.omega)
        if len(self.omega) != self.P.grid.dim:
            raise ValueError("omega must have one component per spatial dimension")
        for w in self.omega:
            if w.grid != self.P.grid:
                raise ValueError("all fields must share one grid")

    @property
    def grid(self) -> Grid:
        return self.P.grid

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "FieldState":
        return cls(
            P=SpectralField.zeros(grid),
            omega=tuple(SpectralField.zeros(grid) for _ in range(grid.dim)),
            t=t,
        )

    def copy(self) -> "FieldState":
        return FieldState(
            P=self.P.copy(), omega=tuple(w.copy() for w in self.omega), t=self.t
        )


@dataclass
class Forcing:
    """External source terms; ``None`` components mean zero forcing.

    ``f1(t)`` returns the complex source of the amplitude equation and
    ``f2(t)`` a tuple of real sources for the drift components, either as
    SpectralFields or as physical-space arrays.
    """

    f1: Callable[[float], object] | None = None
    f2: Callable[[float], object] | None = None

    @classmethod
    def zero(cls) -> "Forcing":
        return cls()


@dataclass
class SolverConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    scheme: str = "exponential-rk2"
    dealias: bool = True
    cadence: int = 10
    blowup_threshold: float = BLOWUP_DEFAULT
    k_cutoff: float | None = None
    hs_exponent: float = 1.0
    besov_p: float = 2.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.cadence < 1:
            raise ValueError("diagnostics cadence must be >= 1")


@dataclass
class TrajectorySummary:
    """Diagnostics recorded by :func:`evolve`."""

    rows: list[dict]
    final: FieldState
    status: str = "completed"

    @property
    def times(self) -> np.ndarray:
        return np.array([row["t"] for row in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])


def phi1(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1) / z, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.05
    zs = np.where(small, 0.0, z)
    out = np.where(small, 0.0j, (np.exp(zs) - 1.0) / np.where(zs == 0, 1.0, zs))
    series = np.zeros_like(z)
    term = np.ones_like(z)
    for j in range(1, 9):
        series = series + term
        term = term * z / (j + 1)
    return np.where(small, series, out)


def phi2(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1 - z) / z**2, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.05
    zs = np.where(small, 1.0, z)
    out = (np.exp(zs) - 1.0 - zs) / zs**2
    series = np.zeros_like(z)
    term = np.full_like(z, 0.5)
    for j in range(2, 10):
        series = series + term
        term = term * z / (j + 1)
    return np.where(small, series, out)


def linear_propagator(
    f: SpectralField, mu: float, u_disp: float, dt: float
) -> SpectralField:
    """Advance the diffusion equation df/dt = mu*(1+i*u_disp)*Laplacian(f).

    Multiplies each Fourier mode by exp(-mu*(1+i*u_disp)*|k|^2*dt), the exact
    per-mode solution of the heat semigroup.
    """
    factor = np.exp(-mu * (1.0 + 1j * u_disp) * f.grid.k_squared * dt)
    return SpectralField.from_spectral(f.grid, f.spectral() * factor)


def _mask_product(a: np.ndarray, b: np.ndarray, grid: Grid, mask) -> np.ndarray:
    """Pointwise product with the 2/3-rule mask applied to the result."""
    prod = a * b
    if mask is None:
        return prod
    return np.fft.ifftn(np.fft.fftn(prod) * mask)


def _nonlinear_hats(
    grid: Grid,
    consts: ConstantCoefficients,
    Ph: np.ndarray,
    Ohs: Sequence[np.ndarray],
    t: float,
    forcing: Forcing,
    use_dealias: bool,
):
    """Explicit right-hand sides of both equations, in spectral form.

    Returns (NP_hat, [NO_hat_i]) where the full equations read
    dP/dt = (1+iu)*Lap(P) + NP and dOmega/dt = m*Lap(Omega) + NO.
    """
    size = grid.size
    mask = grid.dealias_mask() if use_dealias else None
    P = np.fft.ifftn(Ph * size)
    O = [np.fft.ifftn(oh * size) for oh in Ohs]
    ks = grid.wavenumbers()

    dP = [np.fft.ifftn(1j * ks[a] * Ph * size) for a in range(grid.dim)]
    divO = np.zeros(grid.shape, dtype=complex)
    for a in range(grid.dim):
        divO = divO + np.fft.ifftn(1j * ks[a] * Ohs[a] * size)

    adv_P = np.zeros(grid.shape, dtype=complex)
    for a in range(grid.dim):
        adv_P = adv_P + _mask_product(O[a], dP[a], grid, mask)

    # Cubic term formed as two successive dealiased products.
    absP2 = _mask_product(P, np.conj(P), grid, mask)
    cubic = _mask_product(absP2, P, grid, mask)

    NP = (
        -adv_P
        + consts.xi * P
        - (1.0 + 1j * consts.v) * cubic
        - consts.r1 * _mask_product(P, divO, grid, mask)
    )
    if forcing.f1 is not None:
        f1 = forcing.f1(t)
        NP = NP + (f1.physical() if isinstance(f1, SpectralField) else np.asarray(f1))

    NOs = []
    grad_absP2 = np.fft.fftn(absP2) / size
    for a in range(grid.dim):
        adv_O = np.zeros(grid.shape, dtype=complex)
        for b in range(grid.dim):
            dOa = np.fft.ifftn(1j * ks[b] * Ohs[a] * size)
            adv_O = adv_O + _mask_product(O[b], dOa, grid, mask)
        grad_term = np.fft.ifftn(1j * ks[a] * grad_absP2 * size)
        NO = -adv_O - consts.kappa * grad_term
        NOs.append(NO)
    if forcing.f2 is not None:
        f2 = forcing.f2(t)
        for a in range(grid.dim):
            comp = f2[a]
            NOs[a] = NOs[a] + (
                comp.physical() if isinstance(comp, SpectralField) else np.asarray(comp)
            )

    NP_hat = np.fft.fftn(NP) / size
    # Drop imaginary round-off so the drift components stay real-valued.
    NO_hats = [np.fft.fftn(NO.real) / size for NO in NOs]
    if mask is not None:
        NP_hat = NP_hat * mask
        NO_hats = [noh * mask for noh in NO_hats]
    return NP_hat, NO_hats, float(np.max(np.abs(P))), max(
        (float(np.max(np.abs(o.real))) for o in O), default=0.0
    )


def rhs_nonlinear(state: FieldState, params: SystemParams, forcing: Forcing | None = None):
    """Non-diffusive right-hand sides (dP, dOmega) of the coupled system."""
    consts = params.require_constant()
    grid = state.grid
    forcing = forcing or Forcing.zero()
    Ph = state.P.spectral()
    Ohs = [w.spectral() for w in state.omega]
    NP_hat, NO_hats, _, _ = _nonlinear_hats(grid, consts, Ph, Ohs, state.t, forcing, True)
    dP = SpectralField.from_spectral(grid, NP_hat).as_physical()
    dO = tuple(SpectralField.from_spectral(grid, noh).as_physical() for noh in NO_hats)
    return dP, dO


class _Etd2Engine:
    """Exponential two-stage integrator state for the coupled system."""

    def __init__(self, grid: Grid, consts: ConstantCoefficients, config: SolverConfig):
        self.grid = grid
        self.consts = consts
        self.config = config
        k2 = grid.k_squared
        zP = -(1.0 + 1j * consts.u) * k2 * config.dt
        zO = -consts.m * k2 * config.dt
        self.EP, self.EO = np.exp(zP), np.exp(zO)
        self.phi1P, self.phi2P = phi1(zP), phi2(zP)
        self.phi1O, self.phi2O = phi1(zO), phi2(zO)
        self.cut = None
        if config.k_cutoff is not None:
            self.cut = grid.kmax_mask(config.k_cutoff)

    def _apply_cut(self, Ph, Ohs):
        if self.cut is None:
            return Ph, Ohs
        return Ph * self.cut, [oh * self.cut for oh in Ohs]

    def step(self, Ph, Ohs, t, forcing):
        cfg = self.config
        dt = cfg.dt
        NP, NOs, maxP, maxO = _nonlinear_hats(
            self.grid, self.consts, Ph, Ohs, t, forcing, cfg.dealias
        )
        if max(maxP, maxO) > cfg.blowup_threshold:
            raise StepUnstable(f"field magnitude exceeded {cfg.blowup_threshold:g}", t)
        aP = self.EP * Ph + dt * self.phi1P * NP
        aOs = [self.EO * oh + dt * self.phi1O * noh for oh, noh in zip(Ohs, NOs)]
        aP, aOs = self._apply_cut(aP, aOs)
        NP2, NOs2, _, _ = _nonlinear_hats(
            self.grid, self.consts, aP, aOs, t + dt, forcing, cfg.dealias
        )
        Ph_new = aP + dt * self.phi2P * (NP2 - NP)
        Ohs_new = [
            ao + dt * self.phi2O * (n2 - n1) for ao, n2, n1 in zip(aOs, NOs2, NOs)
        ]
        Ph_new, Ohs_new = self._apply_cut(Ph_new, Ohs_new)
        return Ph_new, Ohs_new, (NP, NOs)


class _ImexBdf2Engine:
    """Semi-implicit BDF2: implicit diffusion, extrapolated explicit terms."""

    def __init__(self, grid: Grid, consts: ConstantCoefficients, config: SolverConfig):
        self.grid = grid
        self.consts = consts
        self.config = config
        k2 = grid.k_squared
        dt = config.dt
        self.LP = -(1.0 + 1j * consts.u) * k2
        self.LO = -consts.m * k2
        self.denP = 3.0 - 2.0 * dt * self.LP
        self.denO = 3.0 - 2.0 * dt * self.LO
        self.startup = _Etd2Engine(grid, consts, config)
        self.cut = self.startup.cut

    def step(self, Ph, Ohs, t, forcing, history):
        cfg = self.config
        dt = cfg.dt
        if history is None:
            Ph_new, Ohs_new, (NP, NOs) = self.startup.step(Ph, Ohs, t, forcing)
            return Ph_new, Ohs_new, (Ph, Ohs, NP, NOs)
        Ph_prev, Ohs_prev, NP_prev, NOs_prev = history
        NP, NOs, maxP, maxO = _nonlinear_hats(
            self.grid, self.consts, Ph, Ohs, t, forcing, cfg.dealias
        )
        if max(maxP, maxO) > cfg.blowup_threshold:
            raise StepUnstable(f"field magnitude exceeded {cfg.blowup_threshold:g}", t)
        Ph_new = (4.0 * Ph - Ph_prev + 2.0 * dt * (2.0 * NP - NP_prev)) / self.denP
        Ohs_new = [
            (4.0 * oh - ohp + 2.0 * dt * (2.0 * n - npv)) / self.denO
            for oh, ohp, n, npv in zip(Ohs, Ohs_prev, NOs, NOs_prev)
        ]
        if self.cut is not None:
            Ph_new = Ph_new * self.cut
            Ohs_new = [oh * self.cut for oh in Ohs_new]
        return Ph_new, Ohs_new, (Ph, Ohs, NP, NOs)


def step(
    state: FieldState,
    params: SystemParams,
    forcing: Forcing | None = None,
    config: SolverConfig | None = None,
) -> FieldState:
    """Advance the state by one time step (single-step exponential scheme)."""
    config = config or SolverConfig()
    forcing = forcing or Forcing.zero()
    consts = params.require_constant()
    engine = _Etd2Engine(state.grid, consts, config)
    Ph = state.P.spectral()
    Ohs = [w.spectral() for w in state.omega]
    Ph, Ohs, _ = engine.step(Ph, Ohs, state.t, forcing)
    return FieldState(
        P=SpectralField.from_spectral(state.grid, Ph),
        omega=tuple(SpectralField.from_spectral(state.grid, oh) for oh in Ohs),
        t=state.t + config.dt,
    )


def _diagnostics_row(grid, Ph, Ohs, t, hs_exponent, besov_p):
    from . import littlewood_paley as lp

    P = SpectralField.from_spectral(grid, Ph)
    omega = tuple(SpectralField.from_spectral(grid, oh) for oh in Ohs)
    state = FieldState(P=P, omega=omega, t=t)
    l2o = float(np.sqrt(sum(np.sum(np.abs(oh) ** 2) for oh in Ohs)))
    hso = float(
        np.sqrt(
            sum(
                np.sum((1.0 + grid.k_squared) ** hs_exponent * np.abs(oh) ** 2)
                for oh in Ohs
            )
        )
    )
    return {
        "t": t,
        "L2_P": float(np.sqrt(np.sum(np.abs(Ph) ** 2))),
        "L2_Omega": l2o,
        "Hs_P": float(
            np.sqrt(np.sum((1.0 + grid.k_squared) ** hs_exponent * np.abs(Ph) ** 2))
        ),
        "Hs_Omega": hso,
        "besov_proxy": lp.smallness_monitor(state, besov_p),
    }


def advective_cfl(state: FieldState, config: SolverConfig) -> float:
    """CFL number dt * max|Omega| * k_max of the explicit advection terms."""
    vmax = max(
        (float(np.max(np.abs(w.physical().real))) for w in state.omega), default=0.0
    )
    return config.dt * vmax * state.grid.k_max


def evolve(
    state0: FieldState,
    params: SystemParams,
    forcing: Forcing | None = None,
    config: SolverConfig | None = None,
    observers: Sequence[Callable[[FieldState], dict]] = (),
) -> TrajectorySummary:
    """Advance to t_end recording diagnostics every ``cadence`` steps.

    Raises StepUnstable (carrying the failure time) if a norm crosses the
    blow-up threshold.
    """
    config = config or SolverConfig()
    forcing = forcing or Forcing.zero()
    consts = params.require_constant()
    grid = state0.grid
    if advective_cfl(state0, config) > 1.0:
        raise ValueError(
            "advective CFL exceeds 1 for the initial state; reduce dt"
        )

    if config.scheme == "exponential-rk2":
        engine = _Etd2Engine(grid, consts, config)
    else:
        engine = _ImexBdf2Engine(grid, consts, config)

    Ph = state0.P.spectral().copy()
    Ohs = [w.spectral().copy() for w in state0.omega]
    t = state0.t
    n_steps = int(round((config.t_end - state0.t) / config.dt))

    def observe(row, Ph, Ohs, t):
        if observers:
            st = FieldState(
                P=SpectralField.from_spectral(grid, Ph),
                omega=tuple(SpectralField.from_spectral(grid, oh) for oh in Ohs),
                t=t,
            )
            for obs in observers:
                row.update(obs(st))
        return row

    rows = [
        observe(
            _diagnostics_row(grid, Ph, Ohs, t, config.hs_exponent, config.besov_p),
            Ph,
            Ohs,
            t,
        )
    ]
    history = None
    for i in range(n_steps):
        if config.scheme == "exponential-rk2":
            Ph, Ohs, _ = engine.step(Ph, Ohs, t, forcing)
        else:
            Ph, Ohs, history = engine.step(Ph, Ohs, t, forcing, history)
        t = state0.t + (i + 1) * config.dt
        if (i + 1) % config.cadence == 0 or i == n_steps - 1:
            rows.append(
                observe(
                    _diagnostics_row(grid, Ph, Ohs, t, config.hs_exponent, config.besov_p),
                    Ph,
                    Ohs,
                    t,
                )
            )
    final = FieldState(
        P=SpectralField.from_spectral(grid, Ph),
        omega=tuple(SpectralField.from_spectral(grid, oh) for oh in Ohs),
        t=t,
    )
    return TrajectorySummary(rows=rows, final=final)
