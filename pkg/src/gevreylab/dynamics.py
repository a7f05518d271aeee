"""Time evolution: exact linear group, integrating-factor RK4, Picard
iteration, lifespan and the continuation scheduler."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .equations import EquationSpec
from .spectral import (
    GevreyOverflowError,
    GridSpec,
    SpaceTimeField,
    SpectralField,
    _forward,
    _inverse,
    dealias_mask,
    gevrey_trusted,
    make_spacetime,
)

log = logging.getLogger(__name__)

__all__ = [
    "NumericalBlowup",
    "NotContractive",
    "IntegratorConfig",
    "LifespanParams",
    "Trajectory",
    "PicardResult",
    "ContinuationResult",
    "linear_propagate",
    "nonlinear_term",
    "step",
    "integrate",
    "picard_solve",
    "lifespan",
    "window_length",
    "continuation_run",
]


class NumericalBlowup(RuntimeError):
    pass


class NotContractive(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    dealias: bool = True
    reality_projection: bool = True
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class LifespanParams:
    c0: float = 0.1
    a: float = 3.0
    sigma: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if not self.a > 1:
            raise ValueError("a must exceed 1")


@dataclass
class Trajectory:
    equation: EquationSpec
    grid: GridSpec
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)

    def append(self, t: float, f: SpectralField) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError("trajectory times must increase")
        if f.grid != self.grid:
            raise ValueError("state on a different grid")
        self.times.append(float(t))
        self.states.append(f)

    @property
    def final(self) -> SpectralField:
        return self.states[-1]


def _linear_factor(grid: GridSpec, eq: EquationSpec, t: float) -> np.ndarray:
    return np.exp(1j * t * eq.phase(grid.xi))


def linear_propagate(f: SpectralField, eq: EquationSpec, t: float) -> SpectralField:
    """Exact linear flow ``W(t)``: multiply mode ``xi`` by ``exp(i t phi(xi))``."""
    if t == 0:
        return f
    c = f.coeffs * _linear_factor(f.grid, eq, t)
    if f.real:
        c[f.grid.unpaired] = 0.0
    return f.with_coeffs(c)


def _hermitize(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[(-grid.k) % grid.n]))


class _Rhs:
    """Nonlinear right-hand side on raw coefficient arrays."""

    def __init__(self, grid: GridSpec, eq: EquationSpec, dealias: bool = True, real: bool = False):
        self.grid = grid
        self.eq = eq
        self.real = real
        mask = dealias_mask(grid) if dealias else np.ones(grid.n, dtype=bool)
        mask = mask.copy()
        mask[grid.unpaired] = False
        self.mask = mask
        if eq.is_mkdv:
            self.coef = (-eq.mu / 3.0) * 1j * grid.xi * mask
        else:
            self.coef = -1j * eq.gamma * mask.astype(float)

    def __call__(self, c: np.ndarray) -> np.ndarray:
        grid = self.grid
        if self.eq.linear:
            return np.zeros_like(c)
        v = _inverse(grid, c * self.mask)
        if self.eq.is_mkdv:
            u = v.real
            out = self.coef * _forward(grid, u * u * u)
            if self.real:
                out = _hermitize(grid, out)
        else:
            out = self.coef * _forward(grid, (v.real ** 2 + v.imag ** 2) * v)
        return out


def nonlinear_term(f: SpectralField, eq: EquationSpec, dealias: bool = True) -> SpectralField:
    """Pure nonlinear part of the right-hand side of ``d/dt`` (dealiased).

    mKdV: ``-mu u^2 u_x = -(mu/3) (u^3)_x``; tNLS: ``-i gamma |v|^2 v``.
    """
    rhs = _Rhs(f.grid, eq, dealias, real=f.real)
    return f.with_coeffs(rhs(f.coeffs))


class _Stepper:
    def __init__(self, grid: GridSpec, eq: EquationSpec, cfg: IntegratorConfig, dt: float, real: bool):
        self.rhs = _Rhs(grid, eq, cfg.dealias, real=real and cfg.reality_projection)
        self.e_half = _linear_factor(grid, eq, 0.5 * dt)
        self.e_full = self.e_half * self.e_half
        self.dt = dt
        keep = self.rhs.mask if cfg.dealias else np.ones(grid.n, dtype=bool)
        if real:
            keep = keep.copy()
            keep[grid.unpaired] = False
        self.keep = keep

    def __call__(self, c: np.ndarray) -> np.ndarray:
        h, eh, ef, N = self.dt, self.e_half, self.e_full, self.rhs
        k1 = N(c)
        ehc = eh * c
        k2 = N(eh * (c + 0.5 * h * k1))
        k3 = N(ehc + 0.5 * h * k2)
        k4 = N(ef * c + h * eh * k3)
        out = ef * c + (h / 6.0) * (ef * k1 + 2.0 * eh * (k2 + k3) + k4)
        return out * self.keep


def _prepare(f: SpectralField, cfg: IntegratorConfig) -> np.ndarray:
    c = np.array(f.coeffs)
    if cfg.dealias:
        c = c * dealias_mask(f.grid)
    if f.real:
        c[f.grid.unpaired] = 0.0
    return c


def step(f: SpectralField, eq: EquationSpec, cfg: IntegratorConfig) -> SpectralField:
    """One integrating-factor RK4 step of size ``cfg.dt``."""
    st = _Stepper(f.grid, eq, cfg, cfg.dt, f.real)
    out = st(_prepare(f, cfg))
    if not np.all(np.isfinite(out)):
        raise NumericalBlowup("blow-up or instability at step 1")
    return f.with_coeffs(out)


def integrate(f0: SpectralField, eq: EquationSpec, cfg: IntegratorConfig, t_end: float,
              sample_every: int | None = None, t0: float = 0.0, callback=None) -> Trajectory:
    """Advance ``f0`` to ``t_end``.

    The step count is ``ceil(t_end/dt)``; the step is shrunk to land on
    ``t_end`` exactly.  States are kept every ``sample_every`` steps (and
    always at both ends).  ``callback(t, coeffs)`` sees every kept sample.
    """
    if eq.real_valued and not f0.real:
        raise ValueError("mKdV needs a real field")
    nsteps = max(1, math.ceil(t_end / cfg.dt - 1e-9)) if t_end > 0 else 0
    if nsteps > cfg.max_steps:
        raise ValueError(f"{nsteps} steps exceed max_steps={cfg.max_steps}")
    traj = Trajectory(eq, f0.grid)
    c = _prepare(f0, cfg)
    traj.append(t0, f0.with_coeffs(c))
    if callback:
        callback(t0, c)
    if nsteps == 0:
        return traj
    dt = t_end / nsteps
    st = _Stepper(f0.grid, eq, cfg, dt, f0.real)
    every = sample_every or nsteps
    for i in range(1, nsteps + 1):
        c = st(c)
        if i % every == 0 or i == nsteps:
            if not np.all(np.isfinite(c)):
                raise NumericalBlowup(f"blow-up or instability at step {i}")
            t = t0 + i * dt
            traj.append(t, f0.with_coeffs(c))
            if callback:
                callback(t, c)
    return traj


# --- Duhamel / Picard ----------------------------------------------------

@dataclass
class PicardResult:
    field: SpaceTimeField
    coeffs: np.ndarray
    distances: list

    @property
    def final(self) -> np.ndarray:
        return self.coeffs[-1]


def picard_solve(u0: SpectralField, eq: EquationSpec, T: float, iterations: int, m: int,
                 dealias: bool = True) -> PicardResult:
    """Picard iteration of the Duhamel formula on ``m`` uniform samples of ``[0, T]``.

    The time integral is composite Simpson in the interaction picture.
    ``distances[j]`` is ``sup_t ||w_{j+1}(t) - w_j(t)||_{L^2}``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if m < 8:
        raise ValueError("need at least 8 time samples")
    grid = u0.grid
    times = np.linspace(0.0, T, m)
    rhs = _Rhs(grid, eq, dealias, real=u0.real)
    c0 = np.array(u0.coeffs)
    if dealias:
        c0 = c0 * dealias_mask(grid)
    if u0.real:
        c0[grid.unpaired] = 0.0
    phase = eq.phase(grid.xi)
    forward = np.exp(1j * np.outer(times, phase))
    w = forward * c0[None, :]
    distances = []
    prev_size = _sup_l2(grid, w)
    for _ in range(iterations):
        g = np.conj(forward) * np.array([rhs(row) for row in w])
        integral = np.zeros_like(g)
        integral[1:] = (cumulative_simpson(g.real, x=times, axis=0)
                        + 1j * cumulative_simpson(g.imag, x=times, axis=0))
        new = forward * (c0[None, :] + integral)
        if u0.real:
            new = np.array([_hermitize(grid, row) for row in new])
        dist = _sup_l2(grid, new - w)
        size = _sup_l2(grid, new)
        if not np.isfinite(size) or (prev_size > 0 and size > 2.0 * prev_size):
            raise NotContractive("outside contraction regime")
        distances.append(dist)
        w, prev_size = new, size
    values = _inverse(grid, w)
    if u0.real:
        values = values.real
    return PicardResult(make_spacetime(grid, times, values, "boxcar"), w, distances)


def _sup_l2(grid: GridSpec, w: np.ndarray) -> float:
    return float(np.sqrt(grid.length * np.max(np.sum(np.abs(w) ** 2, axis=1))))


# --- lifespan and continuation -------------------------------------------

def lifespan(norm_G: float, p: LifespanParams) -> float:
    """Local existence time ``c0 / (1 + norm^2)^a``."""
    if norm_G < 0:
        raise ValueError("norm must be nonnegative")
    return p.c0 / (1.0 + norm_G * norm_G) ** p.a


def window_length(q0: float, p: LifespanParams) -> float:
    """Continuation time step ``c0 / (1 + 2 Q0)^a``."""
    return p.c0 / (1.0 + 2.0 * q0) ** p.a


MKDV_ELL = 0.75
TNLS_THETA = 0.24


@dataclass
class ContinuationResult:
    trajectory: Trajectory
    schedule: list            # (T, sigma, budget_counter)
    status: str
    rho: float
    constant: float
    exponent: float
    q0: float
    budget_factor: float
    window_drift: list        # (T_end, sigma, sup drift in window, accumulated bound)
    hypothesis_violations: int
    budget_exceeded: int = 0
    metadata: dict = field(default_factory=dict)


def _quantity(eq: EquationSpec):
    from .diagnostics import gevrey_energy, gevrey_mass

    if eq.is_mkdv:
        return lambda f, sigma: gevrey_energy(f, sigma, eq.mu)
    return lambda f, sigma: gevrey_mass(f, sigma)


def continuation_run(u0: SpectralField, eq: EquationSpec, sigma0: float, T: float,
                     cfg: IntegratorConfig, params: LifespanParams | None = None,
                     constant: float | None = None, exponent: float | None = None,
                     samples_per_window: int = 20, sigma_floor: float | None = None,
                     calibration_sigmas=None) -> ContinuationResult:
    """Advance in windows of length ``rho`` with a drift budget on ``sigma``.

    Before window ``n+1`` the budget ``n * F * C * sigma^ell * B(Q0) <= 1`` is
    checked (mKdV: ``F=8``, ``B=Q0(1+Q0)``; tNLS: ``F=4``, ``B=Q0``).  When it
    fails, sigma drops to the value that restores equality.  ``constant=None``
    calibrates ``C`` from the measured drift over the first window.
    """
    from .diagnostics import drift_constant

    if eq.is_mkdv and eq.mu != -1:
        raise ValueError("continuation requires defocusing mKdV (mu = -1) or tNLS")
    params = params or LifespanParams()
    grid = u0.grid
    ell = exponent if exponent is not None else (MKDV_ELL if eq.is_mkdv else TNLS_THETA)
    if not gevrey_trusted(u0, sigma0, 1.0 if eq.is_mkdv else 0.0):
        raise GevreyOverflowError(f"sigma0={sigma0} beyond trust radius of grid")
    if sigma_floor is None:
        sigma_floor = 1e-8 / grid.xi_max
    Q = _quantity(eq)
    q0 = Q(u0, sigma0)
    rho = window_length(q0, params)
    factor = 8.0 if eq.is_mkdv else 4.0
    data_term = q0 * (1.0 + q0) if eq.is_mkdv else q0
    steps = samples_per_window * max(1, math.ceil(rho / (samples_per_window * cfg.dt)))
    dt = rho / steps
    every = steps // samples_per_window
    step_cfg = IntegratorConfig(dt, cfg.dealias, cfg.reality_projection, cfg.max_steps)
    stepper = _Stepper(grid, eq, step_cfg, dt, u0.real)
    nwin = max(1, math.ceil(T / rho - 1e-12))
    if nwin * steps > cfg.max_steps:
        raise ValueError(f"{nwin * steps} steps exceed max_steps={cfg.max_steps}")

    traj = Trajectory(eq, grid)
    c = _prepare(u0, cfg)
    traj.append(0.0, u0.with_coeffs(c))
    sigma = sigma0
    schedule = []
    window_drift = []
    violations = 0
    status = "completed"
    cal_sigmas = calibration_sigmas
    if cal_sigmas is None:
        cal_sigmas = [sigma0 / 8, sigma0 / 4, sigma0 / 2, sigma0]
    C = constant
    t = 0.0
    exceeded = 0

    for n in range(nwin):
        if n >= 1 and C is not None and C > 0:
            if n * factor * C * sigma ** ell * data_term > 1.0:
                new_sigma = (1.0 / (n * factor * C * data_term)) ** (1.0 / ell)
                if new_sigma < sigma_floor:
                    status = f"stopped: sigma {new_sigma:.3e} below grid floor {sigma_floor:.3e} at T={t:.6g}"
                    log.warning(status)
                    break
                sigma = min(sigma, new_sigma)
                schedule.append((t, sigma, n))
        win_len = min(rho, T - t) if n == nwin - 1 else rho
        wsteps = steps if win_len == rho else max(every, math.ceil(win_len / dt - 1e-9))
        wdt = win_len / wsteps
        st = stepper if wsteps == steps else _Stepper(grid, eq, step_cfg, wdt, u0.real)
        wevery = max(1, wsteps // samples_per_window)
        samples = [c]
        for i in range(1, wsteps + 1):
            c = st(c)
            if i % wevery == 0 or i == wsteps:
                if not np.all(np.isfinite(c)):
                    raise NumericalBlowup(f"blow-up or instability at window {n + 1}, step {i}")
                samples.append(c)
        t = t + win_len if n < nwin - 1 else T
        traj.append(t, u0.with_coeffs(c))
        if C is None:
            C = drift_constant([u0.with_coeffs(s) for s in samples], cal_sigmas, eq, ell)
            log.info("calibrated drift constant C=%.6g", C)
        qs = np.array([Q(u0.with_coeffs(s), sigma) for s in samples])
        drift = float(np.max(qs) - Q(u0, sigma))
        bound = (n + 1) * factor * C * sigma ** ell * q0 * data_term
        if np.max(qs) > 2.0 * q0 * (1 + 1e-12):
            violations += 1
        if drift > bound:
            exceeded += 1
        window_drift.append((t, sigma, drift, bound))

    if not schedule or schedule[-1][0] != t:
        schedule.append((t, sigma, len(window_drift)))
    return ContinuationResult(
        trajectory=traj, schedule=schedule, status=status, rho=rho, constant=float(C or 0.0),
        exponent=ell, q0=q0, budget_factor=factor, window_drift=window_drift,
        hypothesis_violations=violations, budget_exceeded=exceeded,
        metadata={"sigma0": sigma0, "T": T, "c0": params.c0, "a": params.a, "dt": dt,
                  "samples_per_window": samples_per_window, "sigma_floor": sigma_floor},
    )
