"""Named families of initial data and the closed-form solutions used as oracles."""

from __future__ import annotations

import math

import numpy as np

from .equations import EquationSpec
from .spectral import GridSpec, SpectralField, to_spectral

__all__ = [
    "FAMILIES",
    "make_initial",
    "soliton",
    "soliton_exact",
    "sech",
    "plane_wave",
    "plane_wave_frequency",
    "plane_wave_exact",
    "poisson_kernel",
    "random_band",
]


def _wrap(grid: GridSpec, x: np.ndarray) -> np.ndarray:
    """Map positions onto the grid period ``[-L/2, L/2)``."""
    L = grid.length
    return (x + 0.5 * L) % L - 0.5 * L


def soliton(grid: GridSpec, c: float = 1.0, x0: float = 0.0) -> SpectralField:
    """``sqrt(6c) sech(sqrt(c)(x - x0))``, the travelling wave of mKdV with ``mu = +1``."""
    if not c > 0:
        raise ValueError(f"soliton speed must be positive, got {c}")
    return soliton_exact(grid, c, 0.0, x0)


def soliton_exact(grid: GridSpec, c: float, t: float, x0: float = 0.0) -> SpectralField:
    z = math.sqrt(c) * _wrap(grid, grid.x - x0 - c * t)
    return to_spectral(grid, math.sqrt(6.0 * c) / np.cosh(z), real=True)


def sech(grid: GridSpec, A: float = 1.0, w: float = 1.0, real: bool = True) -> SpectralField:
    """``A sech(x / w)``; analytic in the strip ``|Im x| < pi w / 2``."""
    if not w > 0:
        raise ValueError(f"sech width must be positive, got {w}")
    return to_spectral(grid, A / np.cosh(grid.x / w), real=real)


def _mode(grid: GridSpec, k: float) -> int:
    j = k * grid.length / (2.0 * math.pi)
    jr = round(j)
    if abs(j - jr) > 1e-9 * max(1.0, abs(j)):
        raise ValueError(f"wavenumber {k} is not a grid mode (k L / 2pi = {j:.6g})")
    if abs(jr) >= grid.n // 2:
        raise ValueError(f"wavenumber {k} beyond the grid band")
    return int(jr)


def plane_wave_frequency(eq: EquationSpec, A: float, k: float) -> float:
    """``omega`` with ``A e^{i(kx - omega t)}`` an exact tNLS solution."""
    if eq.is_mkdv:
        raise ValueError("plane waves are tNLS solutions")
    return eq.gamma * A * A - eq.alpha * k * k - eq.beta * k ** 3


def plane_wave(grid: GridSpec, A: float = 1.0, k: float = 1.0) -> SpectralField:
    _mode(grid, k)
    return to_spectral(grid, A * np.exp(1j * k * grid.x), real=False)


def plane_wave_exact(grid: GridSpec, eq: EquationSpec, A: float, k: float, t: float) -> np.ndarray:
    """Physical samples of the exact plane wave at time ``t``."""
    w = plane_wave_frequency(eq, A, k)
    return A * np.exp(1j * (k * grid.x - w * t))


def poisson_kernel(grid: GridSpec, sigma0: float = 0.4, A: float = 1.0) -> SpectralField:
    """``A (1 - r^2) / (1 - 2 r cos(2 pi x / L) + r^2)``, ``r = exp(-2 pi sigma0 / L)``.

    Its coefficients are ``A r^{|k|}``, so ``|c_k| = A e^{-sigma0 |xi_k|}``
    and the radius of analyticity is exactly ``sigma0``.
    """
    if not sigma0 > 0:
        raise ValueError(f"sigma0 must be positive, got {sigma0}")
    r = math.exp(-2.0 * math.pi * sigma0 / grid.length)
    theta = 2.0 * math.pi * grid.x / grid.length
    u = A * (1.0 - r * r) / (1.0 - 2.0 * r * np.cos(theta) + r * r)
    return to_spectral(grid, u, real=True)


def random_band(grid: GridSpec, k_max: int = 8, seed: int = 0, A: float = 0.5,
                real: bool = True) -> SpectralField:
    """Random coefficients on ``1 <= |k| <= k_max`` with a Gaussian envelope,
    scaled so the sup norm is ``A``."""
    if not 1 <= k_max < grid.n // 4:
        raise ValueError(f"k_max must lie in [1, n/4), got {k_max}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x62616E64]))
    c = np.zeros(grid.n, dtype=complex)
    ks = np.arange(1, k_max + 1)
    env = np.exp(-0.5 * (ks / max(1.0, k_max / 2.0)) ** 2)
    for sign in (1, -1):
        z = rng.normal(size=k_max) + 1j * rng.normal(size=k_max)
        c[(sign * ks) % grid.n] = env * z
    if real:
        c = 0.5 * (c + np.conj(c[(-grid.k) % grid.n]))
    f = SpectralField(grid, c, real=real)
    peak = float(np.max(np.abs(f.physical())))
    return f.scaled(A / peak) if peak > 0 else f


def zero(grid: GridSpec, real: bool = True) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.n, dtype=complex), real=real)


# name -> (builder, accepted parameters)
FAMILIES = {
    "soliton": (soliton, ("c", "x0")),
    "sech": (sech, ("A", "w")),
    "plane_wave": (plane_wave, ("A", "k")),
    "poisson_kernel": (poisson_kernel, ("sigma0", "A")),
    "random_band": (random_band, ("k_max", "seed", "A")),
    "zero": (zero, ()),
}


def make_initial(grid: GridSpec, eq: EquationSpec, family: str, params: dict) -> SpectralField:
    """Build named initial data; real families are promoted to complex for tNLS."""
    if family not in FAMILIES:
        raise ValueError(f"unknown initial-data family {family!r}; known: {sorted(FAMILIES)}")
    fn, allowed = FAMILIES[family]
    extra = set(params) - set(allowed)
    if extra:
        raise ValueError(f"family {family!r} takes {list(allowed)}, got unknown {sorted(extra)}")
    kwargs = dict(params)
    if "k_max" in kwargs:
        kwargs["k_max"] = int(kwargs["k_max"])
    if "seed" in kwargs:
        kwargs["seed"] = int(kwargs["seed"])
    if family in ("random_band", "sech", "zero"):
        kwargs["real"] = eq.real_valued
    if family == "plane_wave" and eq.is_mkdv:
        raise ValueError("plane_wave data is complex; use it with tNLS")
    f = fn(grid, **kwargs)
    if not eq.real_valued and f.real:
        f = SpectralField(grid, f.coeffs, real=False)
    return f
