"""Periodic grids, spectral transforms, Fourier multipliers and norms.

Coefficients are stored in numpy FFT order.  The transform uses the
single-mode-amplitude convention: the samples of ``exp(i*xi_j*x)`` have
coefficient 1 at mode ``j`` and 0 elsewhere.  Every integral norm carries
the box length so that discrete sums approximate continuum integrals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .equations import EquationSpec

__all__ = [
    "EXPONENT_CAP",
    "ROUNDOFF",
    "TRUST_FRACTION",
    "GevreyOverflowError",
    "GridSpec",
    "SpectralField",
    "GevreyParams",
    "SpaceTimeField",
    "make_grid",
    "to_spectral",
    "to_physical",
    "field_from_samples",
    "apply_derivative",
    "apply_gevrey",
    "dealias",
    "dealias_mask",
    "gevrey_weight",
    "gevrey_norm",
    "gevrey_trusted",
    "lp_norm",
    "make_spacetime",
    "hann_window",
    "xsb_norm",
]

#: largest admissible ``|sigma| * xi_max`` (natural-log units)
EXPONENT_CAP = 600.0
#: relative round-off assumed for transformed coefficients
ROUNDOFF = 1e-16
#: amplified round-off may not exceed this fraction of a norm
TRUST_FRACTION = 1e-3


class GevreyOverflowError(ValueError):
    """The requested Gevrey exponent exceeds what the grid can represent."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-length/2, length/2)``."""

    n: int
    length: float
    k: np.ndarray = field(init=False, repr=False, compare=False)
    xi: np.ndarray = field(init=False, repr=False, compare=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or int(n) != n or n < 8 or (int(n) & (int(n) - 1)):
            raise ValueError(f"n must be a power of two >= 8, got {n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "length", float(self.length))
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        for name, arr in (
            ("k", k),
            ("xi", 2.0 * np.pi * k / self.length),
            ("x", -0.5 * self.length + self.dx * np.arange(self.n)),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def xi_max(self) -> float:
        return np.pi * self.n / self.length

    @property
    def unpaired(self) -> int:
        """Storage index of the mode ``-n/2``."""
        return self.n // 2

    @property
    def _phase(self) -> np.ndarray:
        # exp(-i xi_k x_0) with x_0 = -L/2 is (-1)^k
        return np.where(self.k % 2 == 0, 1.0, -1.0)

    def mode_index(self, k: int) -> int:
        """Storage index of integer mode ``k``."""
        if not -self.n // 2 <= k < self.n // 2:
            raise ValueError(f"mode {k} outside [-{self.n // 2}, {self.n // 2})")
        return int(k) % self.n


def make_grid(n: int, length: float) -> GridSpec:
    return GridSpec(n, length)


@dataclass(frozen=True)
class GevreyParams:
    sigma: float
    s: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma!r}")


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable coefficient array on a grid.

    ``real`` marks fields that must stay real in physical space; their
    coefficients are checked for Hermitian symmetry on construction.
    """

    grid: GridSpec
    coeffs: np.ndarray
    real: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n,):
            raise ValueError(f"coeffs shape {c.shape} does not match grid n={self.grid.n}")
        if self.real:
            scale = float(np.max(np.abs(c))) if c.size else 0.0
            mirror = np.conj(c[(-self.grid.k) % self.grid.n])
            paired = np.ones(self.grid.n, dtype=bool)
            paired[self.grid.unpaired] = False
            err = float(np.max(np.abs(c - mirror)[paired]))
            if err > 1e-12 * max(scale, 1e-300) and err > 1e-300:
                raise ValueError(f"coefficients are not Hermitian (defect {err:.3e})")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.real)

    def physical(self) -> np.ndarray:
        return to_physical(self)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.grid, self.coeffs - other.coeffs, self.real and other.real)

    def scaled(self, a: complex) -> "SpectralField":
        real = self.real and np.isreal(a)
        return SpectralField(self.grid, a * self.coeffs, bool(real))


def _forward(grid: GridSpec, samples: np.ndarray) -> np.ndarray:
    return np.fft.fft(samples, axis=-1) * (grid._phase / grid.n)


def _inverse(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.ifft(coeffs * grid._phase, axis=-1) * grid.n


def to_spectral(grid: GridSpec, samples, real: bool | None = None) -> SpectralField:
    """Transform physical samples on ``grid`` to a :class:`SpectralField`.

    ``real`` defaults to whether the samples have a real dtype.
    """
    f = np.asarray(samples)
    if f.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {f.shape}")
    if real is None:
        real = not np.iscomplexobj(f)
    c = _forward(grid, f.astype(np.complex128))
    if real:
        c = _hermitian(grid, c)
    return SpectralField(grid, c, bool(real))


field_from_samples = to_spectral


def to_physical(f: SpectralField) -> np.ndarray:
    v = _inverse(f.grid, f.coeffs)
    return v.real.copy() if f.real else v


def _hermitian(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    """Project onto coefficients of a real function (removes FFT round-off asymmetry)."""
    mirror = np.conj(c[(-grid.k) % grid.n])
    out = 0.5 * (c + mirror)
    return out


def apply_derivative(f: SpectralField, order: int) -> SpectralField:
    if order not in (1, 2, 3):
        raise ValueError(f"unsupported derivative order {order!r}")
    c = f.coeffs * (1j * f.grid.xi) ** order
    c[f.grid.unpaired] = 0.0
    return f.with_coeffs(c)


def _check_exponent(grid: GridSpec, sigma: float) -> None:
    if not np.isfinite(sigma) or abs(sigma) * grid.xi_max > EXPONENT_CAP:
        raise GevreyOverflowError(
            f"sigma={sigma!r} gives exponent {abs(sigma) * grid.xi_max:.1f} > {EXPONENT_CAP:g} "
            f"on this grid (xi_max={grid.xi_max:.4g})"
        )


def gevrey_weight(grid: GridSpec, sigma: float) -> np.ndarray:
    """Multiplier ``exp(sigma*|xi_k|)`` of the operator ``e^{sigma|D_x|}``."""
    _check_exponent(grid, sigma)
    return np.exp(sigma * np.abs(grid.xi))


def apply_gevrey(f: SpectralField, sigma: float) -> SpectralField:
    if sigma == 0:
        return f
    return f.with_coeffs(f.coeffs * gevrey_weight(f.grid, sigma))


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Modes kept by the half rule, ``|k| <= n/4``."""
    return np.abs(grid.k) <= grid.n // 4


def dealias(f: SpectralField) -> SpectralField:
    return f.with_coeffs(np.where(dealias_mask(f.grid), f.coeffs, 0.0))


def _bracket(xi: np.ndarray, bracket: str) -> np.ndarray:
    if bracket == "abs":
        return 1.0 + np.abs(xi)
    if bracket == "sqrt":
        return np.sqrt(1.0 + xi * xi)
    raise ValueError(f"unknown bracket {bracket!r}")


def _log_weight(grid: GridSpec, sigma: float, s: float, bracket: str) -> np.ndarray:
    return 2.0 * sigma * np.abs(grid.xi) + 2.0 * s * np.log(_bracket(grid.xi, bracket))


def gevrey_norm(f: SpectralField, sigma: float | GevreyParams = 0.0, s: float = 0.0,
                bracket: str = "abs") -> float:
    """Norm of ``f`` in ``G^{sigma,s}``.

    ``bracket="abs"`` uses ``1 + |xi|``; ``"sqrt"`` uses ``(1 + xi^2)^(1/2)``
    (so that ``s=1`` gives the usual ``H^1`` norm).
    """
    if isinstance(sigma, GevreyParams):
        sigma, s = sigma.sigma, sigma.s
    _check_exponent(f.grid, sigma)
    a2 = np.abs(f.coeffs) ** 2
    if not np.any(a2):
        return 0.0
    lw = _log_weight(f.grid, sigma, s, bracket)
    top = float(np.max(lw[a2 > 0]))
    total = float(np.sum(np.exp(lw - top) * a2))
    return float(np.sqrt(f.grid.length * total) * np.exp(0.5 * top))


def gevrey_trusted(f: SpectralField, sigma: float, s: float = 0.0, bracket: str = "abs") -> bool:
    """False when amplified round-off exceeds ``TRUST_FRACTION`` of the norm.

    The round-off level is ``ROUNDOFF * max|coeffs|`` on every nonzero
    mode; modes held at exactly zero (dealiasing) carry none.
    """
    _check_exponent(f.grid, sigma)
    norm = gevrey_norm(f, sigma, s, bracket)
    scale = float(np.max(np.abs(f.coeffs)))
    if norm == 0.0:
        return True
    lw = _log_weight(f.grid, sigma, s, bracket)[f.coeffs != 0]
    top = float(np.max(lw))
    noise = ROUNDOFF * scale * np.sqrt(f.grid.length * np.sum(np.exp(lw - top))) * np.exp(0.5 * top)
    return bool(noise <= TRUST_FRACTION * norm)


def lp_norm(f: SpectralField | np.ndarray, p: int, grid: GridSpec | None = None) -> float:
    """Rectangle-rule (periodic trapezoid) ``L^p`` norm over the box."""
    if p not in (2, 4, 6):
        raise ValueError(f"unsupported p={p!r}; use 2, 4 or 6")
    if isinstance(f, SpectralField):
        grid, v = f.grid, to_physical(f)
    else:
        if grid is None:
            raise ValueError("grid required for raw samples")
        v = np.asarray(f)
    return float((grid.dx * np.sum(np.abs(v) ** p)) ** (1.0 / p))


def hann_window(m: int) -> np.ndarray:
    """Periodic raised-cosine taper."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(m) / m)


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Physical samples ``values[t_index, x_index]`` on uniform times."""

    grid: GridSpec
    times: np.ndarray
    values: np.ndarray
    window: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values)
        w = np.asarray(self.window, dtype=float)
        m = t.shape[0]
        if m < 8:
            raise ValueError(f"degenerate time axis: need at least 8 samples, got {m}")
        if v.shape != (m, self.grid.n):
            raise ValueError(f"values shape {v.shape} != ({m}, {self.grid.n})")
        if w.shape != (m,):
            raise ValueError("window length must match the time axis")
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
            raise ValueError("times must be strictly increasing and uniformly spaced")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("window weights must lie in [0, 1]")
        for name, arr in (("times", t), ("values", v), ("window", w)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.times.shape[0]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def duration(self) -> float:
        """Period of the discrete time axis, ``m * dt``."""
        return self.m * self.dt

    @property
    def tau(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.m, d=self.dt)

    def spectrum(self) -> np.ndarray:
        """Single-mode-amplitude 2-D coefficients of the windowed samples."""
        w = self.window[:, None] * self.values
        c = np.fft.fft2(w) / (self.m * self.grid.n)
        return c * self.grid._phase[None, :]


def make_spacetime(grid: GridSpec, times, values, window: str | np.ndarray = "hann") -> SpaceTimeField:
    times = np.asarray(times, dtype=float)
    if isinstance(window, str):
        if window == "hann":
            w = hann_window(times.shape[0])
        elif window == "boxcar":
            w = np.ones(times.shape[0])
        else:
            raise ValueError(f"unknown window {window!r}")
    else:
        w = window
    return SpaceTimeField(grid, times, values, w)


def xsb_norm(F: SpaceTimeField, s: float, b: float, eq: "EquationSpec", sigma: float = 0.0) -> float:
    """Discrete ``X^{sigma,s,b}`` norm of a windowed space-time field.

    Weighted l2 sum of the 2-D coefficients with weight
    ``e^{2 sigma|xi|} <xi>^{2s} <tau - phi(xi)>^{2b}``, scaled by the
    space-time box measure.
    """
    if not -1.0 < b < 1.0:
        raise ValueError(f"b must lie in (-1, 1), got {b!r}")
    _check_exponent(F.grid, sigma)
    c = F.spectrum()
    xi = F.grid.xi
    lw = (2.0 * sigma * np.abs(xi) + 2.0 * s * np.log1p(np.abs(xi)))[None, :]
    lw = lw + 2.0 * b * np.log1p(np.abs(F.tau[:, None] - eq.phase(xi)[None, :]))
    a2 = np.abs(c) ** 2
    if not np.any(a2):
        return 0.0
    top = float(np.max(lw[a2 > 0]))
    total = float(np.sum(np.exp(lw - top) * a2))
    return float(np.sqrt(F.grid.length * F.duration * total) * np.exp(0.5 * top))
