"""Tracked functionals of a state: conserved quantities, Gevrey energies,
commutator residuals, analyticity-radius fits and drift sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equations import EquationSpec
from .spectral import (
    GevreyOverflowError,
    SpectralField,
    _forward,
    _inverse,
    apply_gevrey,
    dealias_mask,
    gevrey_norm,
    gevrey_trusted,
    gevrey_weight,
    lp_norm,
    to_physical,
)

__all__ = [
    "UnresolvedRadius",
    "DiagnosticsRecord",
    "RadiusFit",
    "DriftSweep",
    "mass",
    "tnls_mass",
    "energy_mkdv",
    "tnls_momentum",
    "gevrey_energy",
    "gevrey_mass",
    "conserved_energy",
    "commutator_residual",
    "estimate_radius",
    "drift_sweep",
    "drift_constant",
    "make_record",
]


class UnresolvedRadius(ValueError):
    pass


def mass(f: SpectralField) -> float:
    """``int |f|^2 dx`` by Plancherel."""
    return float(f.grid.length * np.sum(np.abs(f.coeffs) ** 2))


tnls_mass = mass


def _require_real(f: SpectralField) -> np.ndarray:
    v = _inverse(f.grid, f.coeffs)
    scale = max(float(np.max(np.abs(v))), 1e-300)
    if float(np.max(np.abs(v.imag))) > 1e-10 * scale:
        raise ValueError("mKdV functionals need a real field")
    return v.real


def energy_mkdv(f: SpectralField, mu: int) -> float:
    """``int u_x^2 - (mu/6) u^4 dx``."""
    u = _require_real(f)
    grad = f.grid.length * float(np.sum(f.grid.xi ** 2 * np.abs(f.coeffs) ** 2))
    return grad - (mu / 6.0) * f.grid.dx * float(np.sum(u ** 4))


def conserved_energy(f: SpectralField, mu: int) -> float:
    """Mass plus energy: the value of :func:`gevrey_energy` at ``sigma = 0``."""
    return mass(f) + energy_mkdv(f, mu)


def tnls_momentum(f: SpectralField) -> complex:
    """``int v conj(v_x) dx``."""
    return complex(f.grid.length * np.sum(-1j * f.grid.xi * np.abs(f.coeffs) ** 2))


def gevrey_energy(f: SpectralField, sigma: float, mu: int) -> float:
    """``||f||^2_{G^{sigma,1}} - (mu/6) ||e^{sigma|D|} f||^4_{L^4}``.

    The quadratic part uses the weight ``1 + xi^2`` so that at ``sigma = 0``
    this is exactly ``mass + energy``.
    """
    U = apply_gevrey(f, sigma)
    u = _require_real(U)
    quad = gevrey_norm(f, sigma, 1.0, bracket="sqrt") ** 2
    return quad - (mu / 6.0) * f.grid.dx * float(np.sum(u ** 4))


def gevrey_mass(f: SpectralField, sigma: float) -> float:
    """``||f||^2_{G^{sigma,0}}``."""
    return gevrey_norm(f, sigma, 0.0) ** 2


def commutator_residual(f: SpectralField, sigma: float, eq: EquationSpec,
                        dealias: bool = True) -> SpectralField:
    """Defect ``F(U)`` (mKdV) or ``G(V)`` (tNLS) for ``U = f``.

    mKdV: ``(mu/3) d/dx [U^3 - e^{s|D|}((e^{-s|D|}U)^3)]``;
    tNLS: ``-[|V|^2 V - e^{s|D|}(|v|^2 v)]`` with ``v = e^{-s|D|} V``.
    Products are formed on the dealiased band.
    """
    grid = f.grid
    mask = dealias_mask(grid) if dealias else np.ones(grid.n, dtype=bool)
    mask = mask.copy()
    mask[grid.unpaired] = False
    U = f.coeffs * mask
    u = U * gevrey_weight(grid, -sigma) if sigma else U
    Uphys = _inverse(grid, U)
    uphys = _inverse(grid, u)
    if eq.is_mkdv:
        Uphys, uphys = Uphys.real, uphys.real
        big = _forward(grid, Uphys ** 3)
        small = _forward(grid, uphys ** 3)
        pref = (eq.mu / 3.0) * 1j * grid.xi
    else:
        big = _forward(grid, np.abs(Uphys) ** 2 * Uphys)
        small = _forward(grid, np.abs(uphys) ** 2 * uphys)
        pref = -1.0
    if sigma:
        small = small * gevrey_weight(grid, sigma)
    out = pref * (big - small) * mask
    if f.real and eq.is_mkdv:
        out = 0.5 * (out + np.conj(out[(-grid.k) % grid.n]))
    return f.with_coeffs(out)


@dataclass(frozen=True)
class RadiusFit:
    sigma_hat: float
    fit_range: tuple          # (min |k|, max |k|) used
    residual: float
    noise_floor: float
    modes_used: int
    flags: tuple = ()


def estimate_radius(f: SpectralField, noise_floor: float | None = None, k_min: int = 4,
                    weights=None) -> RadiusFit:
    """Fit ``log|c_k| = a - sigma |xi_k|`` over resolved modes.

    Modes with ``|k| < k_min`` or ``|c_k| <= noise_floor`` (default
    ``1e-13 * max|c|``) are excluded, as is the unpaired mode.  Returns
    ``sigma_hat = max(0, -slope)``.  ``weights`` (per mode) default to 1.
    """
    grid = f.grid
    a = np.abs(f.coeffs)
    top = float(np.max(a)) if a.size else 0.0
    floor = 1e-13 * top if noise_floor is None else float(noise_floor)
    sel = (np.abs(grid.k) >= k_min) & (a > floor)
    sel[grid.unpaired] = False
    count = int(np.sum(sel))
    if top == 0.0 or count < 8:
        raise UnresolvedRadius(f"unresolved radius: {count} modes above floor {floor:.3e}")
    x = np.abs(grid.xi[sel])
    y = np.log(a[sel])
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)[sel]
    A = np.stack([np.ones_like(x), -x], axis=1)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.sum(w * resid ** 2) / np.sum(w)))
    flags = []
    if np.unique(x).size >= 4:
        q = np.polyfit(x, y, 2, w=sw)
        rq = y - np.polyval(q, x)
        rms_q = float(np.sqrt(np.sum(w * rq ** 2) / np.sum(w)))
        if q[0] < 0 and rms_q < 0.5 * rms and rms > 1e-6:
            flags.append("superexponential")
    sigma_hat = float(coef[1])
    if sigma_hat < 0:
        flags.append("clamped")
        sigma_hat = 0.0
    ks = np.abs(grid.k[sel])
    return RadiusFit(sigma_hat, (int(ks.min()), int(ks.max())), rms, floor, count, tuple(flags))


@dataclass
class DriftSweep:
    sigmas: list
    drifts: list               # clamped sup drift per sigma (nan if excluded)
    q0: list                   # Q_sigma(0)
    trusted: list
    exponent: float            # slope of log D vs log sigma (nan if < 2 points)
    constant: float            # smallest C with D <= C sigma^ell B(Q0) over the sweep
    ell: float
    raw_drifts: list = field(default_factory=list)
    mkdv: bool = True

    def bound(self, i: int, constant: float | None = None) -> float:
        C = self.constant if constant is None else constant
        return C * self.sigmas[i] ** self.ell * self.data_terms[i]

    @property
    def data_terms(self) -> list:
        return [q * q * (1.0 + q) if self.mkdv else q * q for q in self.q0]


def _sweep_quantity(eq: EquationSpec):
    if eq.is_mkdv:
        return lambda f, s: gevrey_energy(f, s, eq.mu)
    return gevrey_mass


def drift_sweep(states, sigmas, eq: EquationSpec, ell: float | None = None) -> DriftSweep:
    """Per-sigma drift ``D = sup_t Q_sigma(t) - Q_sigma(0)`` over stored states.

    ``states`` is a :class:`~gevreylab.dynamics.Trajectory` or a sequence of
    fields (first = initial).  Drifts are clamped at 0; sigmas beyond the
    grid trust radius are excluded (nan) and flagged.
    """
    from .dynamics import MKDV_ELL, TNLS_THETA

    states = list(getattr(states, "states", states))
    if ell is None:
        ell = MKDV_ELL if eq.is_mkdv else TNLS_THETA
    Q = _sweep_quantity(eq)
    s_idx = 1.0 if eq.is_mkdv else 0.0
    drifts, raw, q0s, trusted = [], [], [], []
    for sigma in sigmas:
        try:
            ok = all(gevrey_trusted(f, sigma, s_idx) for f in (states[0], states[-1]))
        except GevreyOverflowError:
            ok = False
        trusted.append(ok)
        if not ok:
            drifts.append(math.nan)
            raw.append(math.nan)
            q0s.append(math.nan)
            continue
        vals = np.array([Q(f, sigma) for f in states])
        d = float(np.max(vals) - vals[0])
        raw.append(d)
        drifts.append(max(d, 0.0))
        q0s.append(float(vals[0]))
    sw = DriftSweep(list(map(float, sigmas)), drifts, q0s, trusted, math.nan, 0.0, ell, raw,
                    eq.is_mkdv)
    pos = [i for i, d in enumerate(drifts) if trusted[i] and d > 0 and sigmas[i] > 0]
    if len(pos) >= 2:
        slope, _ = np.polyfit(np.log([sigmas[i] for i in pos]), np.log([drifts[i] for i in pos]), 1)
        sw.exponent = float(slope)
    terms = sw.data_terms
    ratios = [drifts[i] / (sigmas[i] ** ell * terms[i]) for i in range(len(sigmas))
              if trusted[i] and sigmas[i] > 0 and terms[i] > 0]
    sw.constant = float(max(ratios)) if ratios else 0.0
    return sw


def drift_constant(states, sigmas, eq: EquationSpec, ell: float | None = None) -> float:
    """Smallest ``C`` covering every trusted sigma of a drift sweep."""
    return drift_sweep(states, sigmas, eq, ell).constant


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    energy: float
    momentum: complex
    gevrey_energy: dict
    sigma_hat: float
    hs_norms: dict
    trust_flags: dict


def make_record(t: float, f: SpectralField, eq: EquationSpec, sigmas=(), hs=(),
                noise_floor: float | None = None) -> DiagnosticsRecord:
    if eq.is_mkdv:
        m = mass(f)
        e = energy_mkdv(f, eq.mu)
        p = tnls_momentum(f)
    else:
        m = tnls_mass(f)
        e = math.nan
        p = tnls_momentum(f)
    gq, flags = {}, {}
    for sigma in sigmas:
        s_idx = 1.0 if eq.is_mkdv else 0.0
        try:
            flags[sigma] = gevrey_trusted(f, sigma, s_idx)
            gq[sigma] = gevrey_energy(f, sigma, eq.mu) if eq.is_mkdv else gevrey_mass(f, sigma)
        except GevreyOverflowError:
            flags[sigma] = False
            gq[sigma] = math.nan
    try:
        sh = estimate_radius(f, noise_floor).sigma_hat
    except UnresolvedRadius:
        sh = math.nan
    hsn = {s: gevrey_norm(f, 0.0, s) for s in hs}
    return DiagnosticsRecord(t, m, e, p, gq, sh, hsn, flags)


def lp4(f: SpectralField) -> float:
    return lp_norm(f, 4)


def gagliardo_nirenberg_ratio(f: SpectralField) -> float:
    """``||g||_4^4 / (||g_x||_2 ||g||_2^3)`` for a real field."""
    g = to_physical(f)
    num = f.grid.dx * float(np.sum(np.abs(g) ** 4))
    dx = math.sqrt(f.grid.length * float(np.sum(f.grid.xi ** 2 * np.abs(f.coeffs) ** 2)))
    l2 = math.sqrt(mass(f))
    den = dx * l2 ** 3
    return num / den if den > 0 else 0.0
