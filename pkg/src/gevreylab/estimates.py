"""Sampling checks of the standalone inequalities.

Every check draws from ``numpy.random.SeedSequence(seed).spawn(...)``
sub-streams (one per chunk or trial) and reduces in a fixed order, so a
given seed and configuration always produce the same report.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .equations import EquationSpec
from .spectral import GridSpec, _forward, _inverse, hann_window, make_spacetime, xsb_norm

__all__ = [
    "McConfig",
    "McEstimate",
    "Report",
    "RatioStats",
    "HypothesisError",
    "check_exp_lemma",
    "check_ximed",
    "check_bracket",
    "kernel_integrand",
    "kernel_I",
    "kernel_sweep",
    "trilinear_ratio",
    "strichartz_ratio",
    "refinement_study",
]

CHUNK = 1 << 16
XIMED_BOUND = 12.0
UNCONVERGED = 0.2


class HypothesisError(ValueError):
    """Parameters outside the range where the bound is claimed."""


def _streams(seed: int, count: int, tag: int = 0):
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, tag])
    return [np.random.default_rng(c) for c in ss.spawn(count)]


def _chunks(samples: int):
    full, rest = divmod(int(samples), CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


@dataclass
class Report:
    """Serializable outcome of one check."""

    check: str
    parameters: dict
    samples: int
    max_ratio: float
    violations: int
    seed: int
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _merge_scan(results, offsets):
    best, viol, where = -math.inf, 0, -1
    for (m, v, i), off in zip(results, offsets):
        viol += v
        if m > best:
            best, where = m, off + i
    return best, viol, where


# --- pointwise inequalities -------------------------------------------------

def check_exp_lemma(samples: int = 1_000_000, seed: int = 42, R: float = 50.0,
                    sigma_max: float = 5.0) -> Report:
    """Sample ``(a, b, c)`` in ``[-R, R]^3``, ``sigma`` in ``(0, sigma_max]`` and
    ``theta`` in ``[0, 1]`` and compare
    ``e^{s|a|}e^{s|b|}e^{s|c|} - e^{s|a+b+c|}`` against
    ``[2 s min(|a|+|b|, |a|+|c|, |b|+|c|)]^theta e^{s|a|}e^{s|b|}e^{s|c|}``.
    """
    sizes = _chunks(samples)
    results, offsets, worst = [], [], None
    off = 0
    best = -math.inf
    for rng, size in zip(_streams(seed, len(sizes)), sizes):
        a, b, c = rng.uniform(-R, R, (3, size))
        sigma = sigma_max * (1.0 - rng.random(size))
        theta = rng.random(size)
        res = kernels.exp_lemma_scan(a, b, c, sigma, theta)
        if res[0] > best:
            best = res[0]
            i = res[2]
            worst = {"a": a[i], "b": b[i], "c": c[i], "sigma": sigma[i], "theta": theta[i]}
        results.append(res)
        offsets.append(off)
        off += size
    mx, viol, _ = _merge_scan(results, offsets)
    return Report("exp_lemma", {"R": R, "sigma_max": sigma_max, "theta_range": [0.0, 1.0]},
                  int(samples), mx, viol, int(seed), viol == 0,
                  {"worst_sample": worst, "backend": kernels.BACKEND})


def check_ximed(samples: int = 1_000_000, seed: int = 42, R: float = 50.0) -> Report:
    """``|x1|+|x2|+|x3| - |x1+x2+x3| <= 12 med(|x_i|)`` on random triples.

    Half the triples are uniform in ``[-R, R]^3``; the other half put two
    entries near cancellation, where the left side is largest.
    """
    sizes = _chunks(samples)
    results, offsets, off = [], [], 0
    for rng, size in zip(_streams(seed, len(sizes)), sizes):
        x1, x2, x3 = rng.uniform(-R, R, (3, size))
        near = rng.random(size) < 0.5
        x2 = np.where(near, -x1 + rng.normal(0.0, 1.0, size), x2)
        res = kernels.ximed_scan(x1, x2, x3, XIMED_BOUND)
        results.append(res)
        offsets.append(off)
        off += size
    mx, viol, _ = _merge_scan(results, offsets)
    return Report("ximed", {"R": R, "bound": XIMED_BOUND}, int(samples), mx * XIMED_BOUND, viol,
                  int(seed), viol == 0,
                  {"ratio_to_bound": mx, "backend": kernels.BACKEND})


def check_bracket(samples: int = 1_000_000, seed: int = 42, R: float = 50.0) -> Report:
    """``min{|z|+|x1|, |z|+|x2|, |x1|+|x2|} <= 3<z><x2><x1>/<xi>``,
    ``z = xi - x1 - x2``; the constant 3 is taken as given."""
    sizes = _chunks(samples)
    results, offsets, off = [], [], 0
    for rng, size in zip(_streams(seed, len(sizes)), sizes):
        xi, x1, x2 = rng.uniform(-R, R, (3, size))
        results.append(kernels.bracket_scan(xi, x1, x2))
        offsets.append(off)
        off += size
    mx, viol, _ = _merge_scan(results, offsets)
    return Report("bracket", {"R": R, "constant": 3.0}, int(samples), mx, viol, int(seed),
                  viol == 0, {"backend": kernels.BACKEND})


# --- kernel integral ----------------------------------------------------------

@dataclass(frozen=True)
class McConfig:
    samples: int = 1_000_000
    seed: int = 42
    truncation: float = 1e4
    proposal_tail: float = 1.1
    mix: tuple = (0.25, 0.25, 0.25, 0.25)

    def __post_init__(self):
        if int(self.samples) < 10_000:
            raise ValueError(f"need at least 1e4 samples, got {self.samples}")
        if not self.truncation > 0:
            raise ValueError("truncation must be positive")
        if not self.proposal_tail > 1:
            raise ValueError("proposal_tail must exceed 1 (normalizable density)")
        if len(self.mix) != 4 or min(self.mix) < 0 or not math.isclose(sum(self.mix), 1.0):
            raise ValueError("mix must be four non-negative weights summing to 1")
        if self.mix[0] <= 0:
            raise ValueError("the product component must have positive weight")


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    samples_used: int
    seed: int
    flags: tuple = ()
    shell: float = 0.0          # part of value from truncation/10 < max|x_i| <= truncation
    max_weight_share: float = 0.0
    tail: float = 0.0           # estimated mass beyond the box, see kernel_I

    @property
    def relative_error(self) -> float:
        return self.stderr / self.value if self.value > 0 else math.inf

    @property
    def converged(self) -> bool:
        return "unconverged" not in self.flags


def _validate_kernel(s, b, bp, eq):
    if eq.is_mkdv:
        raise HypothesisError("the kernel bound is stated for the tNLS phase")
    if not -0.25 < s <= 0:
        raise HypothesisError(f"need -1/4 < s <= 0, got s={s}")
    if not b > 7.0 / 12.0:
        raise HypothesisError(f"need b > 7/12, got b={b}")
    if not bp < s / 3.0:
        raise HypothesisError(f"need b' < s/3 = {s / 3.0:.6g}, got b'={bp}")


def kernel_integrand(xi, tau, x1, t1, x2, t2, s, b, bp, eq: EquationSpec):
    """``K(eta, eta1, eta2)`` at a point, with ``<t> = 1 + |t|``."""
    br = lambda t: 1.0 + np.abs(t)  # noqa: E731
    ph = eq.phase
    x3 = xi + x1 - x2
    num = br(xi) ** s * br(x3) ** -s * br(x2) ** -s * br(x1) ** -s
    den = (br(tau - ph(xi)) ** -bp * br(tau + t1 - t2 - ph(x3)) ** b
           * br(t1 - ph(x1)) ** b * br(t2 - ph(x2)) ** b)
    return num / den


def _heavy(rng, size, p):
    """Draws from ``(p-1)/2 (1+|x|)^-p``."""
    u = rng.random(size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * np.expm1(-np.log1p(-u) / (p - 1.0))


def _kernel_chunk(rng, size, xi, tau, s, b, bp, eq, mc):
    al, be = eq.alpha, eq.beta
    mix = np.asarray(mc.mix, dtype=float)
    comp = rng.choice(4, size=size, p=mix)
    base = _heavy(rng, size, mc.proposal_tail)
    other = _heavy(rng, size, mc.proposal_tail)
    w = _heavy(rng, size, 2.0 * b)
    z1 = _heavy(rng, size, 2.0 * b)
    z2 = _heavy(rng, size, 2.0 * b)
    pick1 = rng.random(size) < 0.5
    pick2 = rng.random(size) < 0.5
    xstar = -xi - 2.0 * al / (3.0 * be)
    x1 = np.where(comp == 3, 0.0, base)
    x2 = np.where(comp == 3, base, other)
    s1, _ = kernels.ridge_scales(xi, al, be, x1, x2)
    x2 = np.where(comp == 1, x1 + w / s1, x2)
    x2 = np.where(comp == 2, xi + w / s1, x2)
    _, s3 = kernels.ridge_scales(xi, al, be, np.ascontiguousarray(x1), np.ascontiguousarray(x2))
    x1 = np.where(comp == 3, xstar + w / s3, x1)
    x1 = np.ascontiguousarray(x1)
    x2 = np.ascontiguousarray(x2)
    # tau directions: y2 near 0 or near c, then y1 near 0 or near y2 - c
    c = (tau - float(eq.phase(xi))) - (xi - x2) * (x1 - x2) * (2.0 * al + 3.0 * be * (xi + x1))
    y2 = np.where(pick2, z2 + c, z2)
    y1 = np.where(pick1, z1 + (y2 - c), z1)
    wt = kernels.kernel_weights(float(xi), float(tau), float(s), float(b), float(bp), al, be,
                                float(mc.proposal_tail), mix, x1, x2, y1, y2)
    reach = np.maximum(np.abs(x1), np.abs(x2))
    inside = reach <= mc.truncation
    shell = inside & (reach > 0.1 * mc.truncation)
    wt = np.where(inside, wt, 0.0)
    return wt, shell


def kernel_I(xi: float, tau: float, s: float, b: float, bp: float, eq: EquationSpec,
             mc: McConfig = McConfig(), stream: int = 0) -> McEstimate:
    """Importance-sampled ``int K^2 d eta_1 d eta_2`` over ``|xi_1|, |xi_2| <= truncation``.

    ``tau_i`` enter through ``y_i = tau_i - phi(xi_i)``, drawn from mixtures
    of ``<y>^{-2b}`` densities centred where each of the three ``<.>^{-b}``
    factors of the kernel is of order one.  ``(xi_1, xi_2)`` use a defensive
    mixture of a heavy-tailed product density and three components hugging
    the zero set of the resonance function.  ``stream`` selects an
    independent family of sub-seeds for the same ``mc.seed``.
    """
    _validate_kernel(s, b, bp, eq)
    sizes = _chunks(mc.samples)
    total = sq = shell = top = 0.0
    for rng, size in zip(_streams(mc.seed, len(sizes), tag=1 + int(stream)), sizes):
        wt, sh = _kernel_chunk(rng, size, xi, tau, s, b, bp, eq, mc)
        total += float(np.sum(wt))
        sq += float(np.sum(wt * wt))
        shell += float(np.sum(wt[sh]))
        top = max(top, float(np.max(wt)))
    n = int(mc.samples)
    mean = total / n
    var = max(sq / n - mean * mean, 0.0) * n / (n - 1)
    err = math.sqrt(var / n)
    # each resonance ridge carries mass ~ |x|^{-4s} / x^2 per unit length,
    # so the part beyond T scales like T^{-(1+4s)}; extrapolate from the shell
    kappa = 1.0 + 4.0 * s
    tail = (shell / n) / (10.0 ** kappa - 1.0)
    flags = []
    if not math.isfinite(mean):
        raise FloatingPointError("kernel estimate is not finite")
    if mean <= 0 or err / mean > UNCONVERGED:
        flags.append("unconverged")
    return McEstimate(mean, err, n, int(mc.seed), tuple(flags),
                      shell / n, top / total if total > 0 else 0.0, tail)


def kernel_sweep(xis, s: float, b: float, bp: float, eq: EquationSpec,
                 mc: McConfig = McConfig()) -> list:
    """``kernel_I`` at ``tau = phi(xi)`` for each ``xi``."""
    return [kernel_I(x, float(eq.phase(x)), s, b, bp, eq, mc) for x in xis]


# --- space-time ratio tests -------------------------------------------------

@dataclass
class RatioStats:
    form: str
    n: int
    m: int
    trials: int
    skipped: int
    max: float
    median: float
    quantiles: dict
    window: float
    label: str = "empirical boundedness"


def _time_window(grid: GridSpec, eq: EquationSpec, m: int, band: int, detune: float) -> float:
    """Longest window whose temporal Nyquist frequency covers a cubic product."""
    xi = 2.0 * np.pi * np.arange(-band, band + 1) / grid.length
    top = float(np.max(np.abs(eq.phase(xi))))
    reach = 3.0 * (top * (1.0 + detune)) * 1.1
    return math.pi * m / max(reach, 1.0)


def _random_field(rng, grid, eq, times, band, s, real, modes, detune, top):
    """Windowed sum of a few plane waves ``e^{i(xi x + tau t)}``; each one sits
    on ``tau = phi(xi)`` or, with probability 1/2, is detuned off it."""
    u = np.zeros((times.size, grid.n), dtype=complex)
    count = int(rng.integers(1, modes + 1))
    for k in rng.integers(-band, band + 1, count):
        xi = 2.0 * np.pi * k / grid.length
        amp = complex(rng.normal(), rng.normal()) * (1.0 + abs(xi)) ** (-s)
        d = 0.0 if rng.random() < 0.5 else rng.uniform(-detune, detune) * top
        u += amp * np.exp(1j * (xi * grid.x[None, :] + (float(eq.phase(xi)) + d) * times[:, None]))
    if real:
        u = u.real
    return u * hann_window(times.size)[:, None]


def _ratio_trials(form, trials, s, b, bp, eq, grid, m, seed, modes=4, detune=0.5, fields=None):
    band = grid.n // 8
    T = _time_window(grid, eq, m, band, detune)
    times = np.arange(m) * (T / m)
    xi = 2.0 * np.pi * np.arange(-band, band + 1) / grid.length
    top = float(np.max(np.abs(eq.phase(xi))))
    real = eq.is_mkdv
    out, skipped = [], 0
    for rng in _streams(seed, trials, tag=7):
        if fields is None:
            us = [_random_field(rng, grid, eq, times, band, s, real, modes, detune, top)
                  for _ in range(3)]
        else:
            us = [f(grid, times) * hann_window(m)[:, None] for f in fields]
        den_b = 0.51 if form == "strichartz" else b
        den_s = 0.0 if form == "strichartz" else s
        den = 1.0
        for u in us:
            den *= xsb_norm(make_spacetime(grid, times, u, "boxcar"), den_s, den_b, eq)
        if den == 0.0:
            skipped += 1
            continue
        if form == "mkdv":
            p = us[0] * us[1] * us[2]
            p = _inverse(grid, _forward(grid, p) * (1j * grid.xi)[None, :])
            num = xsb_norm(make_spacetime(grid, times, p, "boxcar"), s, b - 1.0, eq)
        elif form == "tnls":
            p = us[0] * us[1] * np.conj(us[2])
            num = xsb_norm(make_spacetime(grid, times, p, "boxcar"), s, bp, eq)
        else:
            p = us[0] * us[1] * us[2]
            num = math.sqrt(grid.dx * (T / m) * float(np.sum(np.abs(p) ** 2)))
        out.append(num / den)
    r = np.array(out)
    if r.size == 0:
        return RatioStats(form, grid.n, m, trials, skipped, math.nan, math.nan, {}, T)
    q = {f"q{int(100 * p)}": float(np.quantile(r, p)) for p in (0.5, 0.9, 0.99)}
    return RatioStats(form, grid.n, m, trials, skipped, float(r.max()), float(np.median(r)), q, T)


def trilinear_ratio(trials: int, s: float, b: float, eq: EquationSpec, grid: GridSpec,
                    seed: int, m: int | None = None, bp: float | None = None,
                    fields=None) -> RatioStats:
    """Empirical ratio of the cubic estimate on random band-limited fields.

    mKdV: ``||d_x(u1 u2 u3)||_{X^{s,b-1}} / prod ||u_i||_{X^{s,b}}`` on real
    fields.  tNLS: ``||u1 u2 conj(u3)||_{X^{s,b'}} / prod ||u_i||_{X^{s,b}}``
    with ``b'`` defaulting to ``s/3 - 0.05``.  Fields live on ``|k| <= n/8``
    and the time window is chosen so the product is not aliased in time.
    ``fields`` optionally replaces the random draw by three callables
    ``f(grid, times) -> values``.
    """
    eps = b - 0.5
    if not 0.0 < eps <= 0.1 + 1e-12:
        raise ValueError(f"need b = 1/2 + eps with eps in (0, 0.1], got b={b}")
    if not eq.is_mkdv:
        bp = s / 3.0 - 0.05 if bp is None else bp
    return _ratio_trials("mkdv" if eq.is_mkdv else "tnls", trials, s, b, bp, eq, grid,
                         m or grid.n, seed, fields=fields)


def strichartz_ratio(trials: int, grid: GridSpec, seed: int, m: int | None = None,
                     fields=None) -> RatioStats:
    """``||u1 u2 u3||_{L^2_{x,t}} / prod ||u_i||_{X^{0,0.51}}`` for the mKdV phase."""
    return _ratio_trials("strichartz", trials, 0.0, 0.51, None, EquationSpec.mkdv(), grid,
                         m or grid.n, seed, fields=fields)


def refinement_study(run, sizes=((64, 64), (128, 128)), length: float = 2.0 * math.pi) -> dict:
    """Call ``run(grid, m)`` on each ``(n, m)`` and report the growth of the maxima."""
    stats = [run(GridSpec(n, length), m) for n, m in sizes]
    growth = [stats[i + 1].max / stats[i].max for i in range(len(stats) - 1)]
    return {"stats": [asdict(st) for st in stats], "growth": growth,
            "max_growth": max(growth) if growth else math.nan}
