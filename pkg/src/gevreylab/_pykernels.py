"""Pure-numpy implementations of the sampling kernels.

Each function has a compiled twin in ``_ckernels.pyx`` with the same
signature and the same floating-point recipe; :mod:`gevreylab.kernels`
picks one at import.
"""

import numpy as np

# violations are counted above 1 + RATIO_SLACK
RATIO_SLACK = 1e-12

BACKEND = "python"


def _scan(ratio):
    i = int(np.argmax(ratio))
    return float(ratio[i]), int(np.count_nonzero(ratio > 1.0 + RATIO_SLACK)), i


def exp_lemma_ratios(a, b, c, sigma, theta):
    """LHS/RHS of the exponential lemma, both sides divided by
    ``exp(sigma(|a|+|b|+|c|))``:
    ``(1 - exp(-sigma*gap)) / (2 sigma m)^theta`` with
    ``gap = |a|+|b|+|c| - |a+b+c|`` and ``m`` the smallest pair sum.
    A zero left side gives ratio 0; a zero right side with a positive
    left side gives ``inf``.
    """
    aa, ab, ac = np.abs(a), np.abs(b), np.abs(c)
    gap = aa + ab + ac - np.abs(a + b + c)
    gap = np.maximum(gap, 0.0)
    lhs = -np.expm1(-sigma * gap)
    m = np.minimum(np.minimum(aa + ab, aa + ac), ab + ac)
    base = 2.0 * sigma * m
    out = np.zeros_like(lhs)
    pos = lhs > 0
    with np.errstate(divide="ignore"):
        logr = np.log(lhs[pos]) - theta[pos] * np.log(base[pos])
    out[pos] = np.exp(logr)
    return out


def exp_lemma_scan(a, b, c, sigma, theta):
    """``(max_ratio, violations, argmax)`` of :func:`exp_lemma_ratios`."""
    return _scan(exp_lemma_ratios(a, b, c, sigma, theta))


def ximed_ratios(x1, x2, x3):
    """``(|x1|+|x2|+|x3| - |x1+x2+x3|) / med(|x_i|)``; 0 when both vanish."""
    a = np.sort(np.abs(np.stack([x1, x2, x3])), axis=0)
    lhs = a[0] + a[1] + a[2] - np.abs(x1 + x2 + x3)
    lhs = np.maximum(lhs, 0.0)
    med = a[1]
    out = np.zeros_like(lhs)
    pos = lhs > 0
    with np.errstate(divide="ignore"):
        out[pos] = lhs[pos] / med[pos]
    return out


def ximed_scan(x1, x2, x3, bound):
    return _scan(ximed_ratios(x1, x2, x3) / bound)


def bracket_ratios(xi, x1, x2):
    """``min{|z|+|x1|, |z|+|x2|, |x1|+|x2|} / (3<z><x2><x1>/<xi>)``,
    ``z = xi - x1 - x2``, ``<t> = 1 + |t|``."""
    z = np.abs(xi - x1 - x2)
    a1, a2 = np.abs(x1), np.abs(x2)
    lhs = np.minimum(np.minimum(z + a1, z + a2), a1 + a2)
    rhs = 3.0 * (1.0 + z) * (1.0 + a2) * (1.0 + a1) / (1.0 + np.abs(xi))
    return lhs / rhs


def bracket_scan(xi, x1, x2):
    return _scan(bracket_ratios(xi, x1, x2))


def _heavy_pdf(x, p):
    """Density ``(p-1)/2 (1+|x|)^-p`` on the real line."""
    return 0.5 * (p - 1.0) * np.exp(-p * np.log1p(np.abs(x)))


# ridge widths below this are not resolved in double precision near |x| ~ 1e4 (ulp 2e-12)
SCALE_CAP = 1e8


def ridge_scales(xi, alpha, beta, x1, x2):
    """Inverse widths of the resonance ridges: across ``x2 = x1`` and
    ``x2 = xi`` (same scale, a function of ``x1``) and across the
    ``x1 = x*`` ridge (a function of ``x2``)."""
    g = 2.0 * alpha + 3.0 * beta * (xi + x1)
    xstar = -xi - 2.0 * alpha / (3.0 * beta)
    s1 = np.clip(np.abs(g) * np.abs(xi - x1), 1.0, SCALE_CAP)
    s3 = np.clip(3.0 * abs(beta) * np.abs(xi - x2) * np.abs(xstar - x2), 1.0, SCALE_CAP)
    return s1, s3


def kernel_weights(xi, tau, s, b, bp, alpha, beta, ptail, mix, x1, x2, y1, y2):
    """Importance weights for ``I(xi, tau) = int K^2 d eta_1 d eta_2``.

    With ``y_i = tau_i - phi(x_i)`` and ``c = tau - phi(xi) + H`` the
    tau-part of ``K^2`` is ``k(y1) k(y2) k(y1 - y2 + c)``, ``k = <.>^-2b``.
    ``y2`` is drawn from ``r(y2)/2 + r(y2 - c)/2`` and then ``y1`` from
    ``r(y1)/2 + r(y1 - y2 + c)/2``, ``r`` the normalized ``k``, which
    covers all three corners where that product is large.  ``(x1, x2)``
    come from a four-part mixture: a product of ``(ptail-1)/2
    (1+|x|)^-ptail`` densities plus one component per zero set of the
    resonance function, with weights ``mix``.
    """
    xstar = -xi - 2.0 * alpha / (3.0 * beta)
    phi = lambda t: alpha * t * t + beta * t * t * t  # noqa: E731
    x3 = xi + x1 - x2
    # resonance function phi(xi) + phi(x1) - phi(x2) - phi(x3)
    p = xi - x2
    q = x1 - x2
    H = -p * q * (2.0 * alpha + 3.0 * beta * (xi + x1))
    c = (tau - phi(xi)) + H
    A = y1 - y2 + c
    logn = (s * np.log1p(abs(xi))
            - s * (np.log1p(np.abs(x3)) + np.log1p(np.abs(x1)) + np.log1p(np.abs(x2))))
    logf = 2.0 * logn + 2.0 * bp * np.log1p(abs(tau - phi(xi)))
    # tau part over its proposal, as 1/(sum of inverse-k terms)
    k1 = np.log1p(np.abs(y1)) * (2.0 * b)
    k2 = np.log1p(np.abs(y2)) * (2.0 * b)
    kA = np.log1p(np.abs(A)) * (2.0 * b)
    k2c = np.log1p(np.abs(y2 - c)) * (2.0 * b)
    ty = 1.0 / ((1.0 + np.exp(k1 - kA)) * (1.0 + np.exp(k2 - k2c)))
    # proposal density
    s1, s3 = ridge_scales(xi, alpha, beta, x1, x2)
    s2 = s1
    hw = 2.0 * b
    h1 = _heavy_pdf(x1, ptail)
    h2 = _heavy_pdf(x2, ptail)
    q = (mix[0] * h1 * h2
         + mix[1] * h1 * s1 * _heavy_pdf(s1 * (x2 - x1), hw)
         + mix[2] * h1 * s2 * _heavy_pdf(s2 * (x2 - xi), hw)
         + mix[3] * h2 * s3 * _heavy_pdf(s3 * (x1 - xstar), hw))
    ynorm = (4.0 / (2.0 * b - 1.0)) ** 2
    return ynorm * ty * np.exp(logf - kA) / q
