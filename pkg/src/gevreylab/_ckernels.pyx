# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels; see ``_pykernels`` for the reference versions."""

import numpy as np
from libc.math cimport exp, expm1, fabs, log, log1p, INFINITY

RATIO_SLACK = 1e-12
SCALE_CAP = 1e8
cdef double _CAP = 1e8
BACKEND = "cython"


cdef inline double _min3(double a, double b, double c) nogil:
    cdef double m = a if a < b else b
    return m if m < c else c


cdef tuple _scan(double[::1] r):
    cdef Py_ssize_t i, n = r.shape[0], imax = 0
    cdef long viol = 0
    cdef double best = -INFINITY, lim = 1.0 + RATIO_SLACK
    for i in range(n):
        if r[i] > best:
            best = r[i]
            imax = i
        if r[i] > lim:
            viol += 1
    return float(best), int(viol), int(imax)


def exp_lemma_ratios(const double[::1] a, const double[::1] b, const double[::1] c,
                     const double[::1] sigma, const double[::1] theta):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef double aa, ab, ac, gap, lhs, m
    with nogil:
        for i in range(n):
            aa = fabs(a[i]); ab = fabs(b[i]); ac = fabs(c[i])
            gap = aa + ab + ac - fabs(a[i] + b[i] + c[i])
            if gap < 0.0:
                gap = 0.0
            lhs = -expm1(-sigma[i] * gap)
            if lhs > 0.0:
                m = _min3(aa + ab, aa + ac, ab + ac)
                o[i] = exp(log(lhs) - theta[i] * log(2.0 * sigma[i] * m))
    return out


def exp_lemma_scan(a, b, c, sigma, theta):
    return _scan(exp_lemma_ratios(a, b, c, sigma, theta))


def ximed_ratios(const double[::1] x1, const double[::1] x2, const double[::1] x3):
    cdef Py_ssize_t i, n = x1.shape[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    cdef double a, b, c, lo, hi, med, lo2, lhs
    with nogil:
        for i in range(n):
            a = fabs(x1[i]); b = fabs(x2[i]); c = fabs(x3[i])
            lo = _min3(a, b, c)
            hi = a if a > b else b
            hi = hi if hi > c else c
            med = b if a < b else a
            med = med if med < c else c
            lo2 = a if a < b else b
            med = med if med > lo2 else lo2
            # same summation order as the sorted numpy version
            lhs = lo + med + hi - fabs(x1[i] + x2[i] + x3[i])
            if lhs > 0.0:
                o[i] = lhs / med
    return out


def ximed_scan(x1, x2, x3, double bound):
    return _scan(ximed_ratios(x1, x2, x3) / bound)


def bracket_ratios(const double[::1] xi, const double[::1] x1, const double[::1] x2):
    cdef Py_ssize_t i, n = xi.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double z, a1, a2
    with nogil:
        for i in range(n):
            z = fabs(xi[i] - x1[i] - x2[i])
            a1 = fabs(x1[i]); a2 = fabs(x2[i])
            o[i] = (_min3(z + a1, z + a2, a1 + a2)
                    / (3.0 * (1.0 + z) * (1.0 + a2) * (1.0 + a1) / (1.0 + fabs(xi[i]))))
    return out


def bracket_scan(xi, x1, x2):
    return _scan(bracket_ratios(xi, x1, x2))


cdef inline double _heavy_pdf(double x, double p) nogil:
    return 0.5 * (p - 1.0) * exp(-p * log1p(fabs(x)))


cdef inline double _clip(double x) nogil:
    if x < 1.0:
        return 1.0
    if x > _CAP:
        return _CAP
    return x


def ridge_scales(double xi, double alpha, double beta, const double[::1] x1,
                 const double[::1] x2):
    cdef Py_ssize_t i, n = x1.shape[0]
    s1 = np.empty(n)
    s3 = np.empty(n)
    cdef double[::1] o1 = s1, o3 = s3
    cdef double xstar = -xi - 2.0 * alpha / (3.0 * beta)
    with nogil:
        for i in range(n):
            o1[i] = _clip(fabs(2.0 * alpha + 3.0 * beta * (xi + x1[i])) * fabs(xi - x1[i]))
            o3[i] = _clip(3.0 * fabs(beta) * fabs(xi - x2[i]) * fabs(xstar - x2[i]))
    return s1, s3


def kernel_weights(double xi, double tau, double s, double b, double bp, double alpha,
                   double beta, double ptail, const double[::1] mix, const double[::1] x1,
                   const double[::1] x2, const double[::1] y1, const double[::1] y2):
    cdef Py_ssize_t i, n = x1.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double xstar = -xi - 2.0 * alpha / (3.0 * beta)
    cdef double res0 = tau - (alpha * xi * xi + beta * xi * xi * xi)
    cdef double head = s * log1p(fabs(xi))
    cdef double tail = 2.0 * bp * log1p(fabs(res0))
    cdef double ynorm = (4.0 / (2.0 * b - 1.0)) ** 2
    cdef double hw = 2.0 * b
    cdef double hnorm = 0.5 * (ptail - 1.0)
    cdef double l1, l2, u1, u2, x3, g, H, c, A, logn, logf, k1, k2, kA, k2c, ty, s1, s3, h1, h2, q
    with nogil:
        for i in range(n):
            u1 = x1[i]; u2 = x2[i]
            x3 = xi + u1 - u2
            g = 2.0 * alpha + 3.0 * beta * (xi + u1)
            H = -(xi - u2) * (u1 - u2) * g
            c = res0 + H
            A = y1[i] - y2[i] + c
            l1 = log1p(fabs(u1))
            l2 = log1p(fabs(u2))
            logn = head - s * (log1p(fabs(x3)) + l1 + l2)
            logf = 2.0 * logn + tail
            k1 = log1p(fabs(y1[i])) * hw
            k2 = log1p(fabs(y2[i])) * hw
            kA = log1p(fabs(A)) * hw
            k2c = log1p(fabs(y2[i] - c)) * hw
            ty = 1.0 / ((1.0 + exp(k1 - kA)) * (1.0 + exp(k2 - k2c)))
            s1 = _clip(fabs(g) * fabs(xi - u1))
            s3 = _clip(3.0 * fabs(beta) * fabs(xi - u2) * fabs(xstar - u2))
            h1 = hnorm * exp(-ptail * l1)
            h2 = hnorm * exp(-ptail * l2)
            q = (mix[0] * h1 * h2
                 + mix[1] * h1 * s1 * _heavy_pdf(s1 * (u2 - u1), hw)
                 + mix[2] * h1 * s1 * _heavy_pdf(s1 * (u2 - xi), hw)
                 + mix[3] * h2 * s3 * _heavy_pdf(s3 * (u1 - xstar), hw))
            o[i] = ynorm * ty * exp(logf - kA) / q
    return out
