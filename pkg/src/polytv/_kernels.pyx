# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Three kernels live here, each mirrored line-for-line by ``_fallback.py``:

jacobi_eigh
    cyclic Jacobi rotations on a dense symmetric matrix.
standard_normals
    SplitMix64 stream fed through the polar Box-Muller transform.
filon_legendre_sum
    panel sums of ``w * exp(-i*om*c) * sum_n D[n] * j_n(om*w)`` with a
    per-panel frequency ``om = x - shift``, the oscillatory quadrature used
    for characteristic-function inversion.
"""

from libc.math cimport sqrt, log, sin, cos, fabs
from libc.stdint cimport uint64_t

import numpy as np

cdef enum:
    MAX_ORDER = 64
    MILLER_EXTRA = 40

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


def jacobi_eigh(double[:, ::1] a, double tol, int max_sweeps):
    """Diagonalize ``a`` in place; return ``(eigenvalues, vectors, sweeps)``."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef double off, apq, theta, t, c, s, akp, akq, app, aqq, vkp, vkq
    cdef int sweep = 0
    v_arr = np.eye(n)
    cdef double[:, ::1] v = v_arr
    while True:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * a[p, q] * a[p, q]
        if sqrt(off) <= tol or sweep >= max_sweeps:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w_arr = np.empty(n)
    cdef double[::1] w = w_arr
    for k in range(n):
        w[k] = a[k, k]
    return w_arr, v_arr, sweep


cdef inline uint64_t _splitmix(uint64_t state) nogil:
    cdef uint64_t z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def standard_normals(uint64_t seed, Py_ssize_t count):
    """``count`` N(0, 1) draws from SplitMix64(seed) + polar Box-Muller."""
    out_arr = np.empty(count)
    cdef double[::1] out = out_arr
    cdef uint64_t state = seed
    cdef Py_ssize_t filled = 0
    cdef double v1, v2, s, factor
    with nogil:
        while filled < count:
            state = state + GOLDEN
            v1 = 2.0 * (<double>(_splitmix(state) >> 11) * TWO_M53) - 1.0
            state = state + GOLDEN
            v2 = 2.0 * (<double>(_splitmix(state) >> 11) * TWO_M53) - 1.0
            s = v1 * v1 + v2 * v2
            if s >= 1.0 or s == 0.0:
                continue
            factor = sqrt(-2.0 * log(s) / s)
            out[filled] = v1 * factor
            filled += 1
            if filled < count:
                out[filled] = v2 * factor
                filled += 1
    return out_arr


cdef void _sph_jn(double x, int order, double* out) nogil:
    # j_0 .. j_{order-1} at x >= 0
    cdef int n, k
    cdef double y, term, sx, cx, scale
    cdef double tmp[MAX_ORDER + MILLER_EXTRA + 2]
    cdef int top
    if x < 1e-4:
        y = 0.5 * x * x
        term = 1.0
        for n in range(order):
            out[n] = term * (1.0 - y / (2 * n + 3) + y * y / (2.0 * (2 * n + 3) * (2 * n + 5)))
            term = term * x / (2 * n + 3)
        return
    sx = sin(x)
    cx = cos(x)
    if x >= order:
        out[0] = sx / x
        if order > 1:
            out[1] = sx / (x * x) - cx / x
        for n in range(1, order - 1):
            out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
        return
    top = order + MILLER_EXTRA
    tmp[top + 1] = 0.0
    tmp[top] = 1e-30
    for n in range(top, 0, -1):
        tmp[n - 1] = (2 * n + 1) / x * tmp[n] - tmp[n + 1]
        if fabs(tmp[n - 1]) > 1e200:
            for k in range(n - 1, top + 2):
                tmp[k] = tmp[k] * 1e-200
    if fabs(sx / x) >= fabs(sx / (x * x) - cx / x):
        scale = (sx / x) / tmp[0]
    else:
        scale = (sx / (x * x) - cx / x) / tmp[1]
    for n in range(order):
        out[n] = tmp[n] * scale


def filon_legendre_sum(double[::1] x, double[::1] shifts, double[::1] centers,
                       double[::1] halfwidths, double[:, ::1] d_re, double[:, ::1] d_im):
    """Return ``(re, im)`` of the panel sum at every ``x``."""
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t npan = centers.shape[0]
    cdef int order = d_re.shape[1]
    if order > MAX_ORDER:
        raise ValueError("Legendre order exceeds kernel limit")
    re_arr = np.zeros(m)
    im_arr = np.zeros(m)
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    cdef double jn[MAX_ORDER]
    cdef Py_ssize_t i, p
    cdef int n
    cdef double xi, om, kappa, sgn, sr, si, ph, cr, ci, acc_r, acc_i, w
    with nogil:
        for i in range(m):
            xi = x[i]
            acc_r = 0.0
            acc_i = 0.0
            for p in range(npan):
                om = xi - shifts[p]
                w = halfwidths[p]
                kappa = om * w
                sgn = 1.0
                if kappa < 0:
                    kappa = -kappa
                    sgn = -1.0
                _sph_jn(kappa, order, jn)
                sr = 0.0
                si = 0.0
                for n in range(order):
                    if sgn < 0 and (n & 1):
                        sr = sr - d_re[p, n] * jn[n]
                        si = si - d_im[p, n] * jn[n]
                    else:
                        sr = sr + d_re[p, n] * jn[n]
                        si = si + d_im[p, n] * jn[n]
                ph = om * centers[p]
                cr = cos(ph)
                ci = -sin(ph)
                acc_r = acc_r + w * (cr * sr - ci * si)
                acc_i = acc_i + w * (cr * si + ci * sr)
            re[i] = acc_r
            im[i] = acc_i
    return re_arr, im_arr
