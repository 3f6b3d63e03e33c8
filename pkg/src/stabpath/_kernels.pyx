# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Same functions, arguments and return values as ``_kernels_py``; see that
module for the documentation of each kernel.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log, fabs, cos, tanh, isfinite, ceil, pow, M_PI

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double complex ccosh(double complex)
    double carg(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double SERIES_RADIUS = 2.0
cdef double ASYMPTOTIC_RADIUS = 18.0
cdef int THETA_PANELS = 48
cdef double CONTOUR_HALF_WIDTH = 4.5
cdef int MAX_ASYMPTOTIC_TERMS = 60
cdef double EPS = 2.220446049250313e-16
cdef double complex IPI = 1j * M_PI

REGIME_SERIES = 0
REGIME_QUADRATURE = 1
REGIME_ASYMPTOTIC = 2


cdef inline double complex mk(double re, double im) noexcept nogil:
    cdef double complex out = 1j * im
    return out + re


cdef inline double complex cut_plane_log(double complex z) noexcept nogil:
    cdef double arg = carg(z)
    if arg <= -0.5 * M_PI:
        arg += 2.0 * M_PI
    return mk(log(cabs(z)), arg)


cdef struct Six:
    double complex i0
    double complex i1
    double complex k0
    double complex k1
    double complex w0
    double complex w1
    int regime
    double err


cdef void _series(double complex z, Six* out) noexcept nogil:
    cdef double complex h = 0.5 * z
    cdef double complex q = h * h
    cdef double complex log_h = cut_plane_log(h) + EULER_GAMMA
    cdef double complex term0 = 1.0, term1 = 1.0
    cdef double complex s_i0 = 1.0, s_i1 = 1.0, s_k0 = 0.0, s_dk = 0.0
    cdef double harmonic = 0.0, mag = 1.0, scale
    cdef int m
    for m in range(1, 40):
        term0 = term0 * q / (m * m)
        term1 = term1 * q / (m * (m + 1))
        harmonic += 1.0 / m
        s_i0 = s_i0 + term0
        s_i1 = s_i1 + term1
        s_k0 = s_k0 + harmonic * term0
        s_dk = s_dk + harmonic * m * term0
        mag += cabs(term0) * (1.0 + harmonic * (1.0 + m))
        if cabs(term0) * (1.0 + harmonic * m) < 1e-18 * max(cabs(s_i0), 1e-300):
            break
    out.i0 = s_i0
    out.i1 = h * s_i1
    out.k0 = -log_h * out.i0 + s_k0
    out.k1 = out.i0 / z + log_h * out.i1 - s_dk / h
    scale = cabs(log_h) + 2.0 + 1.0 / cabs(z)
    out.err = EPS * mag * scale / max(max(cabs(out.k0), cabs(out.i0)), 1e-300)


cdef double _theta_quadrature(double complex z, bint scaled, Six* out) noexcept nogil:
    cdef double shift = creal(z) if scaled else 0.0
    cdef int n = THETA_PANELS, j
    cdef double complex s0 = 0.0, s1 = 0.0, f
    cdef double mag = 0.0, c, w
    for j in range(n + 1):
        c = cos(M_PI * j / n)
        f = cexp(z * c - shift)
        w = 0.5 if (j == 0 or j == n) else 1.0
        s0 = s0 + w * f
        s1 = s1 + w * f * c
        mag += w * cabs(f)
    out.i0 = s0 / n
    out.i1 = s1 / n
    return EPS * 10.0 * mag / n


cdef double _contour_quadrature(double complex z, bint scaled, Six* out) noexcept nogil:
    cdef double r = cabs(z)
    cdef double phi = carg(z)
    cdef double step = min(0.08, 0.25 / sqrt(r))
    cdef int count = <int>ceil(CONTOUR_HALF_WIDTH / step), j
    cdef double complex s0 = 0.0, s1 = 0.0, t, dt, ch, f, ez
    cdef double mag = 0.0, s, th, w
    for j in range(count + 1):
        s = j * step
        th = tanh(s)
        t = mk(s, -phi * th)
        dt = mk(1.0, -phi * (1.0 - th * th))
        ch = ccosh(t)
        f = cexp(-z * (ch - 1.0)) * dt
        w = 0.5 if j == 0 else 1.0
        s0 = s0 + w * f
        s1 = s1 + w * f * ch
        mag += w * cabs(f) * (1.0 + cabs(ch))
    out.k0 = s0 * step
    out.k1 = s1 * step
    if not scaled:
        ez = cexp(-z)
        out.k0 = out.k0 * ez
        out.k1 = out.k1 * ez
    return EPS * 10.0 * mag * step / max(cabs(s0 * step), 1e-300)


cdef void _asymptotic(double complex z, bint scaled, Six* out) noexcept nogil:
    cdef double complex inv = 1.0 / z
    cdef double ak0 = 1.0, ak1 = 1.0, odd, size, last = 1.0, tail = 0.0, sign
    cdef double complex plus0 = 1.0, minus0 = 1.0, plus1 = 1.0, minus1 = 1.0
    cdef double complex power = 1.0, t0, t1, root, grow, decay, kfac
    cdef int k
    for k in range(1, MAX_ASYMPTOTIC_TERMS):
        odd = (2.0 * k - 1.0) * (2.0 * k - 1.0)
        ak0 *= -odd / (8.0 * k)
        ak1 *= (4.0 - odd) / (8.0 * k)
        power = power * inv
        t0 = ak0 * power
        t1 = ak1 * power
        size = max(cabs(t0), cabs(t1))
        if size > last:
            break
        sign = -1.0 if (k % 2) else 1.0
        plus0 = plus0 + sign * t0
        minus0 = minus0 + t0
        plus1 = plus1 + sign * t1
        minus1 = minus1 + t1
        last = size
        tail = size
        if size < 1e-17:
            break
    root = csqrt(2.0 * M_PI * z)
    if scaled:
        grow = cexp(mk(0.0, cimag(z))) / root
        decay = cexp(mk(-2.0 * creal(z), -cimag(z))) / root
        kfac = M_PI / root
    else:
        grow = cexp(z) / root
        decay = cexp(-z) / root
        kfac = M_PI * decay
    out.i0 = grow * plus0 + 1j * decay * minus0
    out.i1 = grow * plus1 - 1j * decay * minus1
    out.k0 = kfac * minus0
    out.k1 = kfac * minus1
    out.err = tail + exp(-2.0 * cabs(z)) + 4.0 * EPS


cdef void _right_half(double complex z, bint scaled, Six* out) noexcept nogil:
    cdef double ei, ek
    if cabs(z) <= ASYMPTOTIC_RADIUS:
        ei = _theta_quadrature(z, scaled, out)
        ek = _contour_quadrature(z, scaled, out)
        out.err = max(ei, ek)
        out.regime = 1
        return
    out.regime = 2
    if cimag(z) < 0.0:
        _asymptotic(conj(z), scaled, out)
        out.i0 = conj(out.i0)
        out.i1 = conj(out.i1)
        out.k0 = conj(out.k0)
        out.k1 = conj(out.k1)
    else:
        _asymptotic(z, scaled, out)


cdef void bessel_point(double complex z, bint scaled, Six* out) noexcept nogil:
    cdef double nan = 0.0 / 0.0
    cdef double complex zz, rot, e2, si, sk, sw, k0, k1
    if creal(z) == 0.0 and cimag(z) == 0.0:
        out.i0 = 1.0
        out.i1 = 0.0
        out.k0 = mk(nan, nan)
        out.k1 = out.k0
        out.w0 = out.k0
        out.w1 = out.k0
        out.regime = 0
        out.err = 0.0
        return
    if cabs(z) <= SERIES_RADIUS:
        _series(z, out)
        out.regime = 0
        out.w0 = out.k0 + IPI * out.i0
        out.w1 = out.k1 - IPI * out.i1
        if scaled:
            si = exp(-fabs(creal(z)))
            sk = cexp(z)
            sw = cexp(-z)
            out.i0 = out.i0 * si
            out.i1 = out.i1 * si
            out.k0 = out.k0 * sk
            out.k1 = out.k1 * sk
            out.w0 = out.w0 * sw
            out.w1 = out.w1 * sw
        return
    if creal(z) >= 0.0:
        _right_half(z, scaled, out)
        if scaled:
            e2 = cexp(-2.0 * z)
            rot = cexp(mk(0.0, -cimag(z)))
            out.w0 = out.k0 * e2 + IPI * out.i0 * rot
            out.w1 = out.k1 * e2 - IPI * out.i1 * rot
        else:
            out.w0 = out.k0 + IPI * out.i0
            out.w1 = out.k1 - IPI * out.i1
        return
    zz = -z
    _right_half(zz, scaled, out)
    k0 = out.k0
    k1 = out.k1
    if scaled:
        rot = cexp(mk(0.0, cimag(z)))
        e2 = cexp(2.0 * z)
        out.k0 = k0 * e2 - IPI * out.i0 * rot
        out.k1 = -k1 * e2 - IPI * out.i1 * rot
    else:
        out.k0 = k0 - IPI * out.i0
        out.k1 = -k1 - IPI * out.i1
    out.w0 = k0
    out.w1 = -k1
    out.i1 = -out.i1


def bessel01(z, bint scaled=False):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zs = np.ascontiguousarray(
        z, dtype=np.complex128).ravel()
    cdef Py_ssize_t n = zs.shape[0], j
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] i0 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] i1 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] k0 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] k1 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w0 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] w1 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] regime = np.empty(n, dtype=np.int8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] err = np.empty(n, dtype=np.float64)
    cdef Six out
    with nogil:
        for j in range(n):
            bessel_point(zs[j], scaled, &out)
            i0[j] = out.i0
            i1[j] = out.i1
            k0[j] = out.k0
            k1[j] = out.k1
            w0[j] = out.w0
            w1[j] = out.w1
            regime[j] = out.regime
            err[j] = out.err
    return i0, i1, k0, k1, w0, w1, regime, err


# Dormand-Prince 5(4) tableau
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784
cdef double A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef void _rhs(double complex[:, :, ::1] coeffs, double[::1] powers, double shift,
               double t, double complex[:, ::1] y, double complex[:, ::1] a,
               double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], m = y.shape[1], nk = coeffs.shape[0]
    cdef Py_ssize_t i, j, k, q
    cdef double tp
    cdef double complex acc
    for i in range(n):
        for j in range(n):
            a[i, j] = 0.0
    for k in range(nk):
        tp = pow(t, powers[k])
        for i in range(n):
            for j in range(n):
                a[i, j] = a[i, j] + coeffs[k, i, j] * tp
    for i in range(n):
        for q in range(m):
            acc = 0.0
            for j in range(n):
                acc = acc + a[i, j] * y[j, q]
            out[i, q] = acc - shift * y[i, q]


cdef void _combine(double complex[:, ::1] y, double h, double complex[:, :, ::1] ks,
                   double* w, int count, double complex[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n = y.shape[0], m = y.shape[1], i, q
    cdef int s
    cdef double complex acc
    for i in range(n):
        for q in range(m):
            acc = y[i, q]
            for s in range(count):
                if w[s] != 0.0:
                    acc = acc + (h * w[s]) * ks[s, i, q]
            out[i, q] = acc


def integrate_linear(coeffs, powers, y0, t_out, double rtol=1e-10, double shift=0.0,
                     double norm_limit=1e150, long max_steps=2_000_000):
    cdef double complex[:, :, ::1] cf = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef double[::1] pw = np.ascontiguousarray(powers, dtype=np.float64)
    cdef double[::1] ts = np.ascontiguousarray(t_out, dtype=np.float64)
    y_arr = np.array(y0, dtype=np.complex128, order="C", copy=True)
    cdef double complex[:, ::1] y = y_arr
    cdef Py_ssize_t n = y.shape[0], m = y.shape[1], npts = ts.shape[0], i, q, j
    ys_arr = np.zeros((npts, n, m), dtype=np.complex128)
    lg_arr = np.zeros(npts, dtype=np.float64)
    cdef double complex[:, :, ::1] ys = ys_arr
    cdef double[::1] log_gauge = lg_arr
    cdef double complex[:, :, ::1] ks = np.zeros((7, n, m), dtype=np.complex128)
    cdef double complex[:, ::1] stage = np.zeros((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] y_new = np.zeros((n, m), dtype=np.complex128)
    cdef double complex[:, ::1] a = np.zeros((n, n), dtype=np.complex128)
    cdef double w[7]
    cdef double t = ts[0], target, h, hh, err, e, sc, ymax, floor, big, fac
    cdef double offset = 0.0, active = 0.0
    cdef long steps = 0
    cdef bint clamped
    cdef double complex ev

    ys[0, :, :] = y
    if npts == 1:
        return ys_arr, lg_arr, 0, 0, t

    h = 0.01 * min(ts[1] - t, max(t, 1e-3))
    with nogil:
        _rhs(cf, pw, active, t, y, a, ks[0])
        for j in range(1, npts):
            target = ts[j]
            while t < target:
                if steps >= max_steps:
                    with gil:
                        return ys_arr, lg_arr, steps, 2, t
                clamped = target - t <= h
                hh = target - t if clamped else h
                if hh <= 1e-14 * max(fabs(t), 1.0):
                    with gil:
                        return ys_arr, lg_arr, steps, 1, t
                w[0] = A21
                _combine(y, hh, ks, w, 1, stage)
                _rhs(cf, pw, active, t + C2 * hh, stage, a, ks[1])
                w[0] = A31; w[1] = A32
                _combine(y, hh, ks, w, 2, stage)
                _rhs(cf, pw, active, t + C3 * hh, stage, a, ks[2])
                w[0] = A41; w[1] = A42; w[2] = A43
                _combine(y, hh, ks, w, 3, stage)
                _rhs(cf, pw, active, t + C4 * hh, stage, a, ks[3])
                w[0] = A51; w[1] = A52; w[2] = A53; w[3] = A54
                _combine(y, hh, ks, w, 4, stage)
                _rhs(cf, pw, active, t + C5 * hh, stage, a, ks[4])
                w[0] = A61; w[1] = A62; w[2] = A63; w[3] = A64; w[4] = A65
                _combine(y, hh, ks, w, 5, stage)
                _rhs(cf, pw, active, t + hh, stage, a, ks[5])
                w[0] = A71; w[1] = 0.0; w[2] = A73; w[3] = A74; w[4] = A75; w[5] = A76
                _combine(y, hh, ks, w, 6, y_new)
                _rhs(cf, pw, active, t + hh, y_new, a, ks[6])

                ymax = 0.0
                for i in range(n):
                    for q in range(m):
                        ymax = max(ymax, max(cabs(y[i, q]), cabs(y_new[i, q])))
                floor = 1e-3 * ymax
                err = 0.0
                for i in range(n):
                    for q in range(m):
                        ev = hh * (E1 * ks[0, i, q] + E3 * ks[2, i, q] + E4 * ks[3, i, q]
                                   + E5 * ks[4, i, q] + E6 * ks[5, i, q] + E7 * ks[6, i, q])
                        sc = rtol * max(max(cabs(y[i, q]), cabs(y_new[i, q])), floor) + 1e-300
                        e = cabs(ev) / sc
                        if e > err or not isfinite(e):
                            err = e
                steps += 1
                if not isfinite(err):
                    with gil:
                        return ys_arr, lg_arr, steps, 3, t
                if err <= 1.0:
                    t = target if clamped else t + hh
                    y[:, :] = y_new
                    ks[0, :, :] = ks[6]
                    if active != 0.0:
                        offset += active * hh
                    big = 0.0
                    for i in range(n):
                        for q in range(m):
                            big = max(big, cabs(y[i, q]))
                    if big > norm_limit:
                        if shift > 0.0 and active == 0.0:
                            active = shift
                        for i in range(n):
                            for q in range(m):
                                y[i, q] = y[i, q] / big
                        offset += log(big)
                        _rhs(cf, pw, active, t, y, a, ks[0])
                    if err == 0.0:
                        fac = 5.0
                    else:
                        fac = min(5.0, max(0.2, 0.9 * pow(err, -0.2)))
                    if clamped:
                        h = max(h, hh * fac)
                    else:
                        h = hh * fac
                else:
                    h = hh * max(0.2, 0.9 * pow(err, -0.2))
            ys[j, :, :] = y
            log_gauge[j] = offset
    return ys_arr, lg_arr, steps, 0, t
