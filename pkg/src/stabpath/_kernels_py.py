"""Pure-Python numerical kernels.

This module mirrors the compiled ``_kernels`` extension one function at a
time.  It is selected automatically when the extension is not built, or
when the environment variable ``STABPATH_PURE_PYTHON`` is set to ``1``.

Two kernels live here:

* :func:`bessel01` evaluates I0, I1, K0, K1 and the combinations
  ``W0 = K0 + i*pi*I0`` and ``W1 = K1 - i*pi*I1`` on an array of points.
* :func:`integrate_linear` integrates the matrix ODE ``Y' = A(t) Y`` with
  ``A(t) = sum_k C_k t**p_k`` using an embedded Dormand-Prince 5(4) pair.
"""

import cmath
import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_RADIUS = 2.0
ASYMPTOTIC_RADIUS = 18.0

REGIME_SERIES = 0
REGIME_QUADRATURE = 1
REGIME_ASYMPTOTIC = 2

THETA_PANELS = 48
CONTOUR_HALF_WIDTH = 4.5
MAX_ASYMPTOTIC_TERMS = 60
EPS = 2.220446049250313e-16

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3

IPI = 1j * math.pi


def cut_plane_log(z):
    """Logarithm with arguments in (-pi/2, 3pi/2]."""
    arg = cmath.phase(z)
    if arg <= -0.5 * math.pi:
        arg += 2.0 * math.pi
    return complex(math.log(abs(z)), arg)


def _series(z):
    """Power series for |z| <= SERIES_RADIUS on the cut plane."""
    h = 0.5 * z
    q = h * h
    log_h = cut_plane_log(h) + EULER_GAMMA

    term0 = 1.0 + 0j   # q^m / (m!)^2
    term1 = 1.0 + 0j   # q^m / (m! (m+1)!)
    s_i0 = term0
    s_i1 = term1
    s_k0 = 0j          # sum H_m q^m / (m!)^2
    s_dk = 0j          # sum H_m m q^m / (m!)^2, divided by h later
    harmonic = 0.0
    mag = 1.0
    for m in range(1, 40):
        term0 = term0 * q / (m * m)
        term1 = term1 * q / (m * (m + 1))
        harmonic += 1.0 / m
        s_i0 += term0
        s_i1 += term1
        s_k0 += harmonic * term0
        s_dk += harmonic * m * term0
        mag += abs(term0) * (1.0 + harmonic * (1.0 + m))
        if abs(term0) * (1.0 + harmonic * m) < 1e-18 * max(abs(s_i0), 1e-300):
            break

    i0 = s_i0
    i1 = h * s_i1
    k0 = -log_h * i0 + s_k0
    k1 = i0 / z + log_h * i1 - s_dk / h
    scale = abs(log_h) + 2.0 + 1.0 / abs(z)
    err = EPS * mag * scale / max(abs(k0), abs(i0), 1e-300)
    return i0, i1, k0, k1, err


def _theta_quadrature(z, scaled):
    """I0, I1 by the periodic trapezoid rule on [0, pi]."""
    shift = z.real if scaled else 0.0
    n = THETA_PANELS
    s0 = 0j
    s1 = 0j
    mag = 0.0
    for j in range(n + 1):
        theta = math.pi * j / n
        c = math.cos(theta)
        f = cmath.exp(z * c - shift)
        w = 0.5 if j == 0 or j == n else 1.0
        s0 += w * f
        s1 += w * f * c
        mag += w * abs(f)
    return s0 / n, s1 / n, EPS * 10.0 * mag / n


def _contour_quadrature(z, scaled):
    """K0, K1 by the trapezoid rule on a steepest-descent-like contour.

    Valid for Re z >= 0.  The contour t = s - i*phi*tanh(s) with
    phi = arg z turns the integrand of K_n = int_0^inf exp(-z cosh t)
    cosh(n t) dt into a rapidly decaying, non-oscillating function.
    """
    r = abs(z)
    phi = cmath.phase(z)
    step = min(0.08, 0.25 / math.sqrt(r))
    count = int(math.ceil(CONTOUR_HALF_WIDTH / step))
    s0 = 0j
    s1 = 0j
    mag = 0.0
    for j in range(count + 1):
        s = j * step
        th = math.tanh(s)
        t = complex(s, -phi * th)
        dt = complex(1.0, -phi * (1.0 - th * th))
        ch = cmath.cosh(t)
        f = cmath.exp(-z * (ch - 1.0)) * dt
        w = 0.5 if j == 0 else 1.0
        s0 += w * f
        s1 += w * f * ch
        mag += w * abs(f) * (1.0 + abs(ch))
    k0 = s0 * step
    k1 = s1 * step
    if not scaled:
        ez = cmath.exp(-z)
        k0 *= ez
        k1 *= ez
    err = EPS * 10.0 * mag * step / max(abs(s0 * step), 1e-300)
    return k0, k1, err


def _asymptotic(z, scaled):
    """Large-argument expansions, Re z >= 0 and Im z >= 0."""
    inv = 1.0 / z
    # a_k(0) and a_k(1) by recurrence
    ak0 = 1.0
    ak1 = 1.0
    plus0 = 1.0 + 0j   # sum (-1)^k a_k(0) / z^k
    minus0 = 1.0 + 0j  # sum a_k(0) / z^k
    plus1 = 1.0 + 0j
    minus1 = 1.0 + 0j
    power = 1.0 + 0j
    last = 1.0
    tail = 0.0
    for k in range(1, MAX_ASYMPTOTIC_TERMS):
        odd = (2 * k - 1) ** 2
        ak0 *= -odd / (8.0 * k)
        ak1 *= (4.0 - odd) / (8.0 * k)
        power *= inv
        t0 = ak0 * power
        t1 = ak1 * power
        size = max(abs(t0), abs(t1))
        if size > last:
            break
        sign = -1.0 if k % 2 else 1.0
        plus0 += sign * t0
        minus0 += t0
        plus1 += sign * t1
        minus1 += t1
        last = size
        tail = size
        if size < 1e-17:
            break
    root = cmath.sqrt(2.0 * math.pi * z)
    if scaled:
        grow = cmath.exp(complex(0.0, z.imag)) / root
        decay = cmath.exp(complex(-2.0 * z.real, -z.imag)) / root
        kfac = math.pi / root
    else:
        grow = cmath.exp(z) / root
        decay = cmath.exp(-z) / root
        kfac = math.pi * decay
    i0 = grow * plus0 + 1j * decay * minus0
    i1 = grow * plus1 - 1j * decay * minus1
    if scaled:
        k0 = kfac * minus0
        k1 = kfac * minus1
    else:
        k0 = kfac * minus0
        k1 = kfac * minus1
    err = tail + math.exp(-2.0 * abs(z)) + 4.0 * EPS
    return i0, i1, k0, k1, err


def _right_half(z, scaled):
    """Evaluate on Re z >= 0 with |z| > SERIES_RADIUS."""
    r = abs(z)
    if r <= ASYMPTOTIC_RADIUS:
        i0, i1, ei = _theta_quadrature(z, scaled)
        k0, k1, ek = _contour_quadrature(z, scaled)
        return i0, i1, k0, k1, max(ei, ek), REGIME_QUADRATURE
    if z.imag < 0.0:
        i0, i1, k0, k1, err = _asymptotic(z.conjugate(), scaled)
        return (i0.conjugate(), i1.conjugate(), k0.conjugate(),
                k1.conjugate(), err, REGIME_ASYMPTOTIC)
    i0, i1, k0, k1, err = _asymptotic(z, scaled)
    return i0, i1, k0, k1, err, REGIME_ASYMPTOTIC


def bessel_point(z, scaled):
    """Evaluate all six functions at one point.

    Returns ``(i0, i1, k0, k1, w0, w1, regime, err)``.  With ``scaled``
    the outputs are multiplied by ``exp(-|Re z|)`` (I), ``exp(z)`` (K)
    and ``exp(-z)`` (W).
    """
    z = complex(z)
    if z == 0:
        nan = complex(math.nan, math.nan)
        return 1 + 0j, 0j, nan, nan, nan, nan, REGIME_SERIES, 0.0
    r = abs(z)
    if r <= SERIES_RADIUS:
        i0, i1, k0, k1, err = _series(z)
        w0 = k0 + IPI * i0
        w1 = k1 - IPI * i1
        if scaled:
            si = math.exp(-abs(z.real))
            sk = cmath.exp(z)
            sw = cmath.exp(-z)
            i0, i1, k0, k1, w0, w1 = i0 * si, i1 * si, k0 * sk, k1 * sk, w0 * sw, w1 * sw
        return i0, i1, k0, k1, w0, w1, REGIME_SERIES, err

    if z.real >= 0.0:
        i0, i1, k0, k1, err, regime = _right_half(z, scaled)
        if scaled:
            # K e^z + i pi I e^{-Re z} rescaled to W e^{-z}
            w0 = k0 * cmath.exp(-2.0 * z) + IPI * i0 * cmath.exp(complex(0.0, -z.imag))
            w1 = k1 * cmath.exp(-2.0 * z) - IPI * i1 * cmath.exp(complex(0.0, -z.imag))
        else:
            w0 = k0 + IPI * i0
            w1 = k1 - IPI * i1
        return i0, i1, k0, k1, w0, w1, regime, err

    # left half plane: reflect and continue across the cut
    zz = -z
    i0, i1, k0, k1, err, regime = _right_half(zz, scaled)
    if scaled:
        rot = cmath.exp(complex(0.0, z.imag))
        e2 = cmath.exp(2.0 * z)
        k0_out = k0 * e2 - IPI * i0 * rot
        k1_out = -k1 * e2 - IPI * i1 * rot
    else:
        k0_out = k0 - IPI * i0
        k1_out = -k1 - IPI * i1
    return i0, -i1, k0_out, k1_out, k0, -k1, regime, err


def bessel01(z, scaled=False):
    """Vectorised wrapper around :func:`bessel_point`.

    Parameters
    ----------
    z : array_like of complex
    scaled : bool

    Returns
    -------
    tuple of ndarray
        ``(i0, i1, k0, k1, w0, w1, regime, err)``.
    """
    z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    n = z.shape[0]
    out = [np.empty(n, dtype=np.complex128) for _ in range(6)]
    regime = np.empty(n, dtype=np.int8)
    err = np.empty(n, dtype=np.float64)
    for j in range(n):
        vals = bessel_point(z[j], scaled)
        for q in range(6):
            out[q][j] = vals[q]
        regime[j] = vals[6]
        err[j] = vals[7]
    return (*out, regime, err)


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _rhs(coeffs, powers, shift, t, y):
    a = np.zeros(coeffs.shape[1:], dtype=np.complex128)
    for k in range(coeffs.shape[0]):
        a += coeffs[k] * t ** powers[k]
    out = a @ y
    if shift != 0.0:
        out -= shift * y
    return out


def integrate_linear(coeffs, powers, y0, t_out, rtol=1e-10, shift=0.0,
                     norm_limit=1e150, max_steps=2_000_000):
    """Integrate ``Y' = (sum_k C_k t**p_k) Y`` onto the output grid.

    Parameters
    ----------
    coeffs : ndarray, shape (K, n, n), complex
    powers : ndarray, shape (K,), float
    y0 : ndarray, shape (n, m), complex
        Value at ``t_out[0]``.
    t_out : ndarray, shape (N,)
        Strictly increasing output times.
    rtol : float
        Relative tolerance of the embedded error estimate.
    shift : float
        Exponential gauge rate.  Once ``max|Y|`` exceeds ``norm_limit`` the
        equation ``Y' = (A - shift) Y`` is integrated instead and the
        removed factor is accumulated in the log-gauge.
    norm_limit : float
        Renormalisation threshold.

    Returns
    -------
    ys : ndarray, shape (N, n, m)
    log_gauge : ndarray, shape (N,)
        True solution is ``exp(log_gauge[j]) * ys[j]``.
    steps : int
    status : int
        0 ok, 1 step underflow, 2 step limit, 3 non-finite state.
    t_fail : float
        Last successfully reached time when ``status != 0``.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    powers = np.ascontiguousarray(powers, dtype=np.float64)
    y = np.array(y0, dtype=np.complex128, copy=True)
    t_out = np.ascontiguousarray(t_out, dtype=np.float64)
    npts = t_out.shape[0]
    ys = np.zeros((npts,) + y.shape, dtype=np.complex128)
    log_gauge = np.zeros(npts, dtype=np.float64)
    ys[0] = y
    t = float(t_out[0])
    offset = 0.0
    active = 0.0
    steps = 0
    if npts == 1:
        return ys, log_gauge, 0, STATUS_OK, t

    h = 0.01 * min(t_out[1] - t, max(t, 1e-3))
    k1 = _rhs(coeffs, powers, active, t, y)
    for j in range(1, npts):
        target = float(t_out[j])
        while t < target:
            if steps >= max_steps:
                return ys, log_gauge, steps, STATUS_MAX_STEPS, t
            clamped = target - t <= h
            hh = target - t if clamped else h
            if hh <= 1e-14 * max(abs(t), 1.0):
                return ys, log_gauge, steps, STATUS_UNDERFLOW, t
            ks = [k1]
            for s in range(1, 7):
                acc = y.copy()
                for q, a in enumerate(_A[s]):
                    if a != 0.0:
                        acc += (hh * a) * ks[q]
                if s == 6:
                    y_new = acc
                ks.append(_rhs(coeffs, powers, active, t + _C[s] * hh, acc))
            err_vec = np.zeros_like(y)
            for q in range(7):
                if _E[q] != 0.0:
                    err_vec += (hh * _E[q]) * ks[q]
            ymax = max(np.max(np.abs(y)), np.max(np.abs(y_new)))
            floor = 1e-3 * ymax
            sc = rtol * np.maximum(np.maximum(np.abs(y), np.abs(y_new)), floor) + 1e-300
            err = float(np.max(np.abs(err_vec) / sc))
            steps += 1
            if not math.isfinite(err):
                return ys, log_gauge, steps, STATUS_NONFINITE, t
            if err <= 1.0:
                t = target if clamped else t + hh
                y = y_new
                k1 = ks[6]
                if active != 0.0:
                    offset += active * hh
                big = float(np.max(np.abs(y)))
                if big > norm_limit:
                    if shift > 0.0 and active == 0.0:
                        active = shift
                    y = y / big
                    offset += math.log(big)
                    k1 = _rhs(coeffs, powers, active, t, y)
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h = max(h, hh * fac) if clamped else hh * fac
            else:
                h = hh * max(0.2, 0.9 * err ** -0.2)
        ys[j] = y
        log_gauge[j] = offset
    return ys, log_gauge, steps, STATUS_OK, t
