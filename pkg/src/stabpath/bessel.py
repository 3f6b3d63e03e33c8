"""Modified Bessel functions of order 0 and 1 on the cut plane.

K0 and K1 use the logarithm with arguments in (-pi/2, 3pi/2], i.e. the cut
runs down the negative imaginary axis.  On the closed right half plane and
the open upper half plane this agrees with the usual principal branch; in
the open third quadrant it is the analytic continuation across the
negative real axis, related to the right half plane by

    K0(-x) = K0(x) - i*pi*I0(x),   Re x > 0.

Three evaluation regimes are used: the power series for ``|z| <= 2``,
trapezoid quadrature of integral representations for ``2 < |z| <= 18`` and
the optimally truncated large-argument expansion beyond.  Points in the
left half plane outside the series disc are reduced to the right half
plane with the identity above.

The combinations ``W0 = K0 + i*pi*I0`` and ``W1 = K1 - i*pi*I1`` are
evaluated without cancellation: on the left half plane ``W0(z) = K0(-z)``.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from ._backend import kernels
from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
REGIMES = ("series", "quadrature", "asymptotic")
SERIES_RADIUS = 2.0
ASYMPTOTIC_RADIUS = 18.0


@dataclass(frozen=True)
class BesselValue:
    """A function value with its evaluation regime and error estimate.

    ``est_error`` is relative to the natural magnitude of the function at
    that point (``|K|``, or ``exp(|Re z|)/sqrt(1+|z|)`` scale for ``I`` near
    its zeros).
    """

    value: complex
    regime: str
    est_error: float


@dataclass(frozen=True)
class BesselTable:
    """Vectorised values of I0, I1, K0, K1, W0, W1.

    When ``scaled`` is true the arrays hold ``I*exp(-|Re z|)``,
    ``K*exp(Re z)`` and ``W*exp(-Re z)``; :meth:`log_scale` returns the
    real logarithm of the removed factor, so ``value = scaled * exp(log_scale)``.
    """

    z: np.ndarray
    i0: np.ndarray
    i1: np.ndarray
    k0: np.ndarray
    k1: np.ndarray
    w0: np.ndarray
    w1: np.ndarray
    regime: np.ndarray
    est_error: np.ndarray
    scaled: bool

    def log_scale(self, family):
        """Real log of the scale factor removed from ``family``.

        Parameters
        ----------
        family : {"i", "k", "w"}
        """
        if not self.scaled:
            return np.zeros(self.z.shape)
        if family == "i":
            return np.abs(self.z.real)
        if family == "k":
            return -self.z.real
        if family == "w":
            return self.z.real.copy()
        raise ValueError(f"unknown family {family!r}")


def on_cut(z):
    """True where K0 is undefined: the origin and the negative imaginary axis."""
    z = np.asarray(z, dtype=np.complex128)
    return (z == 0) | ((z.real == 0) & (z.imag < 0))


def cut_plane_arg(z):
    """Argument in (-pi/2, 3pi/2]."""
    a = cmath.phase(z)
    return a + 2.0 * math.pi if a <= -0.5 * math.pi else a


def evaluate(z, scaled=False, check_domain=True):
    """Evaluate all six functions on an array.

    Parameters
    ----------
    z : array_like of complex
    scaled : bool
        Return exponentially scaled values (see :class:`BesselTable`).
    check_domain : bool
        Raise on points where K is undefined instead of returning NaN.

    Returns
    -------
    BesselTable
    """
    arr = np.asarray(z, dtype=np.complex128)
    flat = arr.ravel()
    if check_domain and np.any(on_cut(flat)):
        bad = flat[on_cut(flat)][0]
        raise DomainError(f"K is undefined at {bad!r} (origin or cut i*(-inf, 0])")
    i0, i1, k0, k1, w0, w1, regime, err = kernels.bessel01(flat, bool(scaled))
    if scaled:
        # the kernels remove exp(-z) from K and exp(z) from W; keep only the modulus
        phase = np.exp(1j * flat.imag)
        k0, k1 = k0 / phase, k1 / phase
        w0, w1 = w0 * phase, w1 * phase
    if not check_domain:
        cut = on_cut(flat)
        for arr_ in (k0, k1, w0, w1):
            arr_[cut] = complex(math.nan, math.nan)
    shape = arr.shape
    return BesselTable(
        z=arr,
        i0=i0.reshape(shape), i1=i1.reshape(shape),
        k0=k0.reshape(shape), k1=k1.reshape(shape),
        w0=w0.reshape(shape), w1=w1.reshape(shape),
        regime=regime.reshape(shape), est_error=err.reshape(shape),
        scaled=bool(scaled),
    )


def _scalar(z, field, needs_k):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"argument must be finite, got {z!r}")
    if needs_k and on_cut(z):
        raise DomainError(f"K is undefined at {z!r} (origin or cut i*(-inf, 0])")
    tab = evaluate(np.array([z]), check_domain=False)
    return BesselValue(
        value=complex(getattr(tab, field)[0]),
        regime=REGIMES[int(tab.regime[0])],
        est_error=float(tab.est_error[0]),
    )


def i0(z):
    """I0(z); entire."""
    return _scalar(z, "i0", False)


def i1(z):
    """I1(z) = I0'(z); entire."""
    return _scalar(z, "i1", False)


def k0(z, branch="principal"):
    """K0(z) on the plane cut along the negative imaginary axis.

    Raises
    ------
    DomainError
        At the origin or on the cut.
    """
    if branch != "principal":
        raise DomainError(f"unsupported branch {branch!r}")
    return _scalar(z, "k0", True)


def k1(z):
    """K1(z) = -K0'(z) on the same cut plane as :func:`k0`."""
    return _scalar(z, "k1", True)


def w0(z):
    """K0(z) + i*pi*I0(z) without cancellation."""
    return _scalar(z, "w0", True)


def w1(z):
    """K1(z) - i*pi*I1(z), so that W0' = -W1."""
    return _scalar(z, "w1", True)


def _expansion_terms(u, order):
    """sum_k a_k u^-k and sum_k (-1)^k a_k u^-k for k <= order, plus next term."""
    coeffs = [1.0, -1.0 / 8.0, 9.0 / 128.0, -225.0 / 3072.0]
    plus = 0j
    minus = 0j
    for k in range(order + 1):
        term = coeffs[k] / u ** k
        minus += term
        plus += (-1) ** k * term
    return plus, minus, abs(coeffs[order + 1] / u ** (order + 1))


def _check_sector(u, order):
    u = complex(u)
    if order not in (0, 1, 2):
        raise DomainError(f"order must be 0, 1 or 2, got {order!r}")
    if abs(u) < 10.0:
        raise DomainError(f"expansion needs |u| >= 10, got |u| = {abs(u):.3g}")
    arg = cut_plane_arg(u)
    if not -0.5 * math.pi < arg < 1.5 * math.pi:
        raise DomainError(f"arg u = {arg:.6f} outside (-pi/2, 3pi/2)")
    return u, arg


def _sqrt_cut_plane(w):
    """Square root continuous on the cut plane."""
    return math.sqrt(abs(w)) * cmath.exp(0.5j * cut_plane_arg(w))


def asymptotic_k0(u, order=2):
    """Truncated large-argument expansion of K0.

    ``sqrt(pi/(2u)) exp(-u) (1 - 1/(8u) + 9/(128u^2))`` cut after ``order``.
    """
    u, _ = _check_sector(u, order)
    _, minus, nxt = _expansion_terms(u, order)
    value = math.sqrt(math.pi / 2.0) / _sqrt_cut_plane(u) * cmath.exp(-u) * minus
    return BesselValue(value=value, regime="asymptotic", est_error=nxt)


def asymptotic_i0(u, order=2):
    """Truncated large-argument expansion of I0.

    ``exp(u)/sqrt(2 pi u) S(-u) + i exp(-u)/sqrt(2 pi u) S(u)`` where
    ``S(u) = 1 - 1/(8u) + 9/(128u^2)`` is cut after ``order``.
    """
    u, _ = _check_sector(u, order)
    plus, minus, nxt = _expansion_terms(u, order)
    root = math.sqrt(2.0 * math.pi) * _sqrt_cut_plane(u)
    value = (cmath.exp(u) * plus + 1j * cmath.exp(-u) * minus) / root
    return BesselValue(value=value, regime="asymptotic", est_error=nxt)


def g_positivity(x):
    """``x K0(x) (K0(x) + i pi I0(x))`` on the closed upper half plane.

    The product is formed from exponentially scaled factors, so it stays
    finite for large ``|x|``.

    Raises
    ------
    DomainError
        If ``Im x < 0`` or ``x == 0``.
    """
    x = complex(x)
    if x.imag < 0 or x == 0:
        raise DomainError(f"g is defined for Im x >= 0, x != 0; got {x!r}")
    tab = evaluate(np.array([x]), scaled=True)
    return complex(x * tab.k0[0] * tab.w0[0])


def g_positivity_array(x):
    """Vectorised :func:`g_positivity`."""
    x = np.asarray(x, dtype=np.complex128)
    if np.any(x.imag < 0) or np.any(x == 0):
        raise DomainError("g is defined for Im x >= 0, x != 0")
    tab = evaluate(x, scaled=True)
    return x * tab.k0 * tab.w0


def connection_residual(x):
    """``K0(-x) - (K0(x) - i pi I0(x))`` for ``Re x > 0``."""
    x = np.asarray(x, dtype=np.complex128)
    if np.any(x.real <= 0):
        raise DomainError("connection formula needs Re x > 0")
    right = evaluate(x)
    left = evaluate(-x)
    return left.k0 - (right.k0 - 1j * math.pi * right.i0)


def wronskian_residual(x):
    """``K0 I1 + I0 K1 - 1/x``, i.e. ``K0 I0' - I0 K0' - 1/x``."""
    x = np.asarray(x, dtype=np.complex128)
    tab = evaluate(x)
    return tab.k0 * tab.i1 + tab.i0 * tab.k1 - 1.0 / x
