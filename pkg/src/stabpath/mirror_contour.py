"""Contour integrals for the Landau-Ginzburg mirror of the projective line.

With ``u = kappa*t`` the central charge of an object ``E`` is

    Z_t(E) = 1/2 * integral over L(E) of exp(-(x + u^2/(4x))) dx/x.

For the skyscraper ``L`` is a circle around the origin and the integral
is ``i*pi*I0(u)``.  For ``O(k-1)`` it is the image ``C_theta`` under
``exp`` of the path that runs along ``Im w = theta`` from ``-inf`` to
``i*theta``, down the imaginary axis to 0 and out along the positive real
axis; the integral is ``K0(u)``.  In ``w = ln x`` the integrand is

    1/2 * exp(-(e^w + u^2 e^{-w} / 4)),

which decays double-exponentially on both unbounded legs as long as
``Re(u^2 e^{-i theta}) > 0``.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .errors import DomainError, InputError

TAIL_FLOOR = 1e-18
GAUSS_ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class Contour:
    """Quadrature description of a mirror contour.

    Attributes
    ----------
    kind : {"unit_circle", "c_theta"}
    theta : float
        Height of the left leg of ``C_theta``; ignored for circles.
    cutoff : float or None
        Length in ``Re w`` of each unbounded leg.  ``None`` picks the point
        where the integrand falls below ``1e-18``.
    samples_per_unit : int
        Quadrature nodes per unit length in ``w`` (circle: per unit angle).
    """

    kind: str = "c_theta"
    theta: float = 0.0
    cutoff: float = None
    samples_per_unit: int = 64

    def __post_init__(self):
        if self.kind not in ("unit_circle", "c_theta"):
            raise InputError(f"unknown contour kind {self.kind!r}")
        if self.cutoff is not None and not self.cutoff > 0:
            raise InputError("cutoff must be positive")
        if self.samples_per_unit < 4:
            raise InputError("samples_per_unit must be at least 4")


@dataclass(frozen=True)
class ContourResult:
    """Quadrature value with error diagnostics.

    Attributes
    ----------
    value : complex
    est_error : float
        Difference from the same rule at half the node density.
    tail_bound : float
        Bound on the discarded parts of the unbounded legs.
    """

    value: complex
    est_error: float
    tail_bound: float

    def __complex__(self):
        return self.value


def _integrand(w, u_sq):
    return 0.5 * np.exp(-(np.exp(w) + 0.25 * u_sq * np.exp(-w)))


def _gauss_segment(f, lo, hi, density):
    """Composite Gauss-Legendre rule for ``f`` on the real interval [lo, hi]."""
    length = hi - lo
    if length == 0:
        return 0j
    panels = max(1, math.ceil(abs(length) * density / GAUSS_ORDER))
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    pts = mids[:, None] + half[:, None] * _NODES[None, :]
    return complex(np.sum(half[:, None] * _WEIGHTS[None, :] * f(pts)))


def _check_decay(u_sq, theta):
    rate = (u_sq * cmath.exp(-1j * theta)).real
    if not rate > 0:
        raise DomainError(
            f"left leg of C_theta diverges: Re(u^2 exp(-i theta)) = {rate:.3g} <= 0 "
            f"for theta = {theta:.6g}")
    return rate


def _legs(u_sq, theta, cutoff):
    """Truncation points ``s_left < 0 < s_right`` and the tail bound."""
    rate = _check_decay(u_sq, theta)
    log_floor = -math.log(TAIL_FLOOR)
    if cutoff is None:
        # exp(-rate e^{-s}/4) < floor on the left leg, exp(-e^s) < floor on the right
        s_left = -max(1.0, math.log(4.0 * log_floor / rate) + 1.0)
        s_right = max(1.0, math.log(log_floor) + 1.0)
    else:
        s_left, s_right = -float(cutoff), float(cutoff)
    # both tails are bounded by the integrand at the cut times its e-folding length
    left_tail = 0.5 * math.exp(-0.25 * rate * math.exp(-s_left)) * 4.0 * math.exp(s_left) / rate
    right_tail = 0.5 * math.exp(-math.exp(s_right)) * math.exp(-s_right) * math.exp(
        0.25 * abs(u_sq) * math.exp(-s_right))
    return s_left, s_right, left_tail + right_tail


def _c_theta(u_sq, theta, s_left, s_right, density):
    left = _gauss_segment(lambda s: _integrand(s + 1j * theta, u_sq), s_left, 0.0, density)
    arc = 1j * _gauss_segment(lambda sig: _integrand(1j * sig, u_sq), theta, 0.0, density)
    right = _gauss_segment(lambda s: _integrand(s + 0j, u_sq), 0.0, s_right, density)
    return left + arc + right


def linebundle_charge(kappa, t, theta, contour=None):
    """``Z_t(O(k-1))`` as the integral over ``C_theta``; equals ``K0(kappa t)``.

    Parameters
    ----------
    kappa : complex
    t : float
        Positive.
    theta : float
        Must satisfy ``Re((kappa t)^2 e^{-i theta}) > 0``.
    contour : Contour, optional
        Overrides ``cutoff`` and node density; its ``theta`` is ignored.

    Returns
    -------
    ContourResult

    Raises
    ------
    DomainError
        If the left leg does not converge.
    """
    if not t > 0:
        raise InputError("t must be positive")
    contour = contour or Contour(kind="c_theta", theta=theta)
    u_sq = (complex(kappa) * t) ** 2
    s_left, s_right, tail = _legs(u_sq, float(theta), contour.cutoff)
    density = contour.samples_per_unit
    fine = _c_theta(u_sq, float(theta), s_left, s_right, density)
    coarse = _c_theta(u_sq, float(theta), s_left, s_right, density / 2)
    return ContourResult(value=fine, est_error=abs(fine - coarse), tail_bound=tail)


def _circle(u_sq, radius, n):
    ang = 2.0 * math.pi * np.arange(n) / n
    x = radius * np.exp(1j * ang)
    # dx/x = i d(angle)
    vals = np.exp(-(x + 0.25 * u_sq / x))
    return complex(0.5j * (2.0 * math.pi / n) * np.sum(vals))


def skyscraper_charge(kappa, t, contour=None):
    """``Z_t(O_p)`` as a loop integral around the origin; equals ``i pi I0(kappa t)``.

    The trapezoid rule is used on the circle of radius ``max(1, |kappa t|/2)``,
    which balances the two exponentials in the integrand.

    Returns
    -------
    ContourResult
    """
    if t < 0:
        raise InputError("t must be nonnegative")
    contour = contour or Contour(kind="unit_circle")
    u = complex(kappa) * t
    radius = max(1.0, 0.5 * abs(u))
    n = max(32, int(math.ceil(2.0 * math.pi * contour.samples_per_unit)))
    # the integrand is entire in 1/x and x, so the rule converges geometrically in n
    n = max(n, int(8 * abs(u)) + 32)
    fine = _circle(u * u, radius, n)
    coarse = _circle(u * u, radius, n // 2)
    return ContourResult(value=fine, est_error=abs(fine - coarse), tail_bound=0.0)


def default_theta(b, a, k):
    """``theta = 2 Im(b - a) - 2 pi (k - 1)`` for the contour of ``O(k-1)``."""
    return 2.0 * (complex(b) - complex(a)).imag - 2.0 * math.pi * (k - 1)
