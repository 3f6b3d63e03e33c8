"""Paths in the upper half plane for curves of genus g >= 1.

A stability condition on a curve of positive genus is determined, up to
the additive action, by ``tau = Z(O_p)/Z(O_X)`` in the upper half plane.
Every solution of the curve equation gives the Mobius path

    tau(s) = (r s tau_inf + tau_0) / (r s + 1),     r = a e^{i theta},

with ``s = (2g - 2) ln t / |z|`` and ``e^{i theta} = conj(z)/|z|``.

Whether a path stays in the upper half plane is decided exactly: with
``q(s) = Im tau(s) |r s + 1|^2``,

    q(s) = |r|^2 Im(tau_inf) s^2 + Im(r tau_inf + conj(r) tau_0) s + Im(tau_0),

a real quadratic whose minimum over an interval is available in closed
form.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .bessel import EULER_GAMMA
from .errors import DomainError, InputError, NumericalError, SingularPathError
from .qde_solver import canonical_matrix

POLE_TOL = 1e-12
SEGMENT_TOL = 1e-10
FILTRATION_TAG = "two-step filtration 0 < torsion < all"


@dataclass(frozen=True)
class HgPath:
    """A sampled path in the upper half plane.

    Attributes
    ----------
    g : int
    theta : float
    a_param : complex
    tau0, tau_inf : complex
    s : ndarray
    tau : ndarray
    lifts : bool
        ``Im tau(s) > 0`` on the whole interval ``[s[0], s[-1]]``, certified
        from the quadratic ``q``, not just at the samples.
    min_im_sampled : float
        Smallest ``Im tau`` over the samples.
    kind : str
        ``general``, ``safe`` or ``canonical``.
    limit_is_boundary : bool
        The limit ``tau_inf`` lies on the real axis, outside the upper half plane.
    filtration : str or None
        Output tag for the canonical path, which recovers a filtration rather
        than a decomposition.
    """

    g: int
    theta: float
    a_param: complex
    tau0: complex
    tau_inf: complex
    s: np.ndarray
    tau: np.ndarray
    lifts: bool
    min_im_sampled: float
    kind: str = "general"
    limit_is_boundary: bool = False
    filtration: str = None

    @property
    def ratio(self):
        """``r = a e^{i theta}``."""
        return self.a_param * cmath.exp(1j * self.theta)

    def converges(self):
        """``|tau(s_max) - tau_inf| < 10/s_max``; Mobius tails decay like ``1/s``."""
        s_max = float(self.s[-1])
        return s_max > 0 and abs(self.tau[-1] - self.tau_inf) < 10.0 / s_max

    def trace_rows(self):
        """Rows ``(s, Re tau, Im tau, lifts_so_far)``."""
        so_far = np.minimum.accumulate(self.tau.imag) > 0
        return [(float(s), float(t.real), float(t.imag), bool(ok))
                for s, t, ok in zip(self.s, self.tau, so_far)]


def lift_quadratic(r, tau0, tau_inf):
    """Coefficients ``(c2, c1, c0)`` of ``q(s) = Im tau(s) |r s + 1|^2``."""
    r, tau0, tau_inf = complex(r), complex(tau0), complex(tau_inf)
    return (abs(r) ** 2 * tau_inf.imag,
            (r * tau_inf + r.conjugate() * tau0).imag,
            tau0.imag)


def quadratic_min(coeffs, lo, hi):
    """Minimum of ``c2 s^2 + c1 s + c0`` over ``[lo, hi]`` and where it occurs."""
    c2, c1, c0 = coeffs
    cands = [lo, hi]
    if c2 > 0:
        vertex = -c1 / (2.0 * c2)
        if lo < vertex < hi:
            cands.append(vertex)
    vals = [c2 * s * s + c1 * s + c0 for s in cands]
    j = int(np.argmin(vals))
    return vals[j], cands[j]


def _check_grid(s_grid):
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise InputError("s_grid must be a non-empty 1-d array")
    if np.any(s < 0) or np.any(np.diff(s) <= 0):
        raise InputError("s_grid must be increasing in [0, inf)")
    return s


def _mobius(r, tau0, tau_inf, s):
    den = r * s + 1.0
    if np.any(np.abs(den) < POLE_TOL):
        j = int(np.argmin(np.abs(den)))
        raise SingularPathError(f"path has a pole at s = {s[j]:.6g}")
    return (r * s * tau_inf + tau0) / den


def _certified_lift(r, tau0, tau_inf, s):
    """Exact check of ``Im tau > 0`` on ``[s[0], s[-1]]``.

    A pole between samples makes ``q`` vanish there, so such a path is
    reported as not lifting.
    """
    qmin, _ = quadratic_min(lift_quadratic(r, tau0, tau_inf), float(s[0]), float(s[-1]))
    return qmin > 0


def path_tau(g, theta, a_param, tau0, tau_inf, s_grid):
    """Sample ``tau(s) = (a e^{i theta} s tau_inf + tau0)/(a e^{i theta} s + 1)``.

    Raises
    ------
    SingularPathError
        If ``|a e^{i theta} s + 1| < 1e-12`` at a sample.
    """
    if int(g) < 1:
        raise DomainError("genus must be >= 1")
    s = _check_grid(s_grid)
    a_param, tau0, tau_inf = complex(a_param), complex(tau0), complex(tau_inf)
    r = a_param * cmath.exp(1j * theta)
    tau = _mobius(r, tau0, tau_inf, s)
    return HgPath(
        g=int(g), theta=float(theta), a_param=a_param, tau0=tau0, tau_inf=tau_inf,
        s=s, tau=tau, lifts=_certified_lift(r, tau0, tau_inf, s),
        min_im_sampled=float(np.min(tau.imag)),
        limit_is_boundary=tau_inf.imag <= 0,
    )


def segment_deviation(points, start, end):
    """Largest distance from ``points`` to the segment ``[start, end]``."""
    points = np.asarray(points, dtype=np.complex128)
    d = end - start
    if d == 0:
        return float(np.max(np.abs(points - start)))
    lam = np.clip(((points - start) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    return float(np.max(np.abs(points - (start + lam * d))))


def safe_path(g, theta, tau0, tau_inf, s_grid):
    """The path with ``a = e^{-i theta}``, which runs along ``[tau0, tau_inf]``.

    Raises
    ------
    DomainError
        If ``tau0`` or ``tau_inf`` is not in the upper half plane.
    NumericalError
        If a sample strays from the segment by more than ``1e-10``.
    """
    tau0, tau_inf = complex(tau0), complex(tau_inf)
    if tau0.imag <= 0 or tau_inf.imag <= 0:
        raise DomainError("tau0 and tau_inf must lie in the upper half plane")
    path = path_tau(g, theta, cmath.exp(-1j * theta), tau0, tau_inf, s_grid)
    scale = max(1.0, abs(tau0), abs(tau_inf))
    dev = segment_deviation(path.tau, tau0, tau_inf) / scale
    if dev > SEGMENT_TOL:
        raise NumericalError(f"safe path leaves the segment by {dev:.3g}")
    if not path.lifts:
        raise NumericalError("safe path fails to lift")
    return HgPath(**{**path.__dict__, "kind": "safe"})


def canonical_constants(g):
    """``(a, tau0, tau_inf)`` of the canonical solution up to rescaling."""
    if g < 2:
        raise DomainError("the canonical path needs g >= 2")
    c = 2.0 * (g - 1) * EULER_GAMMA
    return 1.0 / c, 2j * math.pi / c, 0j


def canonical_path(g, theta, s_grid):
    """``tau(s) = 2 pi i / (e^{i theta} s + 2 (g-1) C_eu)``.

    The path tends to 0, which is not a stability condition, and carries the
    filtration tag instead of a decomposition.
    """
    a, tau0, tau_inf = canonical_constants(int(g))
    s = _check_grid(s_grid)
    den = cmath.exp(1j * theta) * s + 2.0 * (g - 1) * EULER_GAMMA
    if np.any(np.abs(den) < POLE_TOL):
        raise SingularPathError("canonical path has a pole on the grid")
    tau = 2j * math.pi / den
    r = a * cmath.exp(1j * theta)
    return HgPath(
        g=int(g), theta=float(theta), a_param=complex(a), tau0=tau0, tau_inf=tau_inf,
        s=s, tau=tau, lifts=_certified_lift(r, tau0, tau_inf, s),
        min_im_sampled=float(np.min(tau.imag)), kind="canonical",
        limit_is_boundary=True, filtration=FILTRATION_TAG,
    )


def path_matrix(a_param, tau0, tau_inf):
    """``A = [[a, a tau_inf/(2 pi i)], [1, tau0/(2 pi i)]]``."""
    two_pi_i = 2j * math.pi
    return np.array([[a_param, a_param * tau_inf / two_pi_i], [1.0, tau0 / two_pi_i]],
                    dtype=np.complex128)


def hg_central_charges(g, z, a_matrix, t):
    """``(Z_t(O_X), Z_t(O_p))`` from ``[0, 1] (I + (2g-2)/z ln t N) A v``.

    Raises
    ------
    DomainError
        If ``Z(O_X) = 0``, where ``tau`` is undefined, or ``A`` is singular.
    """
    if not t > 0:
        raise InputError("t must be positive")
    a_matrix = np.asarray(a_matrix, dtype=np.complex128)
    if abs(np.linalg.det(a_matrix)) < 1e-14 * max(1.0, np.abs(a_matrix).max()) ** 2:
        raise DomainError("A must be invertible")
    c = (2 * g - 2) * math.log(t) / complex(z)
    phi = np.array([[1.0, 0.0], [c, 1.0]]) @ a_matrix
    z_x = complex(phi[1] @ np.array([1.0, 0.0]))
    z_p = complex(phi[1] @ np.array([0.0, 2j * math.pi]))
    if abs(z_x) < 1e-300:
        raise DomainError("Z(O_X) vanishes: tau is undefined")
    return z_x, z_p


def tau_from_charges(g, z, a_matrix, t):
    """``Z_t(O_p) / Z_t(O_X)``."""
    z_x, z_p = hg_central_charges(g, z, a_matrix, t)
    return z_p / z_x


def reparametrise(g, z, t):
    """``s = (2g - 2) ln t / |z|`` and ``theta = arg conj(z)``."""
    z = complex(z)
    return (2 * g - 2) * math.log(t) / abs(z), -cmath.phase(z)


def canonical_charges(g, z, t):
    """Charges of the canonical solution ``t^{-c1/z} Gamma``."""
    return hg_central_charges(g, z, canonical_matrix(g), t)


def necessity_probe(a_param, theta, trials=100, rng=None, box=5.0):
    """Search for ``tau0, tau_inf`` in the upper half plane whose path dips below it.

    For ``a`` off the ray ``R_{>0} e^{-i theta}`` such data exist.  Each
    trial draws real parts uniformly from ``[-box, box]`` and imaginary
    parts log-uniformly from ``[1e-3 box, box]``, then tests
    ``min_{s >= 0} q(s) <= 0`` exactly.  Near the ray witnesses need small
    imaginary parts, which uniform sampling rarely produces.

    Returns
    -------
    list of (tau0, tau_inf, s)
        Witnesses found.
    """
    rng = np.random.default_rng(rng)
    r = complex(a_param) * cmath.exp(1j * theta)
    found = []
    for _ in range(int(trials)):
        re = rng.uniform(-box, box, 2)
        im = box * np.exp(rng.uniform(math.log(1e-3), 0.0, 2))
        tau0, tau_inf = complex(re[0], im[0]), complex(re[1], im[1])
        c2, c1, c0 = lift_quadratic(r, tau0, tau_inf)
        # minimiser over [0, inf): vertex if positive, else 0
        s_star = max(0.0, -c1 / (2.0 * c2))
        if c2 * s_star ** 2 + c1 * s_star + c0 <= 0 and abs(r * s_star + 1) > POLE_TOL:
            found.append((tau0, tau_inf, s_star))
    return found
