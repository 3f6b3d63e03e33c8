"""Stability conditions on the projective line through Bessel functions.

The space of stability conditions modulo the additive action is covered by
charts ``k`` in which ``O(k-1)`` and ``O(k)`` are stable.  A global
coordinate ``tau`` with ``Im tau`` in ``pi*[k-1, k]`` maps to the point
with central charges

    Z(O_p)    = i*pi*I0(x)
    Z(O(k-1)) = K0(x)
    Z(O(k))   = K0(x) + i*pi*I0(x),       x = (-1)**(k-1) * exp(tau),

and chart coordinate ``phi_k = log Z(O(k)) - log Z(O(k-1))``, lifted
continuously from ``phi_k = 0`` at ``x = 0``.

Paths driven by the quantum differential equation are
``tau(t) = ln(2t) + b - a``, along which ``x = kappa*t`` with
``kappa = (-1)**(k-1) * 2 exp(b - a)``.
"""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .bessel import evaluate
from .errors import (BoundaryCaseError, BranchTrackingError, DomainError, InputError,
                     NumericalError)
from .qde_solver import FundamentalSolution

TWO_PI_I = 2j * math.pi
MAX_REFINE = 30
TAIL_LAW_CONSTANT = 1.0


def line_class(m):
    """Class of the line bundle ``O(m)`` in the basis (1, H)."""
    return np.array([1.0, TWO_PI_I * m], dtype=np.complex128)


POINT_CLASS = np.array([0.0, TWO_PI_I], dtype=np.complex128)


def chart_index(tau):
    """Index ``k`` with ``Im tau`` in ``pi*[k-1, k)``.

    A point on a shared boundary line is assigned to the strip above it,
    so real ``tau`` lies in chart 1.
    """
    return int(math.floor(complex(tau).imag / math.pi)) + 1


def chart_argument(tau, k=None):
    """``(-1)**(k-1) * exp(tau)``, the Bessel argument in chart ``k``."""
    tau = complex(tau)
    if k is None:
        k = chart_index(tau)
    # reduce the angle first so that tau on a boundary line gives a real x
    angle = tau.imag - math.pi * (k - 1)
    return math.exp(tau.real) * complex(math.cos(angle), math.sin(angle))


def _ratio_scaled(x):
    """``W0/K0`` divided by ``exp(2x)``, plus the scaled table."""
    tab = evaluate(x, scaled=True)
    return tab.w0 / tab.k0 * np.exp(-2j * tab.z.imag), tab


def _lift_ray(xs):
    """Continuous log of ``W0/K0`` along the ray through the points ``xs``.

    ``xs`` must lie on one ray from the origin in increasing modulus.  The
    log of the scaled ratio ``W0/(K0 exp(2x))`` is unwrapped over a node
    set that is bisected until consecutive arguments differ by less than
    pi/2; ``2x`` is then added back.
    """
    xs = np.asarray(xs, dtype=np.complex128)
    direction = xs[-1] / abs(xs[-1])
    radii = np.abs(xs)
    start = min(1e-10, 1e-3 * radii[0])
    nodes = np.concatenate([np.geomspace(start, radii[0], 40, endpoint=False), radii])
    is_sample = np.zeros(nodes.size, dtype=bool)
    is_sample[40:] = True
    logs = np.log(_ratio_scaled(nodes * direction)[0])
    for _ in range(MAX_REFINE):
        jumps = np.abs(np.remainder(np.diff(logs.imag) + math.pi, 2 * math.pi) - math.pi)
        bad = np.nonzero(jumps > 0.5 * math.pi)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (nodes[bad] + nodes[bad + 1])
        mid_logs = np.log(_ratio_scaled(mids * direction)[0])
        nodes = np.insert(nodes, bad + 1, mids)
        logs = np.insert(logs, bad + 1, mid_logs)
        is_sample = np.insert(is_sample, bad + 1, False)
    else:
        raise BranchTrackingError("argument of W0/K0 could not be resolved along the ray")
    # principal log is correct at the first node, where W0/K0 is close to 1
    lifted = logs.real + 1j * np.unwrap(logs.imag)
    return lifted[is_sample] + 2.0 * xs


def _check_closed_upper(x):
    x = np.asarray(x, dtype=np.complex128)
    if np.any(x.imag < 0):
        raise DomainError("brane coordinate is defined on the closed upper half plane")


def brane_coordinate(x):
    """``f(x) = log((K0(x) + i pi I0(x)) / K0(x))`` with ``f(0) = 0``.

    The logarithm is continued along the segment from 0 to ``x``.

    Parameters
    ----------
    x : complex
        Point of the closed upper half plane.

    Raises
    ------
    DomainError
        If ``Im x < 0``.
    BranchTrackingError
        If the continuation cannot be resolved.
    """
    x = complex(x)
    _check_closed_upper(x)
    if x == 0:
        return 0j
    return complex(_lift_ray(np.array([x]))[0])


def brane_coordinates_on_ray(xs):
    """Vectorised :func:`brane_coordinate` for points on one ray.

    Parameters
    ----------
    xs : array_like
        Nonzero points ``s*u`` with a common direction ``u`` and
        increasing ``s > 0``.
    """
    xs = np.asarray(xs, dtype=np.complex128)
    _check_closed_upper(xs)
    if np.any(xs == 0):
        raise DomainError("points must be nonzero")
    direction = xs / np.abs(xs)
    if np.max(np.abs(direction - direction[-1])) > 1e-12:
        raise InputError("points are not on a common ray")
    if np.any(np.diff(np.abs(xs)) <= 0):
        raise InputError("points must have increasing modulus")
    return _lift_ray(xs)


@dataclass(frozen=True)
class StabPointP1:
    """A stability condition on the projective line in chart coordinates.

    Attributes
    ----------
    tau : complex
    chart_k : int
    x : complex
        Bessel argument ``(-1)**(k-1) exp(tau)``.
    phi_k : complex
    z_point : complex
        ``Z(O_p)``.
    z_line : complex
        ``Z(O(k-1))``.
    z_next : complex
        ``Z(O(k))``.
    """

    tau: complex
    chart_k: int
    x: complex
    phi_k: complex
    z_point: complex
    z_line: complex
    z_next: complex

    @property
    def slope_region(self):
        """Whether ``Im phi_k`` lies in (0, pi), where slope stability applies."""
        return 0.0 < self.phi_k.imag < math.pi


def b_map(tau):
    """The stability condition with global coordinate ``tau``."""
    tau = complex(tau)
    if not (math.isfinite(tau.real) and math.isfinite(tau.imag)):
        raise DomainError("tau must be finite")
    k = chart_index(tau)
    x = chart_argument(tau, k)
    tab = evaluate(np.array([x]))
    phi = brane_coordinate(x)
    return StabPointP1(
        tau=tau, chart_k=k, x=x, phi_k=phi,
        z_point=complex(1j * math.pi * tab.i0[0]),
        z_line=complex(tab.k0[0]),
        z_next=complex(tab.w0[0]),
    )


def chart_transition(exp_phi_k):
    """``exp(phi_{k+1}) = 2 - 1/exp(phi_k)``."""
    return 2.0 - 1.0 / complex(exp_phi_k)


def glue_check(x):
    """Difference of the two sides of the gluing identity at ``e^x``.

    ``(K0(y) + i pi I0(y)) / K0(y) - (2 - K0(-y) / (K0(-y) + i pi I0(-y)))``
    with ``y = exp(x)``.
    """
    y = math.exp(float(x))
    tab = evaluate(np.array([y, -y]))
    lhs = tab.w0[0] / tab.k0[0]
    rhs = 2.0 - tab.k0[1] / tab.w0[1]
    return complex(lhs - rhs)


def transition_residuals(x):
    """Relative residual of the chart transition at Bessel arguments ``x``.

    For ``Re x != 0`` let ``X = +-x`` with ``Re X > 0``.  Chart ``k`` at
    argument ``-X`` and chart ``k+1`` at argument ``X`` describe the same
    stability condition, so ``exp(phi_{k+1}) = 2 - 1/exp(phi_k)``.  The
    residual is ``|RHS/LHS - 1|``, evaluated from scaled values so that it
    stays finite.  Points on the imaginary axis have no neighbouring chart
    and give NaN.
    """
    x = np.asarray(x, dtype=np.complex128)
    big = np.where(x.real >= 0, x, -x)
    out = np.full(x.shape, np.nan)
    ok = big.real > 0
    if not np.any(ok):
        return out
    xx = big[ok]
    up = evaluate(xx, scaled=True)
    down = evaluate(-xx, scaled=True)
    inv_up = (up.k0 / up.w0) * np.exp(-2.0 * xx.real)   # 1/exp(phi_{k+1})
    # 1/exp(phi_k) is (down.k0 / down.w0) * exp(2 Re X); the factors cancel
    rhs_over_lhs = 2.0 * inv_up - (down.k0 / down.w0) * (up.k0 / up.w0)
    out[ok] = np.abs(rhs_over_lhs - 1.0)
    return out


@dataclass
class PathP1:
    """Samples of ``tau(t) = ln(2t) + b - a``.

    Attributes
    ----------
    b, a : complex
    kappa : complex
    chart_k : int
    t : ndarray
    tau : ndarray
    x : ndarray
        ``kappa * t``.
    phi : ndarray
        Chart coordinate at each sample.
    z_point, z_line, z_next : ndarray
        Scaled central charges of ``O_p``, ``O(k-1)``, ``O(k)``.
    log_scale_point, log_scale_line, log_scale_next : ndarray
        Real log of the factor removed from each charge.
    eventual_t_star : float or None
        First sample with ``Im phi > pi``.
    boundary_case : bool
        ``kappa`` is real: no decomposition is extracted.
    tail_law_residual : float
        ``max |phi - 2 kappa t - i pi/2| * |kappa t|`` over the tail.
    """

    b: complex
    a: complex
    kappa: complex
    chart_k: int
    t: np.ndarray
    tau: np.ndarray
    x: np.ndarray
    phi: np.ndarray
    z_point: np.ndarray
    z_line: np.ndarray
    z_next: np.ndarray
    log_scale_point: np.ndarray
    log_scale_line: np.ndarray
    log_scale_next: np.ndarray
    eventual_t_star: object
    boundary_case: bool
    tail_law_residual: float

    def charges(self, which):
        """Unscaled charges; may overflow for long paths."""
        vals = {"point": (self.z_point, self.log_scale_point),
                "line": (self.z_line, self.log_scale_line),
                "next": (self.z_next, self.log_scale_next)}[which]
        return vals[0] * np.exp(vals[1])

    def in_eventual_regime(self):
        if self.eventual_t_star is None:
            return np.zeros(len(self.t), dtype=bool)
        return self.t >= self.eventual_t_star

    def point(self, j):
        """:class:`StabPointP1` at sample ``j``."""
        return StabPointP1(
            tau=complex(self.tau[j]), chart_k=self.chart_k, x=complex(self.x[j]),
            phi_k=complex(self.phi[j]),
            z_point=complex(self.charges("point")[j]),
            z_line=complex(self.charges("line")[j]),
            z_next=complex(self.charges("next")[j]),
        )


def path_kappa(b, a):
    """Chart index and ``kappa`` of the path through ``ln(2t) + b - a``."""
    shift = complex(b) - complex(a)
    k = chart_index(shift)
    return k, 2.0 * chart_argument(shift, k)


def qde_path(b, a, t_grid):
    """Sample the path ``tau(t) = ln(2t) + b - a``.

    Parameters
    ----------
    b, a : complex
    t_grid : array_like
        Increasing grid with ``t0 >= 1``.

    Returns
    -------
    PathP1

    Raises
    ------
    NumericalError
        If the tail violates ``|phi - 2 kappa t - i pi/2| <= 1/|kappa t|``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
        raise InputError("t_grid must be increasing with at least two points")
    if t[0] < 1.0:
        raise InputError("paths start at t0 >= 1")
    k, kappa = path_kappa(b, a)
    shift = complex(b) - complex(a)
    tau = np.log(2.0 * t) + shift
    x = kappa * t
    tab = evaluate(x, scaled=True)
    phi = brane_coordinates_on_ray(x)
    boundary = abs(kappa.imag) <= 1e-12 * abs(kappa)
    above = np.nonzero(phi.imag > math.pi)[0]
    t_star = float(t[above[0]]) if above.size else None

    tail = slice(t.size // 2, None)
    kt = np.abs(x[tail])
    dev = np.abs(phi[tail] - 2.0 * x[tail] - 0.5j * math.pi) * kt
    usable = kt >= 10.0
    law = float(np.max(dev[usable])) if np.any(usable) else float("nan")
    if np.any(usable) and law > TAIL_LAW_CONSTANT:
        raise NumericalError(
            f"chart coordinate violates its asymptotic law: |kappa t| * residual = {law:.3g}")

    return PathP1(
        b=complex(b), a=complex(a), kappa=kappa, chart_k=k, t=t, tau=tau, x=x, phi=phi,
        z_point=1j * math.pi * tab.i0, z_line=tab.k0, z_next=tab.w0,
        log_scale_point=tab.log_scale("i"), log_scale_line=tab.log_scale("k"),
        log_scale_next=tab.log_scale("w"),
        eventual_t_star=t_star, boundary_case=bool(boundary), tail_law_residual=law,
    )


@dataclass(frozen=True)
class EventualObject:
    """An eventually semistable object along a path, with its measured exponent."""

    label: str
    class_v: np.ndarray
    alpha_expected: complex
    charges: object   # sod_extractor.ChargeSeries
    fit: object       # sod_extractor.AsymptoticFit
    growth: float


def eventual_objects(path, match_tol=1e-2):
    """The two line bundles that stay stable as ``t`` grows.

    Returns ``O(k-1)`` with exponent ``-kappa`` and ``O(k)`` with exponent
    ``+kappa``, after checking the fitted exponents against these values.

    Raises
    ------
    BoundaryCaseError
        For real ``kappa``.
    NumericalError
        If the path never enters the eventual regime or a fitted exponent is
        off by more than ``match_tol``.
    """
    from .qde_solver import growth_rate
    from .sod_extractor import ChargeSeries, fit_asymptotics

    if path.boundary_case:
        raise BoundaryCaseError(
            f"kappa = {path.kappa:.6g} is real: boundary case, no decomposition")
    if path.eventual_t_star is None:
        raise NumericalError("path does not reach Im phi > pi; extend t1")
    k = path.chart_k
    specs = [
        (f"O({k - 1})", line_class(k - 1), -path.kappa, path.z_line, path.log_scale_line),
        (f"O({k})", line_class(k), path.kappa, path.z_next, path.log_scale_next),
    ]
    out = []
    for label, cls, alpha, vals, scale in specs:
        series = ChargeSeries(label=label, class_v=cls, t=path.t, values=vals,
                              log_scale=scale, eventually_semistable=True)
        fit = fit_asymptotics(series)
        # remove the power of t first: a t^(-1/2) factor biases a short tail by ~1/(2t)
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(vals)) + scale - fit.gamma.real * np.log(path.t)
        rate = growth_rate(t=path.t, log_abs=log_abs).rate
        if abs(fit.alpha - alpha) > match_tol or abs(rate - alpha.real) > match_tol:
            raise NumericalError(
                f"{label}: fitted exponent {fit.alpha:.6g} (rate {rate:.6g}) "
                f"does not match {alpha:.6g}")
        out.append(EventualObject(label=label, class_v=cls, alpha_expected=alpha,
                                  charges=series, fit=fit, growth=rate))
    return out


def path_phases(path):
    """Consistently lifted ``arg Z`` of ``O(k-1)`` and ``O(k)`` along a path.

    ``arg Z(O(k-1))`` is followed continuously from its principal value at
    the first sample, and ``arg Z(O(k)) = arg Z(O(k-1)) + Im phi``.

    Returns
    -------
    dict
        ``label -> (t, phase)``.
    """
    from .sod_extractor import ChargeSeries

    k = path.chart_k
    line = ChargeSeries(label=f"O({k - 1})", class_v=line_class(k - 1), t=path.t,
                        values=path.z_line).log_lift().imag
    return {f"O({k - 1})": (path.t, line), f"O({k})": (path.t, line + path.phi.imag)}


def point_charges(path):
    """Charge series of the skyscraper ``O_p`` along the path."""
    from .sod_extractor import ChargeSeries

    return ChargeSeries(label="O_p", class_v=POINT_CLASS, t=path.t, values=path.z_point,
                        log_scale=path.log_scale_point, eventually_semistable=False)


def mirror_solution(b, a, t_grid, gauge="modified"):
    """Closed-form fundamental solution of the projective-line equation.

    On the classes of ``O(k-1)`` and ``O(k)`` the solution is

        Phi_t v(O(k-1)) = [kappa t K1(kappa t) / (2 e^b), K0(kappa t)]
        Phi_t v(O(k))   = [kappa t W1(kappa t) / (2 e^b), W0(kappa t)]

    in the raw form; ``gauge="modified"`` multiplies by ``t**mu``.  Other
    classes are decomposed in this basis, so a class that is an exact
    multiple of ``v(O(k-1))`` never picks up the growing column.
    """
    if gauge not in ("raw", "modified"):
        raise InputError("gauge must be 'raw' or 'modified'")
    t = np.asarray(t_grid, dtype=float)
    k, kappa = path_kappa(b, a)
    x = kappa * t
    tab = evaluate(x, scaled=True)
    pref = x / (2.0 * cmath.exp(complex(b)))
    kcol = np.stack([pref * tab.k1, tab.k0], axis=1)
    wcol = np.stack([pref * tab.w1, tab.w0], axis=1)
    if gauge == "modified":
        g = np.stack([t ** -0.5, t ** 0.5], axis=1)
        kcol = kcol * g
        wcol = wcol * g
    sk = tab.log_scale("k")
    sw = tab.log_scale("w")
    base = TWO_PI_I * (k - 1)

    def evaluator(v):
        v = np.asarray(v, dtype=np.complex128)
        c_next = (v[1] - base * v[0]) / TWO_PI_I
        c_line = v[0] - c_next
        if c_next == 0:
            return c_line * kcol, sk.copy()
        if c_line == 0:
            return c_next * wcol, sw.copy()
        s = np.maximum(sk, sw)
        vec = (c_line * kcol * np.exp(sk - s)[:, None]
               + c_next * wcol * np.exp(sw - s)[:, None])
        return vec, s

    cols = []
    scales = []
    for e in np.eye(2):
        vec, s = evaluator(e)
        cols.append(vec)
        scales.append(s)
    common = np.maximum(scales[0], scales[1])
    values = np.stack([cols[j] * np.exp(scales[j] - common)[:, None] for j in range(2)],
                      axis=2)
    unit = np.array([0.0, 1.0], dtype=np.complex128)
    return FundamentalSolution(
        kind="mirror_p1", form=gauge, t=t, values=values, log_gauge=common,
        unit_covector=unit, exponents=np.array([-kappa, kappa]),
        column_evaluator=evaluator)
