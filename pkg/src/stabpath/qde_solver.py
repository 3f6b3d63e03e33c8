"""Integration of the truncated quantum differential equation.

Two equivalent forms are supported.  The raw form

    t d(zeta)/dt = -(1/z) E(t) zeta

and the modified form obtained from ``zeta~ = t**mu zeta``

    d(zeta~)/dt = (-(1/z) E(1) + mu/t) zeta~.

Solutions are sampled on a geometric grid.  Large solutions are stored in
a log-gauge: the matrix at sample ``j`` is ``exp(log_gauge[j]) * values[j]``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import linalg_core
from ._backend import kernels
from .bessel import EULER_GAMMA
from .errors import DomainError, InputError, IntegrationError, NumericalError
from .gw_model import (TruncationParams, builtin_curve, endomorphism_terms,
                       to_array, truncated_endomorphism)

_STATUS = {
    1: "step size underflow",
    2: "step limit reached",
    3: "non-finite state",
}


def geometric_grid(t0, t1, points):
    """Log-uniform grid from ``t0`` to ``t1`` inclusive."""
    if not 0 < t0 < t1:
        raise InputError(f"need 0 < t0 < t1, got {t0!r}, {t1!r}")
    if points < 2:
        raise InputError("a grid needs at least two points")
    return np.geomspace(t0, t1, int(points))


@dataclass
class FundamentalSolution:
    """Matrix solution sampled on a grid.

    Attributes
    ----------
    kind : str
        ``numeric``, ``closed_form_curve``, ``canonical_curve`` or
        ``mirror_p1``.
    form : str
        ``raw`` or ``modified``.
    t : ndarray, shape (N,)
    values : ndarray, shape (N, n, n)
        Gauged matrices.
    log_gauge : ndarray, shape (N,)
    unit_covector : ndarray, shape (n,)
        Integration against the fundamental class.
    exponents : ndarray or None
        Eigenvalues of ``-(1/z) E(1)`` when known.
    steps : int
        Integrator steps taken, 0 for closed forms.
    """

    kind: str
    form: str
    t: np.ndarray
    values: np.ndarray
    log_gauge: np.ndarray
    unit_covector: np.ndarray
    exponents: np.ndarray = None
    steps: int = 0
    column_evaluator: object = field(default=None, repr=False)

    @property
    def n(self):
        return self.values.shape[1]

    def matrix(self, j):
        """Ungauged matrix at sample ``j``; may overflow for large gauges."""
        return math.exp(self.log_gauge[j]) * self.values[j]

    def apply(self, v):
        """Samples of ``Phi_t v`` in gauged form.

        Returns
        -------
        vectors : ndarray, shape (N, n)
        log_scale : ndarray, shape (N,)
            ``Phi_t v = exp(log_scale) * vectors``.
        """
        v = np.asarray(v, dtype=np.complex128)
        if self.column_evaluator is not None:
            return self.column_evaluator(v)
        return self.values @ v, self.log_gauge.copy()

    def log_norms(self, v):
        """``ln ||Phi_t v||`` at every sample (2-norm)."""
        vec, scale = self.apply(v)
        with np.errstate(divide="ignore"):
            return np.log(np.linalg.norm(vec, axis=1)) + scale

    def charges(self, v):
        """Central charges ``Z_t(v) = integral of Phi_t v`` as (values, log_scale)."""
        vec, scale = self.apply(v)
        return vec @ self.unit_covector, scale

    def log_abs_det(self):
        """``ln |det Phi_t|`` at every sample."""
        _, logdet = np.linalg.slogdet(self.values)
        return logdet + self.n * self.log_gauge

    def det_nonvanishing(self):
        """Mask of samples with ``|det| > 1e-12 ||Phi||^n`` (gauge invariant)."""
        _, logdet = np.linalg.slogdet(self.values)
        norms = np.array([linalg_core.op_norm(m) for m in self.values])
        with np.errstate(divide="ignore"):
            return logdet > math.log(1e-12) + self.n * np.log(norms)


@dataclass(frozen=True)
class AsymptoticSpectrum:
    """Eigenvalues of ``-(1/z) E(1)``, the candidate growth exponents."""

    eigenvalues: np.ndarray
    ramification_order: object
    distinct_real_parts: bool
    distinct_imag_parts: bool
    is_semisimple: bool


def asymptotic_spectrum(model, params):
    """Spectrum of ``-(1/z) E(1)``.

    The ramification order is reported as 1 when the matrix is semisimple
    with pairwise distinct eigenvalues, and ``None`` (unknown) otherwise.
    """
    m = -truncated_endomorphism(model, params, 1.0) / complex(params.z)
    spec = linalg_core.eigen(m)
    distinct = len(spec.multiplicities) == model.rank
    p = 1 if (spec.is_semisimple and distinct) else None
    return AsymptoticSpectrum(
        eigenvalues=spec.eigenvalues,
        ramification_order=p,
        distinct_real_parts=spec.distinct_real_parts,
        distinct_imag_parts=spec.distinct_imag_parts,
        is_semisimple=spec.is_semisimple,
    )


def _gauge_rate(model, params):
    m = -truncated_endomorphism(model, params, 1.0) / complex(params.z)
    vals = np.linalg.eigvals(m)
    return max(float(np.max(vals.real)), 0.0), vals


def _run(coeffs, powers, phi0, t_grid, rtol, shift):
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size < 1 or t_grid[0] <= 0:
        raise InputError("t_grid must be a 1-d array with t0 > 0")
    if np.any(np.diff(t_grid) <= 0):
        raise InputError("t_grid must be strictly increasing")
    phi0 = linalg_core.complex_matrix(phi0)
    if abs(np.linalg.det(phi0)) <= 1e-12 * max(linalg_core.op_norm(phi0), 1e-300) ** len(phi0):
        raise InputError("initial matrix is singular")
    ys, lg, steps, status, t_fail = kernels.integrate_linear(
        np.array(coeffs, dtype=np.complex128), np.array(powers, dtype=np.float64),
        phi0, t_grid, rtol, shift)
    if status != 0:
        raise IntegrationError(_STATUS.get(int(status), "integration failed"), float(t_fail))
    return ys, lg, int(steps)


def integrate_raw(model, params, phi0, t_grid, rtol=1e-10):
    """Integrate ``t Phi' = -(1/z) E(t) Phi`` with ``Phi(t_grid[0]) = phi0``.

    Returns
    -------
    FundamentalSolution
    """
    zinv = 1.0 / complex(params.z)
    coeffs, powers = [], []
    for p, c in endomorphism_terms(model, params):
        coeffs.append(-zinv * c)
        powers.append(p - 1.0)
    shift, vals = _gauge_rate(model, params)
    ys, lg, steps = _run(coeffs, powers, phi0, t_grid, rtol, shift)
    return FundamentalSolution(
        kind="numeric", form="raw", t=np.asarray(t_grid, dtype=float), values=ys,
        log_gauge=lg, unit_covector=model.unit_covector(), exponents=vals, steps=steps)


def integrate_modified(model, params, phi0, t_grid, rtol=1e-10):
    """Integrate ``Phi' = (-(1/z) E(1) + mu/t) Phi`` with ``Phi(t_grid[0]) = phi0``.

    Raises
    ------
    IntegrationError
        On step-size underflow, carrying the last good ``t``.
    """
    e1 = truncated_endomorphism(model, params, 1.0)
    coeffs = [-e1 / complex(params.z), to_array(model.mu)]
    powers = [0.0, -1.0]
    shift, vals = _gauge_rate(model, params)
    ys, lg, steps = _run(coeffs, powers, phi0, t_grid, rtol, shift)
    return FundamentalSolution(
        kind="numeric", form="modified", t=np.asarray(t_grid, dtype=float), values=ys,
        log_gauge=lg, unit_covector=model.unit_covector(), exponents=vals, steps=steps)


def to_modified(solution, mu):
    """Multiply a raw solution by ``t**mu`` (``mu`` diagonal)."""
    if solution.form != "raw":
        raise InputError("solution is already in modified form")
    d = np.real(np.diag(to_array(mu)))
    factors = solution.t[:, None] ** d[None, :]
    return FundamentalSolution(
        kind=solution.kind, form="modified", t=solution.t,
        values=solution.values * factors[:, :, None], log_gauge=solution.log_gauge,
        unit_covector=solution.unit_covector, exponents=solution.exponents,
        steps=solution.steps)


def curve_exponent(genus, z):
    """``-(1/z) c1`` for a curve of the given genus."""
    model = builtin_curve(genus) if genus >= 1 else None
    if model is None:
        raise DomainError("genus must be >= 1")
    return -to_array(model.c1_cup) / complex(z)


def canonical_matrix(genus):
    """Gamma-class initial matrix ``[[1, 0], [2(g-1) C_eu, 1]]``."""
    return np.array([[1.0, 0.0], [2.0 * (genus - 1) * EULER_GAMMA, 1.0]], dtype=np.complex128)


def closed_form_curve(genus, z, a_matrix, t):
    """``t**(-(1/z) c1) A`` for a curve; exact since the exponent is nilpotent."""
    if genus < 1:
        raise DomainError("genus must be >= 1")
    return linalg_core.mat_pow_t(curve_exponent(genus, z), t) @ np.asarray(a_matrix, complex)


def canonical_solution_curve(genus, z, t):
    """Canonical solution ``t**(-(1/z) c1) [[1, 0], [2(g-1) C_eu, 1]]``."""
    return closed_form_curve(genus, z, canonical_matrix(genus), t)


def curve_solution(genus, z, t_grid, a_matrix=None):
    """Closed-form curve solution sampled on a grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    a = canonical_matrix(genus) if a_matrix is None else np.asarray(a_matrix, complex)
    vals = np.array([closed_form_curve(genus, z, a, t) for t in t_grid])
    kind = "canonical_curve" if a_matrix is None else "closed_form_curve"
    return FundamentalSolution(
        kind=kind, form="raw", t=t_grid, values=vals, log_gauge=np.zeros(len(t_grid)),
        unit_covector=builtin_curve(max(genus, 1)).unit_covector(),
        exponents=np.zeros(2, dtype=complex))


def integrate_class(model, phi, v):
    """Integral of ``Phi v`` over the target: pairing with the unit class."""
    return complex(model.unit_covector() @ (np.asarray(phi, complex) @ np.asarray(v, complex)))


@dataclass(frozen=True)
class GrowthFit:
    """Slope of ``ln|f|`` against ``t`` on the tail half of a grid."""

    rate: float
    intercept: float
    residual: float

    def __float__(self):
        return self.rate


def growth_rate(samples=None, t=None, log_abs=None, log_scale=None):
    """Exponential growth rate of a scalar time series.

    Parameters
    ----------
    samples : array_like of complex, optional
        Values ``f(t)``.
    t : array_like
        Geometric grid, at least 20 points spanning a factor of 10.
    log_abs : array_like, optional
        ``ln|f(t)|`` directly, instead of ``samples``.
    log_scale : array_like, optional
        Added to ``ln|samples|`` (log-gauge of scaled data).

    Returns
    -------
    GrowthFit
        Least-squares slope on the upper half of the grid and the maximum
        absolute residual of the linear fit there.

    Raises
    ------
    InputError
        If the grid is too short.
    NumericalError
        If the samples vanish on the tail.
    """
    t = np.asarray(t, dtype=float)
    if t.size < 20 or t[-1] / t[0] < 10:
        raise InputError("growth_rate needs >= 20 samples with t1/t0 >= 10")
    if log_abs is None:
        s = np.asarray(samples, dtype=np.complex128)
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(s))
        if log_scale is not None:
            log_abs = log_abs + np.asarray(log_scale, dtype=float)
    log_abs = np.asarray(log_abs, dtype=float)
    half = t.size // 2
    tt, yy = t[half:], log_abs[half:]
    if not np.all(np.isfinite(yy)):
        raise NumericalError("undefined growth rate: samples vanish on the tail")
    design = np.stack([tt, np.ones_like(tt)], axis=1)
    coef, *_ = np.linalg.lstsq(design, yy, rcond=None)
    resid = float(np.max(np.abs(design @ coef - yy)))
    return GrowthFit(rate=float(coef[0]), intercept=float(coef[1]), residual=resid)


def liouville_log_det_increment(model, params, t0, t, form="modified"):
    """Exact ``ln det Phi_t - ln det Phi_t0`` from the trace of the equation.

    Returns the complex increment; its real part compares with
    :meth:`FundamentalSolution.log_abs_det`.
    """
    zinv = 1.0 / complex(params.z)
    if form == "modified":
        tr_e = np.trace(truncated_endomorphism(model, params, 1.0))
        tr_mu = float(np.trace(to_array(model.mu)).real)
        return -zinv * tr_e * (t - t0) + tr_mu * math.log(t / t0)
    total = 0j
    for p, c in endomorphism_terms(model, params):
        tr = -zinv * np.trace(c)
        total += tr * (math.log(t / t0) if p == 0 else (t ** p - t0 ** p) / p)
    return total


def central_charge_residual(model, params, v, t0=1.0, t1=3.0, h=0.01, rtol=1e-12):
    """Finite-difference check of ``(t d/dt)^2 Z = k^2 t^2 Z`` for the projective line.

    ``Z_t = integral of Phi_t v`` with ``Phi`` the raw solution.  A 7-point
    stencil in ``s = ln t`` approximates the second derivative.

    Returns
    -------
    ndarray
        Relative residuals at interior stencil centres.
    """
    lines = [cc for cc in model.curve_classes if cc.c1_dot_d == 2]
    if model.rank != 2 or len(lines) != 1:
        raise InputError("central-charge equation is specific to the projective line")
    cc = lines[0]
    z = complex(params.z)
    kappa_sq = 4.0 * np.exp(-(params.scale_omega * cc.omega_dot_d + 1j * cc.b_dot_d)) / z ** 2
    s = np.arange(math.log(t0), math.log(t1) + 0.5 * h, h)
    t = np.exp(s)
    sol = integrate_raw(model, params, np.eye(2), t, rtol=rtol)
    zt, scale = sol.charges(v)
    zt = zt * np.exp(scale)
    w = np.array([2, -27, 270, -490, 270, -27, 2]) / (180.0 * h * h)
    d2 = np.convolve(zt, w[::-1], mode="valid")
    mid = zt[3:-3]
    rhs = kappa_sq * t[3:-3] ** 2 * mid
    ref = np.maximum(np.abs(rhs), np.abs(d2))
    return np.abs(d2 - rhs) / np.maximum(ref, 1e-300)
