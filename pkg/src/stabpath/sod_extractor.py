"""Semiorthogonal-decomposition data from the asymptotics of central charges.

Along a path whose eventually semistable objects satisfy

    log Z_t(E) = alpha_E t + gamma_E ln t + beta_E + o(1),

objects group into clusters of equal ``alpha``.  Ordering the clusters by
``Im alpha`` gives the pieces of a decomposition; their classes span
summands of the lattice and the limits ``exp(-alpha t) t^(-gamma) Z_t``
are the central charges on the pieces.

The module works on sampled charges only.  Which objects are eventually
semistable is input: the geometry modules know it, the samples do not.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .errors import GenericityError, InputError, NumericalError
from .qde_solver import growth_rate

TAIL_FRACTIONS = (0.5, 0.625, 0.75)
DEFAULT_FIT_TOL = 5e-2
DEFAULT_CLUSTER_TOL = 1e-4
RANK_FLOOR = 1e-8
RATIO_FLOOR = 1e-6


class NotEventuallyNonzeroError(NumericalError):
    """Charge samples vanish or change phase abruptly on the tail."""


@dataclass(frozen=True)
class ChargeSeries:
    """Central charges of one object along a path.

    ``Z_t = values * exp(log_scale)``; ``log_scale`` lets charges far
    outside the double range be passed in scaled form.
    """

    label: str
    class_v: np.ndarray
    t: np.ndarray
    values: np.ndarray
    log_scale: np.ndarray = None
    eventually_semistable: bool = True

    def log_lift(self):
        """Continuous logarithm of the charges.

        Raises
        ------
        NotEventuallyNonzeroError
            If a sample is zero or non-finite, or the phase moves by more
            than pi/2 between neighbours (a zero crossing or an unresolved
            oscillation).
        """
        vals = np.asarray(self.values, dtype=np.complex128)
        if np.any(~np.isfinite(vals)) or np.any(vals == 0):
            raise NotEventuallyNonzeroError(f"{self.label}: charge vanishes or is not finite")
        phase = np.angle(vals)
        steps = np.remainder(np.diff(phase) + math.pi, 2 * math.pi) - math.pi
        if np.any(np.abs(steps) > 0.5 * math.pi):
            j = int(np.argmax(np.abs(steps)))
            raise NotEventuallyNonzeroError(
                f"{self.label}: phase jumps by {abs(steps[j]):.3g} near t = {self.t[j + 1]:.6g}; "
                "charge crosses zero or the grid is too coarse")
        lifted = np.log(np.abs(vals)) + 1j * (phase[0] + np.concatenate([[0.0], np.cumsum(steps)]))
        if self.log_scale is not None:
            lifted = lifted + np.asarray(self.log_scale, dtype=float)
        return lifted


@dataclass(frozen=True)
class AsymptoticFit:
    """Fit of ``log Z_t = alpha t + gamma ln t + beta + o(1)`` on the tail.

    Attributes
    ----------
    object_label : str
    class_v : ndarray
    alpha, gamma, beta : complex
    residual_sup : float
        ``sup |log Z_t - (alpha t + gamma ln t + beta)|`` on the tail half.
    nested_residuals : tuple of float
        The same quantity on nested tails that start further out.
    accepted : bool
        ``residual_sup < fit_tol`` and the nested residuals decrease.
    eventually_semistable : bool
    t, log_values : ndarray
        The tail samples, kept for limit charges.
    alpha_half : complex
        Coefficient of ``t**(1/2)``; zero unless fitted with ``sqrt_term``.
    """

    object_label: str
    class_v: np.ndarray
    alpha: complex
    gamma: complex
    beta: complex
    residual_sup: float
    nested_residuals: tuple
    accepted: bool
    eventually_semistable: bool = True
    t: np.ndarray = field(default=None, repr=False)
    log_values: np.ndarray = field(default=None, repr=False)
    reason: str = ""
    alpha_half: complex = 0j


def _design(t, correction_order, sqrt_term=False):
    cols = [t, np.log(t), np.ones_like(t)]
    if sqrt_term:
        cols.append(np.sqrt(t))
    cols += [t ** -float(j) for j in range(1, correction_order + 1)]
    return np.stack(cols, axis=1)


def _tail_fit(t, logz, correction_order, sqrt_term=False):
    design = _design(t, correction_order, sqrt_term).astype(complex)
    coef, *_ = np.linalg.lstsq(design, logz, rcond=None)
    lead = design[:, :4 if sqrt_term else 3] @ coef[:4 if sqrt_term else 3]
    return coef, float(np.max(np.abs(logz - lead)))


def fit_asymptotics(series, fit_tol=DEFAULT_FIT_TOL, correction_order=2, sqrt_term=False):
    """Fit the asymptotic form of ``log Z_t`` for one object.

    Parameters
    ----------
    series : ChargeSeries
        At least 20 samples on a geometric grid with ``t1/t0 >= 10``.
    fit_tol : float
        Acceptance threshold for ``residual_sup``.
    correction_order : int
        Number of ``t**-j`` columns added to the least-squares basis so
        that the ``o(1)`` part does not bias ``(alpha, gamma, beta)``.  With
        0 the basis is exactly ``{t, ln t, 1}``.
    sqrt_term : bool
        Add ``t**(1/2)`` to the leading form, for equations whose
        asymptotic spectrum may be ramified of order 2.

    Returns
    -------
    AsymptoticFit

    Raises
    ------
    NotEventuallyNonzeroError
        If the charges vanish on the tail.
    """
    t = np.asarray(series.t, dtype=float)
    if t.size < 20 or t[-1] / t[0] < 10:
        raise InputError("fit needs >= 20 samples with t1/t0 >= 10")
    half = t.size // 2
    tail = ChargeSeries(series.label, series.class_v, t[half:], np.asarray(series.values)[half:],
                        None if series.log_scale is None else np.asarray(series.log_scale)[half:],
                        series.eventually_semistable)
    logz = tail.log_lift()
    tt = tail.t
    coef, resid = _tail_fit(tt, logz, correction_order, sqrt_term)
    nested = [resid]
    for frac in TAIL_FRACTIONS[1:]:
        # fraction of the full grid -> offset into the tail half
        sub = slice(int(round(tt.size * (frac - 0.5) / 0.5)), None)
        if tt[sub].size < correction_order + 4:
            break
        nested.append(_tail_fit(tt[sub], logz[sub], correction_order, sqrt_term)[1])
    noise = 1e-9 * (1.0 + float(np.max(np.abs(logz))))
    decreasing = all(b <= a + noise for a, b in zip(nested, nested[1:]))
    accepted = resid < fit_tol and decreasing
    reason = "" if accepted else (
        f"residual {resid:.3g} >= fit_tol {fit_tol:.3g}" if resid >= fit_tol
        else "residuals do not decrease on nested tails: not quasi-convergent for this object")
    return AsymptoticFit(
        object_label=series.label, class_v=np.asarray(series.class_v, dtype=np.complex128),
        alpha=complex(coef[0]), gamma=complex(coef[1]), beta=complex(coef[2]),
        residual_sup=resid, nested_residuals=tuple(nested), accepted=accepted,
        eventually_semistable=series.eventually_semistable, t=tt, log_values=logz,
        reason=reason, alpha_half=complex(coef[3]) if sqrt_term else 0j,
    )


@dataclass(frozen=True)
class Cluster:
    """Objects sharing a growth exponent.

    ``limit_charges`` and ``basis`` are filled in by :func:`build_sod`.
    """

    alpha: complex
    members: tuple
    basis: np.ndarray = None
    limit_charges: tuple = None

    @property
    def gamma(self):
        return complex(np.mean([m.gamma for m in self.members]))

    @property
    def labels(self):
        return [m.object_label for m in self.members]


@dataclass(frozen=True)
class LatticeCheck:
    """Independence of the summands.

    Independence is tested over the complex numbers, which implies it over
    the rationals.  ``method`` is ``exact`` for Gaussian-rational data and
    ``svd`` otherwise.
    """

    independent: bool
    rank: int
    method: str
    determinant: complex = None


@dataclass(frozen=True)
class SODResult:
    """Ordered clusters with lattice data."""

    clusters: tuple
    lattice: LatticeCheck = None
    genericity: str = "ok"

    @property
    def alphas(self):
        return [c.alpha for c in self.clusters]


def cluster_and_order(fits, tol=DEFAULT_CLUSTER_TOL):
    """Group fits by exponent and order the groups by ``Im alpha``.

    Exponents within ``tol`` in both real and imaginary part are merged
    (transitively) and represented by their mean.

    Raises
    ------
    InputError
        If a fit was not accepted.
    GenericityError
        If two clusters have ``|Im (a - b)| <= tol`` but ``|Re (a - b)| > tol``.
    """
    fits = list(fits)
    for f in fits:
        if not f.accepted:
            raise InputError(f"fit for {f.object_label} was not accepted: {f.reason}")
    n = len(fits)
    parent = list(range(n))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            d = fits[i].alpha - fits[j].alpha
            if abs(d.real) <= tol and abs(d.imag) <= tol:
                parent[root(i)] = root(j)
    groups = {}
    for i in range(n):
        groups.setdefault(root(i), []).append(fits[i])
    clusters = [Cluster(alpha=complex(np.mean([m.alpha for m in g])), members=tuple(g))
                for g in groups.values()]
    for i, ci in enumerate(clusters):
        for cj in clusters[i + 1:]:
            d = ci.alpha - cj.alpha
            if abs(d.imag) <= tol:
                raise GenericityError(
                    f"exponents {ci.alpha:.6g} ({', '.join(ci.labels)}) and {cj.alpha:.6g} "
                    f"({', '.join(cj.labels)}) share Im alpha but differ in Re alpha")
    clusters.sort(key=lambda c: c.alpha.imag)
    return SODResult(clusters=tuple(clusters))


def _gaussian_rational(m):
    """Real and imaginary parts as Fraction matrices, or None for non-rational data.

    Only small denominators are accepted, so floats such as ``2 pi`` are
    not mistaken for rationals.
    """
    parts = []
    for arr in (m.real, m.imag):
        rows = []
        for row in arr:
            new = []
            for x in row:
                frac = Fraction(float(x)).limit_denominator(10 ** 4)
                if abs(float(frac) - x) > 1e-12 * max(1.0, abs(x)):
                    return None
                new.append(frac)
            rows.append(new)
        parts.append(rows)
    return parts


def rational_rank(rows):
    """Rank of a list of Fraction vectors (exact Gaussian elimination)."""
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col] / rows[rank][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def class_rank(vectors):
    """Complex rank of a family of classes and the method used.

    Gaussian-rational data is ranked exactly: a complex matrix ``A + iB``
    has half the real rank of ``[[A, -B], [B, A]]``.  Other data uses the
    singular values with a relative floor of ``1e-8``.

    Returns
    -------
    (int, str)
    """
    m = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
    if m.size == 0:
        return 0, "exact"
    exact = _gaussian_rational(m)
    if exact is not None:
        re, im = exact
        realified = [a + [-x for x in b] for a, b in zip(re, im)]
        realified += [b + a for a, b in zip(re, im)]
        return rational_rank(realified) // 2, "exact"
    s = np.linalg.svd(m, compute_uv=False)
    return (int(np.sum(s > RANK_FLOOR * s[0])) if s[0] > 0 else 0), "svd"


def richardson_limit(t, values):
    """Limit as ``t -> inf`` of samples quadratic in ``h = 1/t`` (three points)."""
    h = 1.0 / np.asarray(t, dtype=float)
    coef = np.polyfit(h, np.asarray(values, dtype=np.complex128), 2)
    return complex(coef[-1])


def limit_charge(fit):
    """``lim exp(-alpha t) t^(-gamma) Z_t`` from the three largest samples.

    The member's own fitted ``alpha`` and ``gamma`` are used.
    """
    t = fit.t[-3:]
    vals = np.exp(fit.log_values[-3:] - fit.alpha * t - fit.alpha_half * np.sqrt(t)
                  - fit.gamma * np.log(t))
    return richardson_limit(t, vals)


def build_sod(skeleton, samples=None):
    """Attach lattice summands and limit charges to clustered fits.

    Parameters
    ----------
    skeleton : SODResult
        Output of :func:`cluster_and_order`.
    samples : dict, optional
        ``label -> ChargeSeries`` overriding the samples stored in the fits.

    Raises
    ------
    NumericalError
        If the member classes of different clusters are dependent, or a
        limit charge vanishes or diverges.
    """
    clusters = []
    all_basis = []
    for c in skeleton.clusters:
        members = c.members
        if samples:
            members = tuple(fit_asymptotics(samples[m.object_label]) if m.object_label in samples
                            else m for m in members)
        basis = []
        for m in members:
            trial = basis + [m.class_v]
            if class_rank(trial)[0] == len(trial):
                basis = trial
        limits = []
        for m in members:
            z = limit_charge(m)
            if not np.isfinite(z) or z == 0:
                raise NumericalError(f"limit charge of {m.object_label} is {z}")
            limits.append(z)
        clusters.append(Cluster(alpha=c.alpha, members=members, basis=np.array(basis),
                                limit_charges=tuple(limits)))
        all_basis.extend(basis)
    rank, method = class_rank(all_basis)
    if rank < len(all_basis):
        raise NumericalError("classes of different clusters are dependent: not a direct sum")
    det = None
    mat = np.array(all_basis)
    if mat.shape[0] == mat.shape[1]:
        det = complex(np.linalg.det(mat.T))
    lattice = LatticeCheck(independent=True, rank=rank, method=method, determinant=det)
    return SODResult(clusters=tuple(clusters), lattice=lattice, genericity=skeleton.genericity)


def extract_sod(series_list, fit_tol=DEFAULT_FIT_TOL, cluster_tol=DEFAULT_CLUSTER_TOL,
                correction_order=2, sqrt_term=False):
    """Fit, cluster and build in one call, using only eventually semistable series."""
    fits = [fit_asymptotics(s, fit_tol=fit_tol, correction_order=correction_order,
                            sqrt_term=sqrt_term)
            for s in series_list if s.eventually_semistable]
    return build_sod(cluster_and_order(fits, tol=cluster_tol))


def phase_order_witness(sod, phases):
    """Whether later clusters have larger phase than earlier ones on the whole tail.

    The computable shadow of the vanishing of backward maps.

    Parameters
    ----------
    sod : SODResult
    phases : dict
        ``label -> (t, phase)`` with phases lifted consistently across
        objects, e.g. from :func:`stabpath.stab_p1.path_phases`.  Separate
        log-lifts of each charge are not enough: each is fixed only up to
        a multiple of 2 pi.
    """
    for i, later in enumerate(sod.clusters):
        for earlier in sod.clusters[:i]:
            for e in later.members:
                for f in earlier.members:
                    te, pe = phases[e.object_label]
                    tf, pf = phases[f.object_label]
                    common, ie, jf = np.intersect1d(te, tf, return_indices=True)
                    tail = common >= min(e.t[0], f.t[0])
                    if not np.all(pe[ie][tail] > pf[jf][tail]):
                        return False
    return True


@dataclass(frozen=True)
class SpanningReport:
    """Comparison of a growth filtration piece with semistable classes.

    Attributes
    ----------
    r : float
    dim_f : int
        Number of exponents (with multiplicity) with real part ``<= r``.
    dim_f_measured : int
        Rank of candidate classes whose measured growth is ``<= r``; a lower
        bound for ``dim_f``.
    dim_span : int
        Rank of the classes of eventually semistable objects with
        ``Re alpha <= r`` and ``|Z_t| / ||Phi_t v||`` bounded below.
    status : str
        ``holds`` or ``deficient``.
    """

    r: float
    dim_f: int
    dim_f_measured: int
    dim_span: int
    status: str


def spanning_check(solution, fits, r, tol=1e-3, rate_tol=5e-2):
    """Check that semistable classes span the piece ``F^r`` of the growth filtration.

    Parameters
    ----------
    solution : FundamentalSolution
        Must carry ``exponents``.  Norms and charges are read from the same
        solution, so the gauge (raw or modified) cancels in their ratio.
    fits : list of AsymptoticFit
    r : float
    tol : float
        Slack for comparing exponents with ``r``.
    rate_tol : float
        Slack for measured growth rates, which carry polynomial corrections.
    """
    if solution.exponents is None:
        raise InputError("solution has no exponents")
    dim_f = int(np.sum(np.real(solution.exponents) <= r + tol))
    t = solution.t

    def measured_rate(v):
        return growth_rate(t=t, log_abs=solution.log_norms(v)).rate

    candidates = list(np.eye(solution.n, dtype=np.complex128)) + [f.class_v for f in fits]
    slow = [v for v in candidates if measured_rate(v) <= r + rate_tol]
    dim_measured = class_rank(slow)[0] if slow else 0

    spanning = []
    half = t.size // 2
    for f in fits:
        if not (f.eventually_semistable and f.accepted and f.alpha.real <= r + tol):
            continue
        z, scale = solution.charges(f.class_v)
        vec, vscale = solution.apply(f.class_v)
        with np.errstate(divide="ignore"):
            log_ratio = (np.log(np.abs(z)) + scale) - (np.log(np.linalg.norm(vec, axis=1)) + vscale)
        if np.min(log_ratio[half:]) > math.log(RATIO_FLOOR):
            spanning.append(f.class_v)
    dim_span = class_rank(spanning)[0] if spanning else 0
    status = "holds" if dim_span == dim_f else "deficient"
    return SpanningReport(r=float(r), dim_f=dim_f, dim_f_measured=dim_measured,
                          dim_span=dim_span, status=status)


def _cplx(z):
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def sod_to_dict(sod, spanning=()):
    """Report in the documented JSON layout."""
    clusters = []
    for c in sod.clusters:
        members = []
        for m, z in zip(c.members, c.limit_charges or [None] * len(c.members)):
            members.append({
                "label": m.object_label,
                "class": [_cplx(x) for x in m.class_v],
                "beta": _cplx(m.beta),
                "limit_Z": None if z is None else _cplx(z),
                "residual_sup": float(m.residual_sup),
            })
        clusters.append({"alpha": _cplx(c.alpha), "gamma": _cplx(c.gamma), "members": members})
    lattice = None
    if sod.lattice is not None:
        lattice = {
            "independent": sod.lattice.independent,
            "rank": sod.lattice.rank,
            "method": sod.lattice.method,
            "determinant": None if sod.lattice.determinant is None
            else _cplx(sod.lattice.determinant),
        }
    return {
        "clusters": clusters,
        "lattice_check": lattice,
        "genericity": sod.genericity,
        "spanning": [{"r": s.r, "dim_F": s.dim_f, "dim_span": s.dim_span, "status": s.status}
                     for s in spanning],
    }
