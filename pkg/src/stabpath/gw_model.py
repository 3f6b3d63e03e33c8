"""Cohomological data of a target space and its truncated quantum endomorphism.

A :class:`CohModel` is a finite description of the algebraic cohomology of
a smooth projective variety: a graded basis, the Poincare pairing, cup
product with the first Chern class and a list of curve classes, each with
its intersection numbers and two-point Gromov-Witten operator ``T_d``.

Matrices act on column vectors of basis coordinates and are stored exactly
as tuples of :class:`fractions.Fraction`; they are converted to floating
point only when an endomorphism is assembled.

Examples
--------
>>> model = builtin_p1(0)
>>> truncated_endomorphism(model, TruncationParams(z=1.0), 1.0).real
array([[0., 2.],
       [2., 0.]])
"""

from dataclasses import dataclass, field
from fractions import Fraction
import cmath
import json
import math

import numpy as np

from .errors import InputError

Matrix = tuple  # tuple of row tuples of Fraction


def exact_matrix(rows):
    """Convert nested sequences of ints, Fractions or ``[num, den]`` pairs."""
    out = []
    for row in rows:
        new = []
        for x in row:
            if isinstance(x, (list, tuple)):
                if len(x) != 2 or x[1] == 0:
                    raise InputError(f"bad rational entry {x!r}")
                new.append(Fraction(int(x[0]), int(x[1])))
            elif isinstance(x, float):
                new.append(Fraction(x).limit_denominator(10 ** 12))
            else:
                new.append(Fraction(x))
        out.append(tuple(new))
    n = len(out)
    if any(len(r) != n for r in out):
        raise InputError("matrix must be square")
    return tuple(out)


def to_array(m):
    """Exact matrix to a complex ndarray."""
    return np.array([[float(x) for x in row] for row in m], dtype=np.complex128)


def _mul(a, b):
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
                 for i in range(n))


def _transpose(a):
    return tuple(zip(*a))


def _is_zero(a):
    return all(x == 0 for row in a for x in row)


def exact_det(m):
    """Determinant by fraction-exact Gaussian elimination."""
    a = [list(row) for row in m]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


@dataclass(frozen=True)
class CurveClass:
    """A relative curve class with intersection data.

    Attributes
    ----------
    label : str
    c1_dot_d : int
        First Chern class of the target paired with the curve.
    omega_dot_d : float
        Kahler class paired with the curve, nonnegative.
    b_dot_d : float
        B-field paired with the curve.
    t_d : tuple
        Exact matrix of the two-point operator in the model basis.
    """

    label: str
    c1_dot_d: int
    omega_dot_d: float
    b_dot_d: float
    t_d: Matrix


@dataclass(frozen=True)
class CohModel:
    """Finite model of the algebraic cohomology of a target.

    Attributes
    ----------
    dim_x : int
        Complex dimension.
    basis : tuple of (str, int)
        Labels with even cohomological degrees.
    pairing, c1_cup, mu : tuple
        Exact square matrices.  ``mu`` is diagonal.
    curve_classes : tuple of CurveClass
    name : str
    """

    dim_x: int
    basis: tuple
    pairing: Matrix
    c1_cup: Matrix
    mu: Matrix
    curve_classes: tuple = field(default_factory=tuple)
    name: str = "custom"

    @property
    def rank(self):
        return len(self.basis)

    @property
    def degrees(self):
        return tuple(deg for _, deg in self.basis)

    def unit_covector(self):
        """Row vector ``u`` with ``u @ v`` the integral of ``v``.

        The integral pairs ``v`` with the unit class, i.e. the basis vector
        of degree 0.
        """
        unit = [i for i, d in enumerate(self.degrees) if d == 0]
        if len(unit) != 1:
            raise InputError("model needs exactly one basis vector of degree 0")
        e = np.zeros(self.rank, dtype=np.complex128)
        e[unit[0]] = 1.0
        return to_array(self.pairing).T @ e


@dataclass(frozen=True)
class TruncationParams:
    """Parameters of the truncated equation.

    Attributes
    ----------
    z : complex
        Nonzero scalar in front of the endomorphism.
    scale_omega : float
        Positive multiplier applied to every ``omega_dot_d``.
    """

    z: complex
    scale_omega: float = 1.0

    def __post_init__(self):
        if complex(self.z) == 0:
            raise InputError("z must be nonzero")
        if not self.scale_omega > 0:
            raise InputError("scale_omega must be positive")


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_model`; ``violations`` lists failed checks."""

    violations: tuple

    @property
    def ok(self):
        return not self.violations


def _degree_violations(m, degrees, shift):
    """Entries of ``m`` that do not map degree d to degree d + shift."""
    bad = []
    for i, row in enumerate(m):
        for j, x in enumerate(row):
            if x != 0 and degrees[i] != degrees[j] + shift:
                bad.append((i, j))
    return bad


def validate_model(model):
    """Check the structural invariants of a model.

    Returns
    -------
    ValidationReport
        Empty when the model passes.  Each violation is a short string
        naming the failed invariant.
    """
    v = []
    n = model.rank
    p = model.pairing
    deg = model.degrees
    for name, m in (("pairing", p), ("c1_cup", model.c1_cup), ("mu", model.mu)):
        if len(m) != n:
            v.append(f"{name}: expected {n}x{n} matrix")
    if v:
        return ValidationReport(tuple(v))
    if any(d % 2 for d in deg):
        v.append("basis: degrees must be even")
    if p != _transpose(p):
        v.append("pairing: not symmetric")
    if exact_det(p) == 0:
        v.append("pairing: degenerate")

    mu = model.mu
    if any(mu[i][j] != 0 for i in range(n) for j in range(n) if i != j):
        v.append("mu: not diagonal")
    if any((2 * mu[i][i]).denominator != 1 for i in range(n)):
        v.append("mu: entries are not half-integers")
    if any(mu[i][i] != Fraction(deg[i] - model.dim_x, 2) for i in range(n)):
        v.append("mu: does not match (deg - dim)/2")
    lhs = _mul(_transpose(mu), p)
    rhs = _mul(p, mu)
    if any(lhs[i][j] != -rhs[i][j] for i in range(n) for j in range(n)):
        v.append("mu: not anti-symmetric for the pairing")

    c1 = model.c1_cup
    if _degree_violations(c1, deg, 2):
        v.append("c1_cup: does not raise degree by 2")
    if _mul(p, c1) != _mul(_transpose(c1), p):
        v.append("c1_cup: not self-adjoint for the pairing")

    labels = set()
    for cc in model.curve_classes:
        if cc.label in labels:
            v.append(f"curve {cc.label}: duplicate label")
        labels.add(cc.label)
        t = cc.t_d
        if len(t) != n:
            v.append(f"curve {cc.label}: T_d has wrong size")
            continue
        if cc.omega_dot_d < 0:
            v.append(f"curve {cc.label}: omega.d is negative")
        if _mul(p, t) != _mul(_transpose(t), p):
            v.append(f"curve {cc.label}: T_d not symmetric for the pairing")
        if _degree_violations(t, deg, 2 * (1 - cc.c1_dot_d)):
            v.append(f"curve {cc.label}: T_d not homogeneous of degree 2(1 - c1.d)")
        window = 1 - model.dim_x <= cc.c1_dot_d <= model.dim_x + 1
        if not window and not _is_zero(t):
            v.append(f"curve {cc.label}: T_d nonzero outside the degree window")
    return ValidationReport(tuple(v))


def admissible_classes(model, params):
    """Curve classes contributing to the truncated endomorphism.

    A class contributes when ``c1.d - r*omega.d > 0`` and ``T_d != 0``.

    Raises
    ------
    InputError
        If a class with ``T_d != 0`` has ``c1.d > dim + 1``.
    """
    r = params.scale_omega
    out = []
    for cc in model.curve_classes:
        if _is_zero(cc.t_d):
            continue
        if cc.c1_dot_d > model.dim_x + 1:
            raise InputError(
                f"curve {cc.label}: c1.d = {cc.c1_dot_d} > dim + 1 with T_d != 0")
        if cc.c1_dot_d - r * cc.omega_dot_d > 0:
            assert r * cc.omega_dot_d < cc.c1_dot_d <= model.dim_x + 1
            out.append(cc)
    return out


def truncated_endomorphism(model, params, u):
    """``c1 + sum_d (c1.d) u^(c1.d) exp(-(r omega.d + i B.d)) T_d``.

    Parameters
    ----------
    model : CohModel
    params : TruncationParams
    u : complex

    Returns
    -------
    ndarray
        Complex square matrix.
    """
    out = to_array(model.c1_cup)
    u = complex(u)
    for cc in admissible_classes(model, params):
        weight = cmath.exp(-(params.scale_omega * cc.omega_dot_d + 1j * cc.b_dot_d))
        out = out + cc.c1_dot_d * u ** cc.c1_dot_d * weight * to_array(cc.t_d)
    return out


def endomorphism_terms(model, params):
    """Decompose ``E(u) = sum_k C_k u^p_k`` by power.

    Returns
    -------
    list of (int, ndarray)
        Pairs ``(p, C)`` with distinct powers, ``p = 0`` first.
    """
    terms = {0: to_array(model.c1_cup)}
    for cc in admissible_classes(model, params):
        weight = cmath.exp(-(params.scale_omega * cc.omega_dot_d + 1j * cc.b_dot_d))
        term = cc.c1_dot_d * weight * to_array(cc.t_d)
        terms[cc.c1_dot_d] = terms.get(cc.c1_dot_d, 0) + term
    return sorted(terms.items())


_BASIS_CURVE = (("1", 0), ("H", 2))
_PAIRING_CURVE = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
_MU_CURVE = ((Fraction(-1, 2), Fraction(0)), (Fraction(0), Fraction(1, 2)))


def builtin_p1(a=0):
    """The projective line with Kahler parameter ``psi = 2aH``.

    The single curve class (the line) has ``c1.d = 2``, ``omega.d = 2 Re a``
    and ``B.d = 2 Im a``, so that ``E(u) = [[0, 2 exp(-2a) u^2], [2, 0]]``.
    """
    a = complex(a)
    if a.real < 0:
        raise InputError("Re a must be nonnegative (omega.d >= 0)")
    line = CurveClass(
        label="line",
        c1_dot_d=2,
        omega_dot_d=2.0 * a.real,
        b_dot_d=2.0 * a.imag,
        t_d=((Fraction(0), Fraction(1)), (Fraction(0), Fraction(0))),
    )
    return CohModel(
        dim_x=1,
        basis=_BASIS_CURVE,
        pairing=_PAIRING_CURVE,
        c1_cup=((Fraction(0), Fraction(0)), (Fraction(2), Fraction(0))),
        mu=_MU_CURVE,
        curve_classes=(line,),
        name="p1",
    )


def builtin_curve(genus):
    """A smooth curve of the given genus; genus 0 gives :func:`builtin_p1`."""
    genus = int(genus)
    if genus < 0:
        raise InputError("genus must be nonnegative")
    if genus == 0:
        return builtin_p1(0)
    return CohModel(
        dim_x=1,
        basis=_BASIS_CURVE,
        pairing=_PAIRING_CURVE,
        c1_cup=((Fraction(0), Fraction(0)), (Fraction(2 - 2 * genus), Fraction(0))),
        mu=_MU_CURVE,
        curve_classes=(),
        name=f"curve_g{genus}",
    )


def p1_params(b=0.0):
    """Truncation parameters ``z = exp(-b)`` for the projective line."""
    return TruncationParams(z=cmath.exp(-complex(b)))


def _frac_json(m):
    return [[[x.numerator, x.denominator] for x in row] for row in m]


def model_to_dict(model):
    """Serialise to the model-file layout."""
    return {
        "name": model.name,
        "dim_x": model.dim_x,
        "basis": [{"label": lab, "deg": d} for lab, d in model.basis],
        "pairing": _frac_json(model.pairing),
        "c1_cup": _frac_json(model.c1_cup),
        "mu_diag": [[model.mu[i][i].numerator, model.mu[i][i].denominator]
                    for i in range(model.rank)],
        "curve_classes": [
            {
                "label": cc.label,
                "c1_dot_d": cc.c1_dot_d,
                "omega_dot_d": cc.omega_dot_d,
                "b_dot_d": cc.b_dot_d,
                "t_d": _frac_json(cc.t_d),
            }
            for cc in model.curve_classes
        ],
    }


def model_from_dict(data):
    """Build a model from the model-file layout.

    Raises
    ------
    InputError
        On missing fields or malformed entries.
    """
    from .schemas import validate_document

    validate_document(data, "model")
    n = len(data["basis"])
    mu_diag = [exact_matrix([[x]])[0][0] for x in data["mu_diag"]]
    if len(mu_diag) != n:
        raise InputError("mu_diag has wrong length")
    mu = tuple(tuple(mu_diag[i] if i == j else Fraction(0) for j in range(n))
               for i in range(n))
    curves = []
    for cc in data.get("curve_classes", []):
        omega = float(cc["omega_dot_d"])
        bdot = float(cc["b_dot_d"])
        if not (math.isfinite(omega) and math.isfinite(bdot)):
            raise InputError(f"curve {cc['label']}: non-finite intersection number")
        curves.append(CurveClass(
            label=str(cc["label"]),
            c1_dot_d=int(cc["c1_dot_d"]),
            omega_dot_d=omega,
            b_dot_d=bdot,
            t_d=exact_matrix(cc["t_d"]),
        ))
    return CohModel(
        dim_x=int(data["dim_x"]),
        basis=tuple((str(b["label"]), int(b["deg"])) for b in data["basis"]),
        pairing=exact_matrix(data["pairing"]),
        c1_cup=exact_matrix(data["c1_cup"]),
        mu=mu,
        curve_classes=tuple(curves),
        name=str(data.get("name", "custom")),
    )


def load_model(path):
    """Read a model file (JSON)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)


def resolve_model(source, a=0):
    """Builtin name (``p1``, ``curve_g<g>``) or a path to a model file."""
    if source == "p1":
        return builtin_p1(a)
    if source.startswith("curve_g"):
        try:
            return builtin_curve(int(source[len("curve_g"):]))
        except ValueError as exc:
            raise InputError(f"bad builtin name {source!r}") from exc
    return load_model(source)
