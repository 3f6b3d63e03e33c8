"""Small dense complex linear algebra.

Thin, validated wrappers over LAPACK (through numpy and scipy) for the
handful of operations the solvers need: eigen-decomposition with
semisimplicity detection, the spectral norm and matrix powers ``t**M``.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from .errors import InputError, NumericalError

DEFAULT_TOL = 1e-9
GROUP_GAP = 1e-7


def complex_matrix(m):
    """Return ``m`` as a square, finite complex ndarray.

    Raises
    ------
    InputError
        If ``m`` is not square or has non-finite entries.
    """
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with multiplicity and a basis of generalized eigenvectors.

    Attributes
    ----------
    eigenvalues : ndarray
        Length n, sorted by (real part, imaginary part), grouped values
        replaced by their mean.
    eigenvectors : ndarray
        Columns span the generalized eigenspaces, in eigenvalue order.
    is_semisimple : bool
    distinct_real_parts : bool
        Distinct eigenvalues have pairwise distinct real parts.
    distinct_imag_parts : bool
        Distinct eigenvalues have pairwise distinct imaginary parts.
    multiplicities : tuple of int
        Multiplicity of each distinct eigenvalue, in order.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    is_semisimple: bool
    distinct_real_parts: bool
    distinct_imag_parts: bool
    multiplicities: tuple

    def distinct(self):
        """Distinct eigenvalues in order."""
        out = []
        i = 0
        for mult in self.multiplicities:
            out.append(self.eigenvalues[i])
            i += mult
        return np.array(out)


def _group(values, scale):
    """Group eigenvalues closer than GROUP_GAP relative to ``scale``."""
    order = np.lexsort((values.imag, values.real))
    groups = []
    for idx in order:
        for g in groups:
            if abs(values[idx] - np.mean(values[g])) <= GROUP_GAP * scale:
                g.append(idx)
                break
        else:
            groups.append([idx])
    groups.sort(key=lambda g: (round(np.mean(values[g]).real, 12), np.mean(values[g]).imag))
    return groups


def _nullspace(a, dim):
    _, _, vh = np.linalg.svd(a)
    return vh[-dim:].conj().T


def eigen(m, tol=DEFAULT_TOL):
    """Eigen-decomposition with multiplicity grouping.

    Parameters
    ----------
    m : array_like
        Square matrix, n <= 64.
    tol : float
        Residual and distinctness tolerance relative to ``||m||``.

    Returns
    -------
    Spectrum

    Raises
    ------
    NumericalError
        If LAPACK does not converge or a residual check fails.
    """
    a = complex_matrix(m)
    n = a.shape[0]
    if n > 64:
        raise InputError("eigen supports n <= 64")
    norm = op_norm(a) if n else 0.0
    scale = max(norm, 1.0)
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from exc

    groups = _group(vals, scale)
    eigenvalues = []
    columns = []
    mults = []
    semisimple = True
    ident = np.eye(n)
    for g in groups:
        lam = complex(np.mean(vals[g]))
        k = len(g)
        shifted = a - lam * ident
        sv = np.linalg.svd(shifted, compute_uv=False)
        geometric = int(np.sum(sv <= max(1e3 * tol, 1e-7) * scale))
        if geometric < k:
            semisimple = False
            block = _nullspace(np.linalg.matrix_power(shifted, k), k)
        else:
            block = _nullspace(shifted, k)
            resid = np.linalg.norm(shifted @ block, axis=0)
            if np.any(resid > tol * scale):
                raise NumericalError(
                    f"eigenvector residual {resid.max():.3e} exceeds {tol:g}*||M||")
        eigenvalues.extend([lam] * k)
        columns.append(block)
        mults.append(k)

    vecs_out = np.hstack(columns) if columns else np.zeros((0, 0), complex)
    if n and np.linalg.cond(vecs_out) > 1e12:
        raise NumericalError("generalized eigenvector basis is singular")

    distinct = [eigenvalues[sum(mults[:i])] for i in range(len(mults))]
    re_ok = all(abs(p.real - q.real) > tol * scale
                for i, p in enumerate(distinct) for q in distinct[i + 1:])
    im_ok = all(abs(p.imag - q.imag) > tol * scale
                for i, p in enumerate(distinct) for q in distinct[i + 1:])
    return Spectrum(
        eigenvalues=np.array(eigenvalues, dtype=np.complex128),
        eigenvectors=vecs_out,
        is_semisimple=semisimple,
        distinct_real_parts=re_ok,
        distinct_imag_parts=im_ok,
        multiplicities=tuple(mults),
    )


def op_norm(m):
    """Spectral norm (largest singular value)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def mat_pow_t(m, t):
    """Return ``t**m = exp(ln(t) m)``.

    Nilpotent matrices with ``m @ m == 0`` take the exact path
    ``I + ln(t) m``; everything else goes through scaling and squaring.

    Raises
    ------
    InputError
        If ``t <= 0``.
    NumericalError
        If the result overflows.
    """
    if not t > 0:
        raise InputError(f"mat_pow_t needs t > 0, got {t!r}")
    a = complex_matrix(m)
    lt = math.log(t)
    ident = np.eye(a.shape[0], dtype=np.complex128)
    if not np.any(a @ a):
        return ident + lt * a
    exponent = lt * op_norm(a)
    if exponent > 700:
        raise NumericalError(f"t**M overflows: ln(t)*||M|| = {exponent:.1f}")
    out = scipy.linalg.expm(lt * a)
    if not np.all(np.isfinite(out)):
        raise NumericalError(f"t**M overflows: ln(t)*||M|| = {exponent:.1f}")
    return out
