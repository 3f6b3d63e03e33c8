"""Mutations of ordered orthogonal decompositions of a lattice with a pairing.

A decomposition is a list of sublattices ``Lambda_1, ..., Lambda_n`` of
``Z^rank`` that is upper triangular for a non-degenerate (not necessarily
symmetric) pairing ``[u, v) = u^T G v``: ``[Lambda_j, Lambda_i) = 0`` for
``j > i``.  Adjacent summands can be mutated past each other:

    left at i:   (e, f) -> (f - [e, f) e, e)
    right at i:  (e, f) -> (f, e - [e, f) f)

for rank-one summands generated by ``e, f`` with ``[e, e) = [f, f) = 1``.
All arithmetic is exact on Python integers.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
import json

from .errors import InputError


class MutationError(InputError):
    """A mutation is unsupported or breaks triangularity."""


def _ivec(v):
    out = []
    for x in v:
        if isinstance(x, bool) or int(x) != x:
            raise InputError(f"lattice vectors must be integral, got {v!r}")
        out.append(int(x))
    return tuple(out)


def pairing(gram, u, v):
    """``u^T G v`` in exact arithmetic."""
    return sum(u[i] * gram[i][j] * v[j] for i in range(len(u)) for j in range(len(v)) if u[i] and v[j])


def exact_det(rows):
    """Determinant of a square integer matrix with Fractions."""
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return int(det) if det.denominator == 1 else det


def _solve(mat, rhs):
    """Solve ``mat x = rhs`` exactly; ``mat`` must be invertible."""
    n = len(mat)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(mat, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise MutationError("block Gram matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] / aug[col][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][n] / aug[r][r] for r in range(n)]


@dataclass(frozen=True)
class PairedLattice:
    """An ordered decomposition of a paired lattice.

    Attributes
    ----------
    gram : tuple of tuple of int
        ``G[i][j] = [e_i, e_j)``.
    summands : tuple of tuple of vectors
        Bases of the summands, in order.
    history : tuple of str
        Braid letters applied so far, ``L<i>`` or ``R<i>``.
    """

    gram: tuple
    summands: tuple
    history: tuple = field(default=())

    @property
    def rank(self):
        return len(self.gram)

    def block_gram(self, i, j):
        """``[Lambda_i, Lambda_j)`` as a matrix (0-based indices)."""
        return [[pairing(self.gram, u, v) for v in self.summands[j]] for u in self.summands[i]]

    def basis(self):
        return [v for block in self.summands for v in block]

    def span_determinant(self):
        """Determinant of the concatenated bases, or None if they are not square."""
        vecs = self.basis()
        if len(vecs) != self.rank:
            return None
        return exact_det(vecs)

    def triangularity_violations(self):
        """Pairs ``(j, i)`` with ``j > i`` and ``[Lambda_j, Lambda_i) != 0`` (1-based)."""
        bad = []
        for i in range(len(self.summands)):
            for j in range(i + 1, len(self.summands)):
                if any(x != 0 for row in self.block_gram(j, i) for x in row):
                    bad.append((j + 1, i + 1))
        return bad

    def to_dict(self):
        return {
            "rank": self.rank,
            "gram": [list(r) for r in self.gram],
            "summands": [[list(v) for v in block] for block in self.summands],
            "history": list(self.history),
        }


def make_lattice(gram, summands, history=()):
    """Validated :class:`PairedLattice`.

    Raises
    ------
    InputError
        For a degenerate Gram matrix, malformed vectors, or a decomposition
        that is not block upper triangular.
    """
    gram = tuple(_ivec(r) for r in gram)
    n = len(gram)
    if n == 0 or any(len(r) != n for r in gram):
        raise InputError("gram must be a non-empty square matrix")
    if exact_det(gram) == 0:
        raise InputError("gram is degenerate")
    blocks = []
    for block in summands:
        vecs = tuple(_ivec(v) for v in block)
        if not vecs or any(len(v) != n for v in vecs):
            raise InputError("each summand needs at least one vector of length rank")
        blocks.append(vecs)
    dec = PairedLattice(gram=gram, summands=tuple(blocks), history=tuple(history))
    bad = dec.triangularity_violations()
    if bad:
        raise InputError(f"decomposition is not upper triangular at blocks {bad}")
    total = len(dec.basis())
    if total > n:
        raise InputError("summand bases have more vectors than the rank")
    return dec


def lattice_from_dict(doc):
    from .schemas import validate_document

    validate_document(doc, "decomposition")
    if doc["rank"] != len(doc["gram"]):
        raise InputError("rank does not match the Gram matrix")
    return make_lattice(doc["gram"], doc["summands"], doc.get("history", ()))


def load_lattice(path):
    with open(path, encoding="utf-8") as fh:
        return lattice_from_dict(json.load(fh))


def _check_block(dec, idx, experimental):
    block = dec.summands[idx]
    g = dec.block_gram(idx, idx)
    if len(block) == 1:
        if g[0][0] != 1:
            raise MutationError(f"summand {idx + 1} is not exceptional: [e, e) = {g[0][0]}")
        return g
    if not experimental:
        raise MutationError(
            f"summand {idx + 1} has rank {len(block)}; higher-rank mutations need experimental=True")
    if abs(exact_det(g)) != 1:
        raise MutationError(f"Gram matrix of summand {idx + 1} is not unimodular")
    return g


def _project_out(dec, keep, against, g_against, left):
    """Remove from each vector of ``keep`` its component along ``against``.

    ``left`` selects ``[a, x') = 0`` for all ``a`` in ``against`` (left
    mutation); otherwise ``[x', a) = 0``.
    """
    out = []
    for x in keep:
        if left:
            rhs = [pairing(dec.gram, a, x) for a in against]
            coef = _solve(g_against, rhs)
        else:
            rhs = [pairing(dec.gram, x, a) for a in against]
            coef = _solve([list(col) for col in zip(*g_against)], rhs)
        if any(c.denominator != 1 for c in coef):
            raise MutationError("mutated vector is not integral")
        out.append(tuple(xi - sum(int(c) * a[k] for c, a in zip(coef, against))
                         for k, xi in enumerate(x)))
    return tuple(out)


def mutate(dec, i, direction, experimental=False):
    """Mutate summands ``i`` and ``i+1`` (1-based).

    Parameters
    ----------
    dec : PairedLattice
    i : int
        Position of the first of the two adjacent summands.
    direction : {"left", "right"}
    experimental : bool
        Allow blocks of rank above one with unimodular Gram matrix, using
        the pairing-orthogonal projection.

    Raises
    ------
    MutationError
        For unsupported blocks or if the result is not upper triangular.
    """
    if not 1 <= i < len(dec.summands):
        raise InputError(f"index {i} out of range for {len(dec.summands)} summands")
    a, b = i - 1, i
    g_a = _check_block(dec, a, experimental)
    g_b = _check_block(dec, b, experimental)
    first, second = dec.summands[a], dec.summands[b]
    if direction == "left":
        new_pair = (_project_out(dec, second, first, g_a, left=True), first)
        letter = f"L{i}"
    elif direction == "right":
        new_pair = (second, _project_out(dec, first, second, g_b, left=False))
        letter = f"R{i}"
    else:
        raise InputError(f"direction must be 'left' or 'right', got {direction!r}")
    blocks = list(dec.summands)
    blocks[a:b + 1] = new_pair
    out = PairedLattice(gram=dec.gram, summands=tuple(blocks), history=dec.history + (letter,))
    bad = out.triangularity_violations()
    if bad:
        raise MutationError(f"mutation broke triangularity at blocks {bad}: inconsistent pairing data")
    return out


def parse_word(word):
    """Braid letters from ``["L1", "R2"]``, signed integers or ``"L1 R2"``.

    A positive integer ``i`` is the left mutation at ``i``, ``-i`` the right one.
    """
    if isinstance(word, str):
        word = word.replace(",", " ").split()
    out = []
    for w in word:
        if isinstance(w, int):
            if w == 0:
                raise InputError("0 is not a braid letter")
            out.append(("left" if w > 0 else "right", abs(w)))
            continue
        w = str(w).strip().upper()
        if len(w) < 2 or w[0] not in "LR" or not w[1:].isdigit():
            raise InputError(f"bad braid letter {w!r}")
        out.append(("left" if w[0] == "L" else "right", int(w[1:])))
    return out


@dataclass(frozen=True)
class BraidResult:
    """Outcome of a braid word.

    Attributes
    ----------
    lattice : PairedLattice
    permutation : tuple of int
        ``permutation[k]`` is the final position (1-based) of the summand
        that started at position ``k + 1``.
    generators : tuple
        For each original summand, its basis after the braid, i.e. the
        identification of ``Lambda_k`` with ``Lambda'_{s(k)}``.
    """

    lattice: PairedLattice
    permutation: tuple
    generators: tuple


def braid_apply(dec, word, experimental=False):
    """Apply a braid word letter by letter, tracking where each summand goes."""
    position = list(range(len(dec.summands)))      # original index -> current position
    for direction, i in parse_word(word):
        dec = mutate(dec, i, direction, experimental=experimental)
        for k, p in enumerate(position):
            if p == i - 1:
                position[k] = i
            elif p == i:
                position[k] = i - 1
    gens = tuple(dec.summands[p] for p in position)
    return BraidResult(lattice=dec, permutation=tuple(p + 1 for p in position), generators=gens)


def euler_pn(n, a, b):
    """``chi(O(a), O(b)) = C(b - a + n, n)`` on projective n-space (as a polynomial)."""
    num = 1
    for j in range(1, n + 1):
        num *= b - a + j
    # a product of n consecutive integers is divisible by n!
    return num // factorial(n)


def pn_line_bundle_gram(n, degrees):
    """Euler pairing ``chi(O(d_i), O(d_j))`` on the classes of the given line bundles."""
    return [[euler_pn(n, a, b) for b in degrees] for a in degrees]


P1_GRAM = ((1, 1), (-1, 0))


def p1_class(a):
    """``[O(a)] = [O] + a [O_p]`` in the basis ``([O], [O_p])``."""
    return (1, int(a))


P1_POINT = (0, 1)


def p1_decomposition(k=0):
    """``<[O(k)], [O(k+1)]>`` in the basis ``([O], [O_p])`` with the Euler pairing."""
    return make_lattice(P1_GRAM, [[p1_class(k)], [p1_class(k + 1)]])


def exceptional_decomposition(gram):
    """Standard basis vectors as rank-one summands of a unitriangular Gram matrix."""
    n = len(gram)
    return make_lattice(gram, [[tuple(int(i == j) for j in range(n))] for i in range(n)])
