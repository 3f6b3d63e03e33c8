import json
from math import comb

import numpy as np
import pytest

from stabpath import mutation_lattice as ml
from stabpath.errors import InputError


def random_unipotent(rng, n, spread=3):
    g = np.eye(n, dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            g[i, j] = int(rng.integers(-spread, spread + 1))
    return g.tolist()


def test_p1_left_mutation():
    dec = ml.p1_decomposition(0)
    assert dec.block_gram(0, 1) == [[2]]
    out = ml.mutate(dec, 1, "left")
    assert out.summands == (((-1, 1),), ((1, 0),))
    minus_o_minus_1 = tuple(-x for x in ml.p1_class(-1))
    assert out.summands[0][0] == minus_o_minus_1
    assert out.history == ("L1",)


def test_p1_euler_pairing():
    for a in range(-3, 4):
        for b in range(-3, 4):
            assert ml.pairing(ml.P1_GRAM, ml.p1_class(a), ml.p1_class(b)) == b - a + 1
            assert ml.euler_pn(1, a, b) == b - a + 1


def test_short_exact_sequence_on_p1():
    for k in range(-3, 4):
        lo, mid, hi = (np.array(ml.p1_class(m)) for m in (k - 1, k, k + 1))
        assert np.all(hi - 2 * mid + lo == 0)
        out = ml.mutate(ml.p1_decomposition(k), 1, "left")
        assert out.summands[0][0] == tuple(-lo)


def test_inverse_mutations():
    dec = ml.p1_decomposition(2)
    assert ml.mutate(ml.mutate(dec, 1, "right"), 1, "left").summands == dec.summands
    assert ml.mutate(ml.mutate(dec, 1, "left"), 1, "right").summands == dec.summands


def test_empty_word_and_permutation():
    dec = ml.exceptional_decomposition(ml.pn_line_bundle_gram(2, [0, 1, 2]))
    same = ml.braid_apply(dec, [])
    assert same.lattice.summands == dec.summands and same.permutation == (1, 2, 3)
    one = ml.braid_apply(dec, ["L1"])
    assert one.permutation == (2, 1, 3)
    # the first summand is carried along unchanged
    assert one.generators[0] == dec.summands[0]


def test_braid_relation_on_p2():
    gram = ml.pn_line_bundle_gram(2, [0, 1, 2])
    assert gram == [[1, 3, 6], [0, 1, 3], [0, 0, 1]]
    assert gram[0][2] == comb(2 + 2, 2)
    dec = ml.exceptional_decomposition(gram)
    for a, b in (("L1 L2 L1", "L2 L1 L2"), ("R1 R2 R1", "R2 R1 R2")):
        x, y = ml.braid_apply(dec, a), ml.braid_apply(dec, b)
        assert x.lattice.summands == y.lattice.summands
        assert x.permutation == y.permutation


def test_random_lattices():
    rng = np.random.default_rng(314)
    for trial in range(100):
        n = 3 + trial % 3
        dec = ml.exceptional_decomposition(random_unipotent(rng, n))
        det = dec.span_determinant()
        i = int(rng.integers(1, n))
        for d, inv in (("left", "right"), ("right", "left")):
            out = ml.mutate(dec, i, d)
            assert out.gram == dec.gram
            assert not out.triangularity_violations()
            assert abs(out.span_determinant()) == abs(det)
            back = ml.mutate(out, i, inv)
            assert back.summands == dec.summands
        j = int(rng.integers(1, n - 1))
        for letter in "LR":
            w1 = f"{letter}{j} {letter}{j + 1} {letter}{j}"
            w2 = f"{letter}{j + 1} {letter}{j} {letter}{j + 1}"
            x, y = ml.braid_apply(dec, w1), ml.braid_apply(dec, w2)
            assert x.lattice.summands == y.lattice.summands
            assert x.permutation == y.permutation
        # far-apart generators commute
        if n >= 4:
            x = ml.braid_apply(dec, "L1 L3")
            y = ml.braid_apply(dec, "L3 L1")
            assert x.lattice.summands == y.lattice.summands
        # right-then-left round trip keeps classes up to sign
        rt = ml.braid_apply(dec, [f"R{i}", f"L{i}"])
        assert sorted(map(abs_vec, rt.lattice.basis())) == sorted(map(abs_vec, dec.basis()))


def abs_vec(v):
    return max(tuple(v), tuple(-x for x in v))


def test_parse_word():
    assert ml.parse_word("L1, r2") == [("left", 1), ("right", 2)]
    assert ml.parse_word([1, -2]) == [("left", 1), ("right", 2)]
    for bad in ("X1", "L", "Lx", [0]):
        with pytest.raises(InputError):
            ml.parse_word(bad)


def test_mutation_errors():
    dec = ml.p1_decomposition(0)
    with pytest.raises(InputError):
        ml.mutate(dec, 2, "left")
    with pytest.raises(InputError):
        ml.mutate(dec, 1, "up")
    # [e, e) = 2: not exceptional
    nonexc = ml.make_lattice([[2, 0], [0, 1]], [[(1, 0)], [(0, 1)]])
    with pytest.raises(ml.MutationError, match="not exceptional"):
        ml.mutate(nonexc, 1, "left")


def test_make_lattice_validation():
    with pytest.raises(InputError, match="degenerate"):
        ml.make_lattice([[1, 1], [1, 1]], [[(1, 0)], [(0, 1)]])
    with pytest.raises(InputError, match="upper triangular"):
        ml.make_lattice([[1, 0], [1, 1]], [[(1, 0)], [(0, 1)]])
    with pytest.raises(InputError):
        ml.make_lattice([[1, 0], [0, 1]], [[(1, 0.5)], [(0, 1)]])
    with pytest.raises(InputError):
        ml.make_lattice([[1, 0], [0, 1]], [[(1, 0), (0, 1)], [(1, 1)]])


def experimental_lattice():
    # block of rank 2 with unimodular Gram [[1, 1], [0, 1]], then one more vector
    gram = [[1, 1, 2], [0, 1, 1], [0, 0, 1]]
    return ml.make_lattice(gram, [[(1, 0, 0), (0, 1, 0)], [(0, 0, 1)]])


def test_higher_rank_needs_flag():
    with pytest.raises(ml.MutationError, match="experimental"):
        ml.mutate(experimental_lattice(), 1, "left")


def test_experimental_rank_two_block():
    dec = experimental_lattice()
    left = ml.mutate(dec, 1, "left", experimental=True)
    assert not left.triangularity_violations()
    assert len(left.summands[0]) == 1 and len(left.summands[1]) == 2
    assert abs(left.span_determinant()) == abs(dec.span_determinant())
    back = ml.mutate(left, 1, "right", experimental=True)
    assert back.summands == dec.summands
    right = ml.mutate(dec, 1, "right", experimental=True)
    assert not right.triangularity_violations()


def test_round_trip_through_json(tmp_path):
    dec = ml.braid_apply(ml.p1_decomposition(0), "L1").lattice
    path = tmp_path / "dec.json"
    path.write_text(json.dumps(dec.to_dict()))
    again = ml.load_lattice(path)
    assert again == dec
    bad = dec.to_dict()
    bad["rank"] = 3
    with pytest.raises(InputError):
        ml.lattice_from_dict(bad)
    bad = dec.to_dict()
    bad["history"] = ["Q1"]
    with pytest.raises(InputError):
        ml.lattice_from_dict(bad)
