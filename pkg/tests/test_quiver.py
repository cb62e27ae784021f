import json
import math

import pytest

from ellshuf.quiver import (Arrow, BUILTIN_QUIVERS, Quiver, a1, a2, dim_add,
                            dim_total, enumerate_partitions,
                            enumerate_shuffles, kronecker, load_quiver,
                            quiver_from_json, zvar, zvars)


def jordan():
    return Quiver(("1",), (Arrow("1", "1"),))


def test_builtin_shapes():
    assert a1().vertices == ("1",) and not a1().arrows
    assert a2().adjacency("1", "2") == 1 and a2().adjacency("2", "1") == 0
    assert kronecker().adjacency("1", "2") == 2
    assert set(BUILTIN_QUIVERS) == {"a1", "a2", "kronecker"}
    for name, mk in BUILTIN_QUIVERS.items():
        assert not mk().has_edge_loops()
    assert jordan().has_edge_loops()


def test_validation():
    with pytest.raises(ValueError):
        Quiver(("1", "1"), ())
    with pytest.raises(ValueError):
        Quiver(("1",), (Arrow("1", "2"),))
    with pytest.raises(ValueError):
        Quiver(("1",), (), mode="fancy")


def test_cartan_matrix():
    q = a2()
    assert q.cartan_entry("1", "1") == 2
    assert q.cartan_entry("1", "2") == q.cartan_entry("2", "1") == -1
    assert kronecker().cartan_entry("1", "2") == -2
    assert jordan().cartan_entry("1", "1") == 2
    with pytest.raises(ValueError):
        q.cartan_entry("1", "3")


def test_cbar_is_identity_minus_adjacency():
    q = a2()
    assert q.cbar_entry("1", "1") == 1
    assert q.cbar_entry("1", "2") == -1  # one arrow 1 -> 2
    assert q.cbar_entry("2", "1") == 0  # no arrow 2 -> 1
    assert kronecker().cbar_entry("1", "2") == -2


def test_sign_exponent_bilinear():
    q = kronecker()
    u, v, w = {"1": 1}, {"1": 1, "2": 2}, {"2": 1}
    assert q.sign_exponent(dim_add(u, v), w) == q.sign_exponent(u, w) + q.sign_exponent(v, w)
    assert q.sign_exponent(w, dim_add(u, v)) == q.sign_exponent(w, u) + q.sign_exponent(w, v)
    assert q.sign_pairing(u, w) in (1, -1)


def test_sign_pairing_swap_symmetry():
    # swapping the two blocks changes the exponent by v2^T (Cbar + Cbar^T) v1,
    # and Cbar + Cbar^T is the Cartan matrix
    for q in (a2(), kronecker(), jordan()):
        dims = [{"1": 1}, {"1": 2}, {"1": 1, "2": 1}, {"2": 2}, {"1": 2, "2": 1}]
        dims = [d for d in dims if all(k in q.vertices for k in d)]
        for v1 in dims:
            for v2 in dims:
                diff = q.sign_exponent(v1, v2) - q.sign_exponent(v2, v1)
                cart = sum(v2.get(k, 0) * q.cartan_entry(k, l) * v1.get(l, 0)
                           for k in q.vertices for l in q.vertices)
                assert (diff - cart) % 2 == 0


def test_arrow_weights_unit_mode():
    q = Quiver(("1", "2"), (Arrow("1", "2"), Arrow("1", "2")), mode="unit")
    assert q.arrow_weights() == [("1", "2", 1, 1), ("1", "2", 1, 1)]


def test_arrow_weights_hbar_mode():
    # p-th of n parallel arrows weighs (n+2-2p) t1 + (-n+2p) t2; totals are hbar
    q = kronecker()
    w = q.arrow_weights()
    assert w == [("1", "2", 2, 0), ("1", "2", 0, 2)]
    for _, _, m1, m2 in w:
        assert m1 + m2 == 2
    assert a2().arrow_weights() == [("1", "2", 1, 1)]
    triple = Quiver(("1", "2"), tuple(Arrow("1", "2") for _ in range(3)))
    assert [(m1, m2) for _, _, m1, m2 in triple.arrow_weights()] == [(3, -1), (1, 1), (-1, 3)]


def test_json_round_trip(tmp_path):
    q = Quiver(("a", "b"), (Arrow("a", "b"), Arrow("b", "a")), mode="unit")
    blob = q.to_json()
    assert quiver_from_json(blob) == q
    p = tmp_path / "q.json"
    p.write_text(json.dumps(blob))
    assert load_quiver(str(p)) == q
    assert quiver_from_json({"vertices": ["1"], "arrows": []}).mode == "hbar"
    with pytest.raises(ValueError):
        quiver_from_json({"vertices": ["1"]})
    with pytest.raises(ValueError):
        quiver_from_json({"vertices": ["1"], "arrows": [{"out": "1"}]})


def test_dim_helpers():
    assert dim_total({"1": 2, "2": 3}) == 5
    assert dim_add({"1": 1}, {"1": 2, "2": 1}) == {"1": 3, "2": 1}
    # zero components are dropped so dicts compare cleanly
    assert dim_add({"1": 1}, {"1": -1, "2": 1}) == {"2": 1}


def test_zvars_layout():
    q = a2()
    zz = zvars(q, {"1": 2, "2": 1})
    assert zz["1"] == (zvar("1", 1), zvar("1", 2))
    assert zz["2"] == (zvar("2", 1),)
    assert zvars(q, {"1": 1})["2"] == ()


def test_partition_count_and_standard_first():
    q = a2()
    v, v1 = {"1": 3, "2": 2}, {"1": 1, "2": 1}
    parts = list(enumerate_partitions(q, v, v1))
    assert len(parts) == math.comb(3, 1) * math.comb(2, 1)
    A0, B0 = parts[0]
    assert A0 == {"1": (1,), "2": (1,)}
    assert B0 == {"1": (2, 3), "2": (2,)}
    # blocks are disjoint ascending covers per color
    for A, B in parts:
        for c in ("1", "2"):
            got = sorted(A.get(c, ()) + B.get(c, ()))
            assert got == list(range(1, v[c] + 1))
            assert list(A[c]) == sorted(A[c])
    with pytest.raises(ValueError):
        list(enumerate_partitions(q, {"1": 1}, {"1": 2}))


def test_shuffles_biject_with_partitions():
    q = kronecker()
    v1, v2 = {"1": 2}, {"1": 1, "2": 1}
    shuffles = list(enumerate_shuffles(q, v1, v2))
    assert len(shuffles) == math.comb(3, 2) * math.comb(1, 0)
    seen = set()
    for perm in shuffles:
        # a shuffle is a bijection on the colored variables of v1 + v2
        vals = tuple(sorted(perm.values(), key=str))
        keys = tuple(sorted(perm.keys(), key=str))
        assert vals == keys
        image = tuple(sorted(perm[zvar("1", s)] for s in (1, 2)))
        assert image not in seen
        seen.add(image)
        # relative order inside each block is preserved
        assert perm[zvar("1", 1)].index < perm[zvar("1", 2)].index
        assert perm[zvar("2", 1)] == zvar("2", 1)


def test_first_shuffle_is_identity():
    q = a2()
    first = next(enumerate_shuffles(q, {"1": 1, "2": 1}, {"1": 1}))
    assert all(k == v for k, v in first.items())
