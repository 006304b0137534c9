import random

import pytest

from artifact.cosets import (A, B, IDENTITY, CosetSum, DoubleCoset, LocalSubgroup,
                             compose, compose_sums, coset_decompose, modes_agree,
                             random_double_coset, verify_relations)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_classical_counts(p):
    # GL2(Z_p) diag(p^a, p^b) GL2(Z_p) has p^(d-1)(p+1) cosets for d = |a - b| > 0
    assert DoubleCoset(p, 0, B(p, 1), 0).count() == p + 1
    assert DoubleCoset(p, 0, (p * p, 0, 0, 1), 0).count() == p * (p + 1)
    assert DoubleCoset(p, 0, B(p, 2), 0).count() == 1
    # [V_0 : V_i] = p^(i-1)(p+1)
    assert DoubleCoset(p, 0, IDENTITY, 1).count() == p + 1
    assert DoubleCoset(p, 0, IDENTITY, 2).count() == p * (p + 1)
    assert DoubleCoset(p, 2, IDENTITY, 0).count() == 1


def test_subgroup_membership():
    V = LocalSubgroup(3, 2)
    assert V.contains((1, 0, 9, 1))
    assert not V.contains((1, 0, 3, 1))
    assert not V.contains((3, 0, 0, 1))
    for g in V.generators():
        assert V.contains(g)


def test_canonical_representative_independent_of_input():
    p = 3
    d1 = DoubleCoset(p, 0, (p, 0, 0, 1), 0)
    d2 = DoubleCoset(p, 0, (1, 0, 0, p), 0)
    d3 = DoubleCoset(p, 0, (1, 1, 0, p), 0)
    assert d1 == d2 == d3
    assert d1.g == d2.g == d3.g


def test_coset_decompose():
    dc = DoubleCoset(2, 0, B(2, 1), 0)
    reps = coset_decompose(dc)
    assert len(reps) == 3
    with pytest.raises(ValueError, match="working modulus"):
        coset_decompose(dc, M=0)


def test_composition_errors():
    with pytest.raises(ValueError):
        compose(DoubleCoset(2, 0, B(2), 1), DoubleCoset(2, 0, B(2), 0))
    with pytest.raises(ValueError):
        compose(DoubleCoset(2, 0, B(2), 0), DoubleCoset(3, 0, B(3), 0))
    with pytest.raises(ValueError):
        compose(DoubleCoset(2, 0, B(2), 0), DoubleCoset(2, 0, B(2), 0), mode="other")


def test_hecke_relation_at_level_one():
    # T_p^2 = T_(p^2) + (p + 1) R_p with R_p = [V pI V]
    for p in (2, 3):
        T = DoubleCoset(p, 0, B(p, 1), 0)
        got = compose(T, T, "both")
        want = CosetSum([(1, DoubleCoset(p, 0, (p * p, 0, 0, 1), 0)),
                         (p + 1, DoubleCoset(p, 0, B(p, 2), 0))])
        assert got == want


@pytest.mark.parametrize("p", [2, 3, 5])
def test_verify_relations(p):
    rep = verify_relations(p)
    assert rep and all(r["pass"] for r in rep), [r for r in rep if not r["pass"]]
    assert {r["identity"] for r in rep} == {"B0", "AB0", "B", "AB"}


def test_modes_agree_small():
    assert modes_agree(2, n=30, seed=5) == []


def test_degree_multiplicative_and_associative():
    rng = random.Random(7)
    p = 2
    for _ in range(10):
        d3 = random_double_coset(p, rng, 0, 1)
        d2 = random_double_coset(p, rng, 1, 2)
        d1 = random_double_coset(p, rng, 2, 0)
        s = compose(d3, d2, "brute")
        assert s.degree() == d3.count() * d2.count()
        left = compose_sums(s, CosetSum([(1, d1)]))
        right = compose_sums(CosetSum([(1, d3)]), compose(d2, d1, "brute"))
        assert left == right


def test_coset_sum_algebra():
    T = DoubleCoset(2, 0, B(2), 0)
    s = CosetSum([(1, T), (2, T)])
    assert s == CosetSum([(3, T)])
    assert (s + s.scale(-1)).terms == []
    assert s.to_json() == [[3, {"p": 2, "left": 0, "right": 0, "rep": list(T.g)}]]
    assert A(2, 2) == (1, 0, 0, 4)
