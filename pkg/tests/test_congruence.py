import pytest

from artifact.congruence import (bad_prime_set, dihedral_window, eta_ideal,
                                 eta_scaling_check, f_lattice, required_sigma,
                                 selmer_prediction)
from artifact.hecke import get_newform
from artifact.numfield import primes_above


def nonzero(eta):
    return [t for t in eta.valuations() if t[2]]


def test_eta_frozen_values(delta, f11, f23):
    # dimension-one spaces carry no self-congruences
    assert nonzero(eta_ideal(f11)) == []
    e = eta_ideal(delta)
    assert nonzero(e) == []
    assert 691 in [P.ell for P in e.window]
    # the two conjugate forms of level 23 are congruent modulo the prime above 5
    e23 = eta_ideal(f23)
    assert nonzero(e23) == [(5, 0, 1)]
    P = [Q for Q in e23.window if Q.ell == 5][0]
    assert repr(P) == "(5, a + 3)"
    assert nonzero(eta_ideal(f23, [2])) == [(5, 0, 2)]


def test_eta_excludes_small_primes(delta, f11):
    e = eta_ideal(delta)
    assert e.excluded == [2, 3, 5, 7, 11]
    assert all(P.ell not in e.excluded for P in e.window)
    assert eta_ideal(f11, [2]).level == 44


@pytest.mark.parametrize("label", ["11.2.a", "23.2.a", "1.12.a"])
def test_eta_basis_and_sign_invariance(label):
    f = get_newform(label)
    base = eta_ideal(f).valuations()
    for seed in (1, 2, 3):
        assert eta_ideal(f, seed=seed).valuations() == base
    assert eta_ideal(f, gram_sign=-1).valuations() == base


def test_f_lattice_rank(f23):
    rows, space = f_lattice(f23)
    assert space.N == 23
    assert len(rows) == 2 * f23.degree


@pytest.mark.parametrize("label", ["11.2.a", "23.2.a", "1.12.a"])
@pytest.mark.parametrize("p", [2, 3])
def test_scaling_law_from_empty(label, p):
    f = get_newform(label)
    r = eta_scaling_check(f, (), p)
    assert r["pass"]
    for row in r["rows"]:
        if row["status"] == "pass":
            assert row["difference"] == row["factor_valuation"]


def test_scaling_law_details(delta, f11, f23):
    r = eta_scaling_check(delta, (), 3)
    row = [x for x in r["rows"] if x["ell"] == 17][0]
    assert (row["difference"], row["status"]) == (1, "pass")
    r = eta_scaling_check(f11, (2,), 3)
    row = [x for x in r["rows"] if x["ell"] == 5][0]
    assert (row["eta_sigma"], row["eta_sigma_p"]) == (0, 1)
    with pytest.raises(ValueError):
        eta_scaling_check(f11, (2,), 2)


def test_dihedral_window():
    assert dihedral_window(12) == {2, 3, 23}
    assert dihedral_window(2) == {2, 3}
    for k in range(2, 30):
        for ell in dihedral_window(k):
            m = 2 * (k - 1)
            assert m % (ell - 1) == 0 or m % (ell + 1) == 0


def test_bad_primes(delta, f11, f23):
    b = bad_prime_set(delta)
    assert b.divisors == [2, 3, 5, 7, 11]
    wit = b.suspects[691]["(691)"]
    assert len(wit) == 15
    for q in (2, 3, 5, 7, 11, 13):
        assert (int(delta.a(q).to_rational()) - q ** 11 - 1) % 691 == 0
    assert not b.low_confidence
    assert b.dihedral == [2, 3, 23]
    assert 691 in b.final and 13 not in b.final
    b11 = bad_prime_set(f11)
    assert b11.divisors == [2, 11]
    assert 5 in b11.suspects
    assert b11.low_confidence
    b23 = bad_prime_set(f23)
    assert "(11, a + 8)" in b23.suspects[11]
    (Q,) = [P for P in primes_above(f23.field, 11) if repr(P) == "(11, a + 4)"]
    assert b23.reasons_at(Q) == []


def test_bad_primes_monotone_in_bound(delta):
    small = bad_prime_set(delta, bound=10)
    large = bad_prime_set(delta, bound=80)
    assert set(large.suspects) <= set(small.suspects)
    assert 691 in large.suspects


def test_selmer_prediction(f23, delta):
    pred = selmer_prediction(f23)
    by_prime = {x["prime"]: x for x in pred["predictions"]}
    assert by_prime["(5, a + 3)"]["length"] == 1
    assert by_prime["(11, a + 8)"]["length"] == "no prediction"
    pd = selmer_prediction(delta)
    assert all(x["length"] == "no prediction" for x in pd["predictions"] if x["ell"] == 691)


def test_required_sigma():
    f49 = get_newform("49.2.a")
    assert required_sigma(f49) == [7]
    assert required_sigma(f49, minimal=(7,)) == []
    with pytest.raises(ValueError):
        selmer_prediction(f49)
