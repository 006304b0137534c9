import pytest
from flint import fmpq

from artifact import _linalg as la
from artifact.hecke import (NewformRecord, atkin_lehner, classify_local, degeneracy_gamma,
                            gamma_adjoint_product, gamma_closed_form, gamma_kill_check,
                            get_newform, get_space, hecke_operator, newform_decomposition,
                            parse_form_label, sigma_coefficients)
from artifact.modsym import build_space, cuspidal_subspace, qexpansion_oracle, sturm_bound
from artifact.numfield import character_from_label


def test_hecke_eigenvalues_small(delta, f11):
    T2 = hecke_operator(get_space(1, 12), 2).on_cuspidal()
    assert T2 == la.scalar(2, -24)
    T3 = hecke_operator(get_space(11, 2), 3).on_cuspidal()
    assert T3 == la.scalar(2, -1)


def test_s_operator_is_central_scalar():
    for N, k, lab in [(11, 2, None), (1, 12, None), (5, 4, None), (7, 3, "7.6")]:
        psi = character_from_label(lab) if lab else None
        sp = get_space(N, k, psi)
        L = cuspidal_subspace(sp)
        for p in (2, 3):
            if N % p == 0:
                continue
            S = hecke_operator(sp, p, "S").on_cuspidal()
            chi = int(sp.psi.value(p, None).to_rational()) if lab else 1
            assert S == la.scalar(L.rank, chi * p ** (k - 2))
    with pytest.raises(ValueError):
        hecke_operator(get_space(11, 2), 11, "S")


def test_operators_commute():
    sp = get_space(23, 2)
    ops = [sp.hecke_matrix(p) for p in (2, 3, 5, 7, 23)]
    for A in ops:
        for B in ops:
            assert A * B == B * A


def test_newform_decomposition():
    (f,) = newform_decomposition(get_space(11, 2))
    assert f.field.degree == 1 and f.label == "11.2.a"
    (g,) = newform_decomposition(get_space(23, 2))
    assert g.field.degree == 2
    assert [int(c) for c in g.field.poly.coeffs()] == [-1, 1, 1]
    assert g.a(2).charpoly() == g.field.poly
    (d,) = newform_decomposition(get_space(1, 12))
    assert d.a(2).to_rational() == -24


def test_eigenvalues_match_oracle(delta, f11):
    for rec, lab in [(delta, "1.12"), (f11, "11.2")]:
        B = max(sturm_bound(rec.level, rec.weight), 40)
        got = [int(x.to_rational()) for x in rec.an_list(B)]
        assert got == qexpansion_oracle("eta-product", lab, B)


def test_low_bound_warning():
    recs = newform_decomposition(get_space(37, 2), bound=3)
    assert all(r.warnings for r in recs)
    assert len(recs) == 2


def test_classify_local(f11, f23):
    lt = classify_local(f11, 11)
    assert (lt.delta, lt.cls) == (1, "special")
    assert classify_local(f11, 2).delta == 2
    assert classify_local(f23, 23).cls == "special"
    f49 = get_newform("49.2.a")
    lt = classify_local(f49, 7)
    assert (lt.delta, lt.cls, lt.exceptional) == (0, "supercuspidal", False)
    assert lt.provenance == "default-unverified"


def test_atkin_lehner(f11):
    for N, k in [(11, 2), (23, 2), (37, 2), (5, 4), (1, 12)]:
        sp = get_space(N, k)
        W = atkin_lehner(sp).matrix
        assert W * W == la.scalar(sp.dim, N ** (k - 2))
        for p in (2, 3, 7):
            if N % p:
                T = sp.hecke_matrix(p)
                assert W * T == T * W
    Wc = atkin_lehner(get_space(11, 2)).on_cuspidal()
    assert Wc == la.scalar(2, -1)
    assert f11.a(11).to_rational() == 1
    assert atkin_lehner(get_space(1, 12)).matrix == la.identity(get_space(1, 12).dim)
    with pytest.raises(ValueError):
        atkin_lehner(build_space(7, 3, character_from_label("7.6")))


def test_gamma_empty_is_identity(f11):
    G = degeneracy_gamma(f11, [])
    assert G.matrix == la.identity(2)
    assert gamma_adjoint_product(f11, []) == f11.field.one()


@pytest.mark.parametrize("label,sigma", [("11.2.a", [2]), ("11.2.a", [3]), ("1.12.a", [2])])
def test_gamma_kills_sigma_coefficients(label, sigma):
    f = get_newform(label)
    ok, bad = gamma_kill_check(f, sigma)
    assert ok and not bad
    c = sigma_coefficients(f, sigma, 12)
    assert all(c[n - 1].is_zero() for n in range(1, 13) if n % sigma[0] == 0)


def test_gamma_adjoint_product(f11):
    assert gamma_adjoint_product(f11, [2]).to_rational() == fmpq(5, 4)
    assert gamma_closed_form(f11, [2]).to_rational() == fmpq(5, 4)
    assert gamma_adjoint_product(f11, [3]) == gamma_closed_form(f11, [3])
    assert gamma_adjoint_product(f11, [11]).to_rational() == fmpq(-120, 121)
    assert gamma_closed_form(f11, [2, 3]) == gamma_closed_form(f11, [2]) * gamma_closed_form(f11, [3])


def test_record_json_roundtrip(f23):
    obj = f23.to_json()
    back = NewformRecord.from_json(obj)
    assert back.to_json() == obj


def test_parse_form_label():
    assert parse_form_label("Delta")[:2] == (1, 12)
    assert parse_form_label("11.2.b")[3] == 1
    with pytest.raises(ValueError):
        parse_form_label("11.x")
