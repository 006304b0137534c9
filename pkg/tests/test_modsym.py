import pytest

from artifact import _linalg as la
from artifact.hecke import get_space
from artifact.modsym import (build_space, cuspidal_subspace, dim_cusp_forms,
                             dim_modular_symbols, pairing_gram, qexpansion_oracle,
                             star_decomposition, sturm_bound)
from artifact.numfield import character_from_label

# dim S_k(Gamma0(N), psi) from standard tables
KNOWN_CUSP = {(11, 2, None): 1, (23, 2, None): 2, (37, 2, None): 2, (1, 12, None): 1,
              (5, 4, None): 1, (1, 24, None): 2, (7, 3, "7.6"): 1, (4, 3, "4.3"): 0,
              (13, 2, None): 0, (2, 8, None): 1}


@pytest.mark.parametrize("key", sorted(KNOWN_CUSP, key=str))
def test_dimension_formula_matches_table(key):
    N, k, lab = key
    psi = character_from_label(lab) if lab else None
    assert dim_cusp_forms(N, k, psi) == KNOWN_CUSP[key]


@pytest.mark.parametrize("N,k,lab", [(11, 2, None), (23, 2, None), (37, 2, None),
                                     (1, 12, None), (5, 4, None), (7, 3, "7.6")])
def test_space_dimensions(N, k, lab):
    psi = character_from_label(lab) if lab else None
    sp = build_space(N, k, psi)
    assert sp.dim == dim_modular_symbols(N, k, psi)
    C = cuspidal_subspace(sp)
    r = C.rank if hasattr(C, "rank") else len(C)
    assert r == 2 * dim_cusp_forms(N, k, psi)


def test_wrong_parity_is_zero():
    sp = build_space(3, 3)
    assert sp.dim == 0
    assert cuspidal_subspace(sp).rank == 0


def test_manin_relations_hold():
    for N, k, lab in [(11, 2, None), (5, 4, None), (7, 3, "7.6"), (1, 12, None)]:
        psi = character_from_label(lab) if lab else None
        assert build_space(N, k, psi).relation_check()


def test_cuspidal_lattice_saturated_and_hecke_stable():
    for N, k in [(11, 2), (23, 2), (1, 12), (5, 4)]:
        sp = get_space(N, k)
        L = cuspidal_subspace(sp)
        assert L.is_saturated()
        for p in (2, 3, 5, 7):
            T = L.restrict(sp.hecke_matrix(p))
            assert la.lcm_den(la.rows_of(T)) == 1


def test_star_decomposition():
    sp = get_space(11, 2)
    plus, minus = star_decomposition(sp)
    assert plus.nrows() == 1 and minus.nrows() == 1
    S = sp.star_matrix()
    assert S * S == la.identity(sp.dim)
    for N in (11, 23, 37):
        s = get_space(N, 2)
        S = s.star_matrix()
        for p in (2, 3, 5, 7):
            if N % p:
                T = s.hecke_matrix(p)
                assert S * T == T * S


def test_gram_matrix():
    for N, k in [(11, 2), (23, 2), (37, 2), (1, 12), (5, 4)]:
        sp = get_space(N, k)
        G = pairing_gram(sp)
        assert G.is_antisymmetric()
        assert G.matrix.det() != 0
        L = cuspidal_subspace(sp)
        for p in (2, 3, 5):
            T = L.restrict(sp.hecke_matrix(p))
            assert T.transpose() * G.matrix == G.matrix * T
    assert pairing_gram(build_space(3, 3)).matrix.nrows() == 0


def test_qexpansion_oracle():
    assert qexpansion_oracle("eta-product", "1.12", 3) == [1, -24, 252]
    assert qexpansion_oracle("eta-product", "11.2", 3) == [1, -2, -1]
    a = qexpansion_oracle("eta-product", "1.12", 30)
    b = qexpansion_oracle("eisenstein-product", "1.12", 30)
    assert a == b and a[10] == 534612
    with pytest.raises(KeyError):
        qexpansion_oracle("eta-product", "2.2", 5)


def test_sturm_bound():
    assert sturm_bound(1, 12) == 1
    assert sturm_bound(11, 2) == 2
    assert sturm_bound(44, 2) == 12


def test_space_json():
    js = get_space(11, 2).to_json()
    assert js["level"] == 11 and js["dimension"] == 3 and len(js["basis"]) == 3
