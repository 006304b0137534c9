from math import gcd, pi

import pytest
from flint import acb, arb, fmpq

from artifact.hecke import LocalType, get_newform
from artifact.lfun import (adjoint_factors, adjoint_series, dirichlet_coefficients,
                           evaluate_completed, functional_equation_residual, funatone_ratio,
                           gamma_c, gamma_r, hida_constant, local_factor_adjoint,
                           local_factor_f, naive_adjoint_value_at_one_inverse,
                           PrecisionError,
                           petersson_norm_gamma0, zeta_series)
from artifact.numfield import primes_upto, working_precision


def rat(c):
    return [x.to_rational() for x in c]


def test_local_factor_f(delta, f11):
    assert rat(local_factor_f(delta, 2).coeffs) == [1, 24, 2 ** 11]
    assert rat(local_factor_f(f11, 11).coeffs) == [1, -1]


def test_local_factor_adjoint(delta, f11):
    F = local_factor_adjoint(delta, 2)
    s = fmpq(-55, 32)
    # (1 - X)(1 - s X + X^2)
    assert rat(F.coeffs) == [1, -1 - s, 1 + s, -1]
    assert rat(local_factor_adjoint(f11, 11).coeffs) == [1, fmpq(-1, 11)]


def test_supercuspidal_and_exceptional_factors():
    f49 = get_newform("49.2.a")
    assert rat(local_factor_f(f49, 7).coeffs) == [1]
    F = local_factor_adjoint(f49, 7)
    assert rat(F.coeffs) == [1] and F.marker == "exceptional-unknown"
    saved = f49.local_types[7]
    try:
        f49.local_types[7] = LocalType(7, 0, "supercuspidal", True, "user")
        full = local_factor_adjoint(f49, 7, naive=False)
        assert rat(full.coeffs) == [1, 1] and full.exceptional
        facs = adjoint_factors(f49, 60, naive=False)
        c_full = dirichlet_coefficients(facs, False, 60)
        c_naive = dirichlet_coefficients(facs, True, 60)
        # the only difference is the factor (1 + X)^-1 at 7; the naive factor there is 1
        assert c_full[7 - 1] == -1 and c_full[49 - 1] == 1
        for n in range(1, 61):
            if n % 7:
                assert c_full[n - 1] == c_naive[n - 1]
                if 7 * n <= 60:
                    assert c_full[7 * n - 1] == -c_naive[n - 1]
    finally:
        f49.local_types[7] = saved


def test_dirichlet_coefficients(delta):
    c = dirichlet_coefficients(adjoint_factors(delta, 30), True, 30)
    assert c[0] == 1
    assert c[1] == fmpq(-23, 32)
    for m in range(1, 6):
        for n in range(1, 6):
            if m * n <= 30 and gcd(m, n) == 1:
                assert c[m * n - 1] == c[m - 1] * c[n - 1]
    with pytest.raises(ValueError):
        dirichlet_coefficients({2: local_factor_adjoint(delta, 2)}, True, 5)


def test_adjoint_factor_positive_at_one(delta, f11, f23):
    for rec in (delta, f11):
        for p in primes_upto(50):
            assert naive_adjoint_value_at_one_inverse(rec, p).to_rational() > 0
    assert naive_adjoint_value_at_one_inverse(f11, 2).to_rational() == fmpq(5, 8)
    for p in primes_upto(30):
        v = naive_adjoint_value_at_one_inverse(f23, p)
        for root in f23.field.embeddings(64):
            assert v.embed(root).real > 0


def test_zeta_against_flint():
    with working_precision(128):
        for s in (0.3, 0.7, 2.5, acb(0.4, 3)):
            v, _ = evaluate_completed(zeta_series(400), s)
            z = acb(s)
            ref = gamma_r(z) * z.zeta()
            assert abs(complex((v - ref).mid())) < 1e-12 * abs(complex(ref.mid()))
        L = zeta_series(400)
        assert functional_equation_residual(L, (0.1, 0.3, 0.45, 0.6, 0.9)) < 1e-10
    with pytest.raises(PrecisionError):
        evaluate_completed(zeta_series(1), 0.3)


def test_gamma_factor_definition(delta):
    L = adjoint_series(delta)
    with working_precision(128):
        s = acb(1)
        direct = arb.pi() ** -1 * acb(1).gamma() * 2 * (2 * arb.pi()) ** -12 * acb(12).gamma()
        assert abs(complex((L.gamma_factor(s) - gamma_r(s + 1) * gamma_c(s + 11)).mid())) == 0
        assert abs(complex((L.gamma_factor(s) - direct).mid())) < 1e-30


def test_delta_functional_equation(delta):
    L = adjoint_series(delta, conductor=1, sign=1)
    assert functional_equation_residual(L) <= 1e-6
    with working_precision(128):
        v, _ = evaluate_completed(L, 1)
        assert v.real > 0 and abs(v.imag.mid()) < 1e-20
        r = funatone_ratio(L)
        assert abs(float(r.real.mid()) - 11 / (2 * pi ** 2)) < 1e-6


def test_petersson_decomposition_independent(delta):
    a = petersson_norm_gamma0(delta, split=1.0)
    b = petersson_norm_gamma0(delta, split=1.25, order=48)
    assert a > 0
    assert abs(float(((a - b) / a).mid())) < 1e-8


def test_hida_constant(delta, f11):
    assert abs(float(hida_constant(delta).mid()) - 39916800 * 2 / (4 ** 12 * pi ** 13)) < 1e-20
    assert abs(float(hida_constant(f11).mid()) - 1 * 11 * 10 / (16 * pi ** 3)) < 1e-12
