"""Convolution-chain coefficients against brute-force nested sums."""

import math

import numpy as np
import pytest

from itpl.chains import TailProfile, chain_coefficients, chain_profile
from itpl.forms import builtin_form, eta_product_level11
from itpl.numerics import DomainError


def brute_nested(coeffs, alphas, count):
    """Direct sum over strictly decreasing chains m_1 > ... > m_n >= 1."""
    n = len(coeffs)
    out = np.zeros(count + 1, dtype=complex)
    if n == 1:
        out[1:] = np.asarray(coeffs[0][1:count + 1])
        return out
    if n == 2:
        a2 = float(alphas[0])
        for m1 in range(2, count + 1):
            s = 0j
            for m2 in range(1, m1):
                s += coeffs[0][m1 - m2] * coeffs[1][m2] * m2 ** (-a2)
            out[m1] = s
        return out
    if n == 3:
        a2, a3 = map(float, alphas)
        for m1 in range(3, count + 1):
            s = 0j
            for m2 in range(2, m1):
                for m3 in range(1, m2):
                    s += (
                        coeffs[0][m1 - m2]
                        * coeffs[1][m2 - m3]
                        * coeffs[2][m3]
                        * m2 ** (-a2)
                        * m3 ** (-a3)
                    )
            out[m1] = s
        return out
    raise NotImplementedError


def test_single_list_is_identity():
    f = builtin_form("delta", 32)
    a = chain_coefficients([f.coefficients], (), 20)
    np.testing.assert_array_equal(a, f.coefficients[:21])


@pytest.mark.parametrize("alpha", [1, 3])
def test_pair_matches_brute_force(alpha):
    f = builtin_form("delta", 64)
    a = chain_coefficients([f.coefficients, f.coefficients], (alpha,), 30)
    b = brute_nested([f.coefficients, f.coefficients], (alpha,), 30)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_pair_mixed_forms_matches_brute_force():
    f = builtin_form("delta", 64)
    g = eta_product_level11(64)
    a = chain_coefficients([f.coefficients, g.coefficients], (2,), 30)
    b = brute_nested([f.coefficients, g.coefficients], (2,), 30)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=0)


def test_triple_matches_brute_force():
    f = builtin_form("delta", 32)
    a = chain_coefficients([f.coefficients] * 3, (1, 2), 25)
    b = brute_nested([f.coefficients] * 3, (1, 2), 25)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)


def test_leading_coefficients_vanish_below_arity():
    f = builtin_form("delta", 16)
    a = chain_coefficients([f.coefficients] * 3, (1, 1), 10)
    assert np.all(a[:3] == 0)
    # shortest chain is m_1 = 3 > 2 > 1 with all three increments equal to 1
    assert a[3] == pytest.approx(f.coefficients[1] ** 3 / 2.0)


def test_lexicographic_reindex_between_sum_shapes():
    # same chain written over increments l_r = m_r - m_{r+1}: the two
    # parameterisations must agree term for term, coefficient by coefficient
    f = builtin_form("delta", 40)
    c = f.coefficients
    alpha = 2
    for m1 in range(2, 31):
        by_increments = sum(
            c[l1] * c[l2] * l2 ** (-float(alpha))
            for l1 in range(1, m1)
            for l2 in range(1, m1)
            if l1 + l2 == m1
        )
        got = chain_coefficients([c, c], (alpha,), m1)[m1]
        assert got == pytest.approx(by_increments, rel=1e-13)


def test_input_validation():
    f = builtin_form("delta", 16)
    with pytest.raises(DomainError):
        chain_coefficients([], (), 5)
    with pytest.raises(DomainError):
        chain_coefficients([f.coefficients], (1,), 5)
    with pytest.raises(DomainError):
        chain_coefficients([f.coefficients] * 2, (0,), 5)
    with pytest.raises(DomainError):
        chain_coefficients([f.coefficients] * 2, (1.5,), 5)
    with pytest.raises(DomainError):
        chain_coefficients([f.coefficients], (), 0)


def test_short_input_lists_are_zero_padded():
    f = builtin_form("delta", 8)
    g = builtin_form("delta", 64)
    a = chain_coefficients([f.coefficients, f.coefficients], (1,), 30)
    b = chain_coefficients([g.coefficients, g.coefficients], (1,), 30)
    # they agree exactly while every contributing index is within range
    np.testing.assert_array_equal(a[:10], b[:10])
    assert not np.array_equal(a, b)


@pytest.mark.parametrize(
    "alphas",
    [(1,), (3,), (11,), (1, 1), (1, 11), (11, 1)],
)
def test_profile_bounds_computed_coefficients(alphas):
    n = len(alphas) + 1
    f = builtin_form("delta", 512)
    prof = chain_profile([TailProfile.of_form(f)] * n, alphas)
    a = chain_coefficients([f.coefficients] * n, alphas, 400)
    ms = np.arange(1, 401, dtype=float)
    bounds = prof.K * ms ** prof.P * (1.0 + np.log(ms)) ** prof.kappa
    assert np.all(np.abs(a[1:]) <= bounds * (1 + 1e-9))


def test_profile_shift_matches_division():
    f = builtin_form("delta", 256)
    prof = chain_profile(
        [TailProfile.of_form(f), TailProfile.of_form(f)], (2,)
    ).shifted(12.0)
    a = chain_coefficients([f.coefficients] * 2, (2,), 200)
    ms = np.arange(1, 201, dtype=float)
    scaled = np.abs(a[1:]) / ms ** 12.0
    bounds = prof.K * ms ** prof.P * (1.0 + np.log(ms)) ** prof.kappa
    assert np.all(scaled <= bounds * (1 + 1e-9))


def test_profile_rejects_negative_outer_exponent():
    with pytest.raises(DomainError):
        chain_profile([TailProfile(1.0, -0.5), TailProfile(1.0, 2.0)], (1,))
    # but a negative exponent inner profile is fine (hit via large alphas)
    prof = chain_profile([TailProfile(2.0, 6.25), TailProfile(2.0, 6.25)], (11,))
    assert prof.P == pytest.approx(6.25)
    assert math.isfinite(prof.K)
