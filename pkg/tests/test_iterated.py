"""Tests for nested integrals, their Fourier series, and the vertical Mellin
transform.

The cross-checks are deliberately redundant: quadrature values, Fourier
series, antiderivative words, and closed-form incomplete-gamma sums are
independent implementations of the same objects, so any normalization slip
shows up as a disagreement here.
"""

import cmath
import math

import numpy as np
import pytest

from itpl import forms, iterated
from itpl.forms import FourierSeries
from itpl.iterated import (
    _PARTIAL,
    INF_BASE,
    CostGuardError,
    PathGrid,
    VerticalPathSpec,
    antiderivative_word_integral,
    eichler_fourier_series,
    eichler_integral_direct,
    eichler_integrand_eval,
    mellin_vertical,
    mellin_vertical_quadrature,
    period_integral_direct,
    period_integrand_eval,
)
from itpl.numerics import (
    _GL_NODES,
    TWO_PI,
    DomainError,
    branch_pow,
    gamma_complex,
    upper_incomplete_gamma,
)

DELTA = forms.builtin_form("delta", 4096)
TAU = DELTA.coefficients


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def test_prefix_integration_is_exact_on_low_degree_polynomials():
    grid = PathGrid([0j, 1.0 + 0j, 2.5 + 0j])
    vals = grid.nodes ** 9 - 3.0 * grid.nodes ** 2
    want = grid.nodes ** 10 / 10.0 - grid.nodes ** 3
    got = grid.prefix(vals)
    assert np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want))) < 1e-13


def test_prefix_end_matches_integrate():
    grid = PathGrid([0.5j, 0.5 + 1.5j, 2j])
    vals = np.exp(grid.nodes)
    total = grid.integrate(vals)
    # analytic: exp is its own antiderivative
    assert abs(total - (np.exp(2j) - np.exp(0.5j))) < 1e-12


def test_refined_grid_doubles_panels():
    grid = PathGrid([0j, 1j, 2j])
    fine = grid.refined()
    assert fine.nodes.shape[0] == 2 * grid.nodes.shape[0]
    assert fine.edges[0] == grid.edges[0] and fine.edges[-1] == grid.edges[-1]


def test_path_spec_validation():
    with pytest.raises(DomainError):
        VerticalPathSpec(T=0.5)
    with pytest.raises(DomainError):
        VerticalPathSpec(eps=1.5)
    with pytest.raises(DomainError):
        VerticalPathSpec(eps=0.0)
    with pytest.raises(DomainError):
        VerticalPathSpec(tol=0.0)


# ---------------------------------------------------------------------------
# Fourier series of nested integrals
# ---------------------------------------------------------------------------

def test_single_form_integrand_series_is_the_form_itself():
    ser = eichler_fourier_series([DELTA], (), kind="integrand")
    assert ser.prefactor == 1.0 + 0j
    assert np.array_equal(ser.coefficients[1:50], TAU[1:50])
    assert ser.cusp_decay is not None


def test_single_form_integral_series_divides_by_m_to_alpha():
    ser = eichler_fourier_series([DELTA], (2,), kind="integral")
    assert abs(ser.prefactor - 1.0 / (4.0 * math.pi ** 2)) < 1e-17
    want = TAU[1:30] / np.arange(1, 30) ** 2
    assert np.max(np.abs(ser.coefficients[1:30] - want)) < 1e-12
    assert ser.cusp_decay is None


def test_pair_series_third_coefficient():
    # m=3 splits as 2+1 and 1+2: tau(2)/1 + tau(1)/2 * tau(...), then /3
    ser = eichler_fourier_series([DELTA, DELTA], (1, 1), kind="integral")
    assert abs(ser.coefficients[3] - (-12.0)) < 1e-12
    assert ser.coefficients[1] == 0


def test_series_builder_validation():
    with pytest.raises(DomainError):
        eichler_fourier_series([DELTA], (1, 1), kind="integral")
    with pytest.raises(DomainError):
        eichler_fourier_series([DELTA, DELTA], (0,), kind="integrand")
    with pytest.raises(DomainError):
        eichler_fourier_series([DELTA], (), kind="mellin")
    with pytest.raises(DomainError):
        eichler_fourier_series([], ())


def test_series_has_unit_period_and_growth():
    ser = eichler_fourier_series([DELTA, DELTA], (11,), kind="integrand")
    assert ser.period == 1.0
    K, P, kappa = ser.growth
    m = np.arange(2, ser.length + 1)
    bound = K * m.astype(float) ** P * (1.0 + np.log(m)) ** kappa
    assert np.all(np.abs(ser.coefficients[2:]) <= bound)


def test_series_is_one_periodic():
    ser = eichler_fourier_series([DELTA, DELTA], (1, 11), kind="integral")
    rng = np.random.default_rng(7)
    zs = rng.uniform(-1.5, 1.5, 6) + 1j * rng.uniform(0.3, 2.0, 6)
    here = ser.evaluate(zs)
    moved = ser.evaluate(zs + 1.0)
    assert np.max(np.abs(moved - here)) < 1e-13 * np.max(np.abs(here))


# ---------------------------------------------------------------------------
# direct quadrature vs series
# ---------------------------------------------------------------------------

def test_quadrature_agrees_with_series_at_random_points():
    ser = eichler_fourier_series([DELTA], (2,), kind="integral")
    rng = np.random.default_rng(20260214)
    zs = rng.uniform(-2.0, 2.0, 20) + 1j * (0.5 + rng.uniform(0.0, 3.0, 20))
    for z in zs:
        direct = eichler_integral_direct([DELTA], (2,), z)
        assert abs(direct.value - ser.evaluate(z)) < 1e-9
        assert abs(direct.value - ser.evaluate(z)) <= direct.err_abs + 1e-20


def test_quadrature_agrees_with_series_depth_two():
    ser = eichler_fourier_series([DELTA, DELTA], (1, 11), kind="integral")
    for z in (0.4 + 0.8j, -1.1 + 0.5j, 2.3j):
        direct = eichler_integral_direct([DELTA, DELTA], (1, 11), z)
        assert abs(direct.value - ser.evaluate(z)) < 1e-9


def test_integrand_eval_matches_its_series():
    ser = eichler_fourier_series([DELTA, DELTA], (11,), kind="integrand")
    z = 0.2 + 0.9j
    direct = eichler_integrand_eval([DELTA, DELTA], (11,), z)
    assert abs(direct.value - ser.evaluate(z)) <= direct.err_abs + 1e-15 * abs(
        direct.value
    )


def test_integrand_eval_single_form_is_the_form():
    z = 0.3 + 0.7j
    got = eichler_integrand_eval([DELTA], (), z)
    want = forms.evaluate_form(DELTA, z)
    assert abs(got.value - want.value) < 1e-16 * abs(want.value) + 1e-30


# ---------------------------------------------------------------------------
# base points
# ---------------------------------------------------------------------------

def test_value_at_the_base_point_is_zero():
    res = eichler_integral_direct([DELTA], (3,), 1j, a=1j)
    assert res.value == 0 and res.err_abs == 0.0


def test_cusp_base_decomposes_through_period_integrals():
    # same kernel, split at the full axis: I_0^z = I_inf^z - (M(2) - z M(1))
    z = 0.3 + 1.2j
    d0 = eichler_integral_direct([DELTA], (2,), z, a=0)
    dinf = eichler_integral_direct([DELTA], (2,), z)
    m2 = period_integral_direct([DELTA], (2.0,))
    m1 = period_integral_direct([DELTA], (1.0,))
    want = dinf.value - (m2.value - z * m1.value)
    tol = d0.err_abs + dinf.err_abs + m2.err_abs + abs(z) * m1.err_abs
    assert abs(d0.value - want) <= tol + 1e-18


def test_interior_base_decomposes_against_infinity_base():
    # (z1 - z) = (z1 - i) + (i - z) expands the kernel about the new base
    z = 0.3 + 1.2j
    di = eichler_integral_direct([DELTA], (2,), z, a=1j)
    dinf = eichler_integral_direct([DELTA], (2,), z)
    t1 = eichler_integral_direct([DELTA], (2,), 1j)
    t2 = eichler_integral_direct([DELTA], (1,), 1j)
    want = dinf.value - (t1.value + (1j - z) * t2.value)
    assert abs(di.value - want) < 1e-18


def test_kernel_free_integral_is_path_additive():
    z = 0.3 + 1.2j
    whole = eichler_integral_direct([DELTA], (1,), z, a=0)
    first = eichler_integral_direct([DELTA], (1,), 1j, a=0)
    second = eichler_integral_direct([DELTA], (1,), z, a=1j)
    assert abs(whole.value - (first.value + second.value)) < 1e-17


def test_base_point_validation():
    with pytest.raises(DomainError):
        eichler_integral_direct([DELTA], (2,), 1j, a=0.5)
    with pytest.raises(DomainError):
        eichler_integral_direct([DELTA], (2,), 1j, a=0.5 - 1j)
    with pytest.raises(DomainError):
        eichler_integral_direct([DELTA], (2,), 0.5 - 1j)
    with pytest.raises(DomainError):
        eichler_integral_direct([DELTA], (2,), 0.01j, a=0)
    with pytest.raises(DomainError):
        eichler_integral_direct([DELTA], (1.5,), 1j)


# ---------------------------------------------------------------------------
# period integrals
# ---------------------------------------------------------------------------

def _classical_completed(s: complex) -> complex:
    """Incomplete-gamma form of the weight-12 completed series, valid at all s."""
    tot = 0j
    for m in range(1, 600):
        x = TWO_PI * m
        tot += TAU[m].real * (
            branch_pow(x, -s) * upper_incomplete_gamma(s, x)
            + branch_pow(x, s - 12.0) * upper_incomplete_gamma(12.0 - s, x)
        )
    return tot


@pytest.mark.parametrize("s", [6.0, 8.5, 11.0, 4.0 + 2.0j])
def test_period_integral_matches_incomplete_gamma_sum(s):
    got = period_integral_direct([DELTA], (s,))
    want = -cmath.exp(1j * math.pi * s / 2.0) * _classical_completed(s)
    assert abs(got.value - want) / abs(want) < 1e-9
    assert abs(got.value - want) <= got.err_abs + 1e-14 * abs(want)


def test_period_integral_robust_to_path_parameters():
    base = period_integral_direct([DELTA], (8.5,), VerticalPathSpec())
    moved = period_integral_direct(
        [DELTA], (8.5,), VerticalPathSpec(T=16.0, eps=0.025)
    )
    assert abs(base.value - moved.value) <= base.err_abs + moved.err_abs


def test_period_depth_guard():
    with pytest.raises(CostGuardError):
        period_integral_direct([DELTA] * 4, (2.0, 2.0, 2.0, 2.0))


def test_period_integrand_eval_runs():
    res = period_integrand_eval([DELTA, DELTA], (11,), 0.2 + 0.9j, a=0)
    assert np.isfinite(res.err_abs)
    single = period_integrand_eval([DELTA], (), 0.2 + 0.9j)
    want = forms.evaluate_form(DELTA, 0.2 + 0.9j).value
    assert abs(single.value - want) < 1e-15 * abs(want)


# ---------------------------------------------------------------------------
# vertical Mellin transform
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("s", [2.3, 0.7, 5.0 + 1.5j])
def test_mellin_single_term_oracle(s):
    one = FourierSeries(period=1.0, coefficients=np.array([0.0, 1.0], dtype=complex))
    got = mellin_vertical(one, s, VerticalPathSpec(tol=1e-13))
    want = -cmath.exp(1j * math.pi * s / 2.0) * branch_pow(TWO_PI, -s) * gamma_complex(s)
    assert abs(got.value - want) / abs(want) < 1e-12
    assert abs(got.value - want) <= got.err_abs


def test_mellin_termwise_exact_on_finite_polynomials():
    rng = np.random.default_rng(31)
    coeffs = np.concatenate(
        [[0.0], rng.normal(size=8) + 1j * rng.normal(size=8)]
    )
    ser = FourierSeries(period=1.0, coefficients=coeffs)
    for s in (1.5, 3.0 + 2.0j, 0.25):
        got = mellin_vertical(ser, s)
        want = 0j
        for l in range(1, 9):
            kl = TWO_PI * l
            want += (
                -cmath.exp(1j * math.pi * s / 2.0)
                * coeffs[l]
                * branch_pow(kl, -s)
                * gamma_complex(s)
            )
        assert abs(got.value - want) / abs(want) < 1e-12


def test_mellin_uses_series_period():
    # stretching the period rescales the transform by per**s
    coeffs = np.array([0.0, 1.0], dtype=complex)
    base = mellin_vertical(FourierSeries(period=1.0, coefficients=coeffs), 2.5)
    wide = mellin_vertical(FourierSeries(period=3.0, coefficients=coeffs), 2.5)
    assert abs(wide.value - base.value * 3.0 ** 2.5) / abs(wide.value) < 1e-11


def test_mellin_agrees_with_blind_quadrature():
    ser = eichler_fourier_series([DELTA], (), kind="integrand")
    for s in (6.0, 8.5):
        a = mellin_vertical(ser, s, VerticalPathSpec(tol=1e-11))
        b = mellin_vertical_quadrature(
            ser.evaluate, s, VerticalPathSpec(tol=1e-11), cusp_decay=ser.cusp_decay
        )
        assert abs(a.value - b.value) / abs(a.value) < 1e-9


def test_mellin_robust_to_path_parameters():
    ser = eichler_fourier_series([DELTA, DELTA], (11,), kind="integrand")
    a = mellin_vertical(ser, 2.5, VerticalPathSpec())
    b = mellin_vertical(ser, 2.5, VerticalPathSpec(T=16.0, eps=0.025))
    assert abs(a.value - b.value) <= a.err_abs + b.err_abs
    assert abs(a.value - b.value) < 1e-9 * max(1.0, abs(a.value))


def test_mellin_cusp_bound_keeps_error_finite_at_negative_s():
    ser = eichler_fourier_series([DELTA, DELTA], (11,), kind="integrand")
    res = mellin_vertical(ser, -1.5)
    assert np.isfinite(res.err_abs)


def test_mellin_without_cusp_data_reports_unbounded_error():
    # infinite series, no decay certificate: the near-cusp piece is a guess
    ser = eichler_fourier_series([DELTA, DELTA], (11,), kind="integrand")
    stripped = FourierSeries(
        period=ser.period,
        coefficients=ser.coefficients,
        prefactor=ser.prefactor,
        growth=ser.growth,
        cusp_decay=None,
    )
    res = mellin_vertical(stripped, 2.5)
    assert math.isinf(res.err_abs)


def test_finite_polynomial_below_zero_sigma_diverges_honestly():
    ser = FourierSeries(period=1.0, coefficients=np.array([0.0, 1.0], dtype=complex))
    res = mellin_vertical(ser, -0.5)
    assert math.isinf(res.err_abs)


# ---------------------------------------------------------------------------
# antiderivative words
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("alphas", [(2,), (4,), (1, 1), (2, 2), (1, 2)])
def test_word_route_matches_direct_route(alphas):
    fs = [DELTA] * len(alphas)
    for z in (0.2 + 0.7j, -0.4 + 1.1j):
        word = antiderivative_word_integral(fs, alphas, z)
        tilde = eichler_integral_direct(fs, alphas, z)
        scale = max(abs(tilde.value), 1e-30)
        assert abs(word.value - tilde.value) / scale < 1e-8
        assert abs(word.value - tilde.value) <= word.err_abs + tilde.err_abs + 1e-25


def test_word_route_from_interior_base():
    word = antiderivative_word_integral([DELTA], (3,), 0.5 + 1.3j, a=1j)
    tilde = eichler_integral_direct([DELTA], (3,), 0.5 + 1.3j, a=1j)
    assert abs(word.value - tilde.value) <= word.err_abs + tilde.err_abs + 1e-25


def test_word_cost_guard():
    with pytest.raises(CostGuardError):
        antiderivative_word_integral([DELTA, DELTA], (4, 3), 1j)


def test_word_at_base_is_zero():
    assert antiderivative_word_integral([DELTA], (2,), 2j, a=2j).value == 0
