import math
import warnings

import numpy as np
import pytest

from todaq.quad import bessel_K_imag_order
from todaq.wavefunc import (FDNoiseWarning, _d2_contours, _d2_twoD, chi_a1, chi_a1_report,
                            eigen_residual, factorization_check, monte_carlo_dn, psi_d2, psi_dn)

LAM = (0.3, 0.7)


# A1 ----------------------------------------------------------------------

@pytest.mark.parametrize("nu", [0.25, 0.5, 1.0])
def test_a1_ratio_is_constant(nu):
    rep = chi_a1_report(nu)
    assert rep.spread < 1e-8
    # measured constant is -1 (the printed normalization claims +1)
    assert abs(rep.constant + 1) < 1e-8


def test_a1_zero_order_is_real_and_decays():
    vals = [chi_a1(0.0, y) for y in (0.0, 1.0, 2.0)]
    assert all(abs(v.imag) < 1e-12 for v in vals)
    assert abs(vals[0]) > abs(vals[1]) > abs(vals[2])
    # K_0(2e^2) tail, roughly exp(-2e^2)
    assert abs(vals[2]) < 1e-5


# D2 integral -------------------------------------------------------------

def test_d2_against_brute_force_trapezoid():
    # 1001 x 1001 uniform grid on the same contours, no adaptivity
    l1, l2, x21, x22 = 0.3, 0.7, 0.2, -0.1
    cs = _d2_contours("twoD", l2, 1.0)
    s = np.linspace(-10, 10, 1001)
    h = s[1] - s[0]
    za, _ = cs[0].path(s)
    zb, _ = cs[1].path(s)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        vals = _d2_twoD(l1, l2, x21, x22)(za[:, None], zb[None, :])
    brute = np.nansum(vals) * h * h
    nested = psi_d2(l1, l2, x21, x22).value
    assert abs(brute - nested) < 1e-9 * abs(nested)


@pytest.mark.parametrize("x21", [-0.5, 0.5])
@pytest.mark.parametrize("x22", [-0.4, 0.6])
@pytest.mark.parametrize("lam", [(0.3, 0.7), (-0.2, 0.45)])
def test_two_and_three_variable_forms_agree(lam, x21, x22):
    a = psi_d2(*lam, x21, x22, form="twoD").value
    b = psi_d2(*lam, x21, x22, form="threeD").value
    assert abs(a - b) < 1e-6 * abs(a)


def test_three_variable_form_rejects_l2_zero():
    with pytest.raises(ValueError):
        psi_d2(0.3, 0.0, 0.1, 0.1, form="threeD")


@pytest.mark.parametrize("x21,x22", [(0.1, 0.3), (-0.4, 0.8)])
def test_reflection_of_lambda1(x21, x22):
    # lambda_1 -> -lambda_1 is the D2 reflection x22 -> -x22
    a = psi_d2(-0.3, 0.7, x21, x22).value
    b = psi_d2(0.3, 0.7, x21, -x22).value
    assert abs(a - b) < 1e-9 * abs(a)


def test_reduced_function_finite_at_zero_spectrum():
    v = psi_d2(0.0, 0.0, 0.1, 0.2)
    assert math.isfinite(v.value.real) and abs(v.value) > 0
    assert v.error < 1e-9 * abs(v.value)


def test_wavepoint_record_schema():
    rec = psi_d2(*LAM, 0.0, 0.0).to_record()
    assert set(rec) == {"n", "lambda", "x", "value_re", "value_im", "error", "seconds"}


# factorization -----------------------------------------------------------

def test_factorization_constant_grid():
    rep = factorization_check(*LAM)
    assert rep.passed, rep.spread
    assert rep.constant == pytest.approx(rep.derived_constant, rel=1e-6)
    assert abs(rep.discrepancy) == pytest.approx(math.exp(4 * math.pi * LAM[1]), rel=1e-6)
    # printed half orders do not factor
    assert rep.printed_orders_spread > 1e-3


def test_factorization_at_lambda1_zero():
    rep = factorization_check(0.0, 0.5, grid=[(-1, 0), (0, 0), (0.5, -0.5), (1, 1)])
    assert rep.passed


def test_product_of_macdonald_oracle_value():
    # one point by hand: Psi = 4 e^{2 pi l2} K_{i(l2+l1)}(2e^{xi/2}) K_{i(l2-l1)}(2e^{-eta/2})
    l1, l2, xi, eta = 0.1, 0.4, 0.3, -0.2
    v = psi_d2(l1, l2, (eta - xi) / 2, (eta + xi) / 2).value
    ref = 4 * math.exp(2 * math.pi * l2) * bessel_K_imag_order(l2 + l1, 2 * math.exp(xi / 2)) \
        * bessel_K_imag_order(l2 - l1, 2 * math.exp(-eta / 2))
    assert abs(v - ref) < 1e-9 * abs(ref)


# eigen-equations ---------------------------------------------------------

def test_quadratic_eigen_residual():
    r = eigen_residual("quadratic", LAM, (0.1, -0.2))
    assert r.residual <= 1e-5
    assert r.eigenvalue == pytest.approx(0.5 * (0.09 + 0.49))


def test_quartic_eigen_residual():
    r = eigen_residual("quartic", LAM, (0.1, -0.2))
    assert r.residual <= 1e-4
    assert r.eigenvalue == pytest.approx(0.25 * 0.5 ** 2 * 0.2 ** 2)


def test_wrong_eigenvalue_is_detected():
    # sampler of a plane wave that solves neither operator
    r = eigen_residual("quadratic", LAM, (0.0, 0.0), sampler=lambda a, b: np.exp(0.3j * a))
    assert r.residual > 0.1


def test_degenerate_sampler():
    r = eigen_residual("quartic", LAM, (0.0, 0.0), sampler=lambda a, b: 0j)
    assert r.degenerate and math.isnan(r.residual)


def test_small_step_warns():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        eigen_residual("quartic", LAM, (0.1, -0.2), fd_step=1e-3)
    assert any(issubclass(x.category, FDNoiseWarning) for x in w)


def test_unknown_operator():
    with pytest.raises(ValueError):
        eigen_residual("cubic", LAM, (0, 0))


# generic recursion -------------------------------------------------------

@pytest.mark.parametrize("lam,x", [((0.3, 0.7), (0.2, -0.1)), ((0.0, 0.0), (0.1, 0.2)),
                                   ((-0.4, 0.25), (-0.3, 0.5))])
def test_recursion_matches_d2(lam, x):
    a = psi_dn(2, lam, x).value
    b = psi_d2(*lam, *x).value
    assert abs(a - b) < 1e-5 * abs(b)


def test_recursion_argument_checks():
    with pytest.raises(ValueError):
        psi_dn(4, (0, 0, 0, 0), (0, 0, 0, 0))
    with pytest.raises(ValueError):
        psi_dn(3, (0, 0), (0, 0, 0))


def test_frozen_plan_reuse():
    w = psi_dn(2, LAM, (0.2, -0.1))
    again = psi_dn(2, LAM, (0.2, -0.1), plan=w.plan)
    assert abs(again.value - w.value) < 1e-12 * abs(w.value)


@pytest.mark.slow
def test_d3_against_monte_carlo():
    lam, x = (0.2, 0.5, 0.4), (0.1, -0.2, 0.3)
    w = psi_dn(3, lam, x)
    assert np.isfinite(w.value) and w.seconds < 120
    est, se = monte_carlo_dn(3, lam, x)
    assert abs(est - w.value) < 4 * se
