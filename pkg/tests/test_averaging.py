"""Reduced-equation coefficients, averaged moments, cycle prediction."""

import math
from fractions import Fraction

import numpy as np
import pytest

from polycycle.averaging import (
    FORMULA_VARIANTS,
    cycle_curve,
    g_coefficients,
    p3_q3,
    predict_cycle,
)
from polycycle.change_of_variables import ChangeOfVariables
from polycycle.inversion import invert_to_cubic
from polycycle.monomials import as_fraction_matrix
from polycycle.system import build_system, hopf_indicator


def test_p3_q3_basis_vectors():
    # only the z'^3 slot feeds p3 at that weight; only z^3 feeds q3
    assert p3_q3((0, 0, 0, 1), 1.0) == (pytest.approx(-3.0 / 8.0), 0.0)
    assert p3_q3((1, 0, 0, 0), 1.0) == (0.0, pytest.approx(3.0 / 8.0))
    assert p3_q3((0, 0, 0, 0), 2.0) == (0.0, 0.0)


def test_p3_q3_closed_form_general_delta():
    rng = np.random.default_rng(43)
    for _ in range(10):
        g = rng.uniform(-2, 2, size=4)
        d = float(rng.uniform(0.25, 4.0))
        sd = math.sqrt(d)
        p3, q3 = p3_q3(g, d)
        assert p3 == pytest.approx(-(sd / 8) * g[1] - (3 * d * sd / 8) * g[3], rel=1e-14)
        assert q3 == pytest.approx((3 / 8) * g[0] + (d / 8) * g[2], rel=1e-14)


def test_p3_q3_validation():
    with pytest.raises(ValueError):
        p3_q3((1, 2, 3, 4), 0.0)
    with pytest.raises(ValueError):
        p3_q3((1, 2, 3), 1.0)


def test_p3_q3_against_quadrature():
    scipy_integrate = pytest.importorskip("scipy.integrate")
    rng = np.random.default_rng(47)

    def integrand(phi, g, d, weight):
        sd = math.sqrt(d)
        z, dz = math.cos(phi), -sd * math.sin(phi)
        val = g[0] * z**3 + g[1] * z * z * dz + g[2] * z * dz * dz + g[3] * dz**3
        return val * weight(phi)

    for _ in range(25):
        g = rng.uniform(-2, 2, size=4)
        d = float(rng.uniform(0.25, 4.0))
        p_ref = scipy_integrate.quad(
            integrand, 0, 2 * math.pi, args=(g, d, math.sin), epsabs=1e-12, epsrel=1e-12
        )[0] / (2 * math.pi)
        q_ref = scipy_integrate.quad(
            integrand, 0, 2 * math.pi, args=(g, d, math.cos), epsabs=1e-12, epsrel=1e-12
        )[0] / (2 * math.pi)
        p3, q3 = p3_q3(g, d)
        assert p3 == pytest.approx(p_ref, abs=1e-10)
        assert q3 == pytest.approx(q_ref, abs=1e-10)


def test_predict_cycle_reference_case():
    pred = predict_cycle(-0.1, 1.0, -3.0 / 8.0, 0.0)
    assert pred.exists
    assert pred.r0 == pytest.approx(math.sqrt(4.0 / 3.0))
    assert pred.omega0 == pytest.approx(1.0)
    assert pred.z_amplitude == pytest.approx(math.sqrt(0.1) * math.sqrt(4.0 / 3.0))
    assert pred.stability == "unstable_subcritical"
    assert not pred.degenerate


def test_predict_cycle_sign_mismatch_means_no_cycle():
    pred = predict_cycle(0.1, 1.0, -3.0 / 8.0, 0.0)
    assert not pred.exists
    assert pred.r0 is None and pred.z_amplitude is None
    assert pred.stability is None


def test_predict_cycle_degenerate_when_p3_vanishes():
    pred = predict_cycle(0.1, 1.0, 0.0, 0.2)
    assert not pred.exists
    assert pred.stability == "undetermined"
    assert pred.degenerate


def test_predict_cycle_validation():
    with pytest.raises(ValueError):
        predict_cycle(0.1, -1.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        predict_cycle(0.1, 1.0, 0.5, 0.0, variant="other")


def test_variant_amplitudes_differ_by_quarter_power_of_delta():
    tau, delta, p3, q3 = 0.1, 4.0, 0.5, 0.2
    a = predict_cycle(tau, delta, p3, q3, variant="scaled")
    b = predict_cycle(tau, delta, p3, q3, variant="unscaled")
    assert set(FORMULA_VARIANTS) == {"scaled", "unscaled"}
    assert b.r0 / a.r0 == pytest.approx(delta**0.25)
    assert a.omega0 == pytest.approx(1.0 - (tau / (2 * math.sqrt(delta))) * (q3 / p3))
    assert b.omega0 == pytest.approx(1.0 - (tau / 2.0) * (q3 / p3))


def test_g_rows_vanish_for_linear_triangular_change(normal_form_system):
    # Theta = 0 and phi = 0 leave nothing to feed the nonlinear rows
    system = build_system(normal_form_system.jac)
    eye = as_fraction_matrix([[1, 0], [0, 1]])
    cov = ChangeOfVariables(gamma_params=(Fraction(1), Fraction(0)), gamma=eye, thetas={})
    g = g_coefficients(system, cov, invert_to_cubic(cov))
    assert all(x == 0 for x in g.g2)
    assert all(x == 0 for x in g.g3)


def test_g2_reduces_to_field_row_for_identity_gamma():
    # with Gamma = I and Theta = 0, G2 is just the second row of phi2
    jac = [[0, -1], [1, 0]]
    phi2 = [[1, 2, 3], [4, 5, 6]]
    system = build_system(jac, [phi2])
    eye = as_fraction_matrix([[1, 0], [0, 1]])
    cov = ChangeOfVariables(gamma_params=(Fraction(1), Fraction(0)), gamma=eye, thetas={})
    g = g_coefficients(system, cov, invert_to_cubic(cov))
    assert list(g.g2) == [Fraction(4), Fraction(5), Fraction(6)]
    assert all(x == 0 for x in g.g3)


def test_g_rows_for_the_cubic_normal_form(normal_form_system, normal_form_cov, normal_form_inverse):
    g = g_coefficients(normal_form_system, normal_form_cov, normal_form_inverse)
    delta = hopf_indicator(normal_form_system).delta
    alpha = Fraction(1, 20)
    assert list(g.g2) == [0, 0, 0]
    assert list(g.g3) == [0, -2 * delta, 4 * alpha, -2]


def test_prediction_for_the_cubic_normal_form(normal_form_system, normal_form_cov, normal_form_inverse):
    ind = hopf_indicator(normal_form_system)
    g = g_coefficients(normal_form_system, normal_form_cov, normal_form_inverse)
    delta = float(ind.delta)
    p3, q3 = p3_q3(g.g3, delta)
    # closed forms for this family: p3 = delta^(3/2), q3 = alpha delta / 2
    assert p3 == pytest.approx(delta**1.5, rel=1e-14)
    assert q3 == pytest.approx(0.05 * delta / 2.0, rel=1e-14)
    pred = predict_cycle(float(ind.tau), delta, p3, q3)
    assert pred.exists and pred.stability == "stable_supercritical"
    # z-amplitude sqrt(alpha/delta), the exact cycle radius over sqrt(delta)
    assert pred.z_amplitude == pytest.approx(math.sqrt(0.05 / delta), rel=1e-12)


def test_cycle_curve_single_sample(normal_form_cov, normal_form_system, normal_form_inverse):
    ind = hopf_indicator(normal_form_system)
    g = g_coefficients(normal_form_system, normal_form_cov, normal_form_inverse)
    p3, q3 = p3_q3(g.g3, float(ind.delta))
    pred = predict_cycle(float(ind.tau), float(ind.delta), p3, q3)
    point = cycle_curve(normal_form_cov, pred, sample_count=1)
    assert point.shape == (1, 3)
    assert point[0, 0] == 0.0
    gamma_inv = np.linalg.inv(np.asarray(normal_form_cov.gamma.tolist(), dtype=float))
    rate = math.sqrt(float(ind.delta)) * pred.omega0
    expected = gamma_inv @ np.array([0.0, pred.z_amplitude * rate])
    np.testing.assert_allclose(point[0, 1:], expected, rtol=1e-12)


def test_cycle_curve_spacing_and_validation(normal_form_cov, normal_form_system, normal_form_inverse):
    ind = hopf_indicator(normal_form_system)
    g = g_coefficients(normal_form_system, normal_form_cov, normal_form_inverse)
    p3, q3 = p3_q3(g.g3, float(ind.delta))
    pred = predict_cycle(float(ind.tau), float(ind.delta), p3, q3)
    curve = cycle_curve(normal_form_cov, pred, sample_count=64)
    assert curve.shape == (64, 3)
    period = 2.0 * math.pi / (math.sqrt(pred.delta) * pred.omega0)
    steps = np.diff(curve[:, 0])
    np.testing.assert_allclose(steps, period / 64, rtol=1e-12)

    none = predict_cycle(0.1, 1.0, -0.5, 0.0)
    with pytest.raises(ValueError):
        cycle_curve(normal_form_cov, none)
    with pytest.raises(ValueError):
        cycle_curve(normal_form_cov, pred, sample_count=0)
