import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from membranecalc.genfun import Representative
from membranecalc.gennum import EpsilonGrid, GenNet, Kind, alpha, classify
from membranecalc.holo import (ContourSetup, DivergenceRiskError, HypothesisError, cauchy_eval,
                               distance_to_history, taylor_coefficients, taylor_eval)
from membranecalc.membrane import History, circle

GRID = EpsilonGrid.default()
E = GRID.samples


def zrep(body):
    return Representative.parse(body, 1, codomain="complex")


def setup_for(body, center=0, radius=1.0, z0=0):
    return ContourSetup.build(zrep(body), circle(center, radius), z0)


class TestDistance:
    def test_origin_to_unit_circle(self):
        np.testing.assert_allclose(distance_to_history(0, circle(0, 1.0)).values, 1.0, rtol=1e-14)

    @pytest.mark.parametrize("s", [0.5, 1.0, 3.0])
    def test_shrinking_circle(self, s):
        d = distance_to_history(0, circle(0, alpha(s)))
        np.testing.assert_allclose(d.values, E ** s, rtol=1e-12)
        c = classify(d)
        assert c.kind is Kind.INVERTIBLE and c.estimated_valuation == pytest.approx(s, abs=1e-9)

    def test_point_on_curve(self):
        d = distance_to_history(1.0, circle(0, 1.0))
        assert classify(d).kind is Kind.NULL
        with pytest.raises(HypothesisError):
            setup_for("exp(z)", z0=1.0)

    def test_general_point(self):
        d = distance_to_history(0.3 + 0.4j, circle(0, 1.0))
        np.testing.assert_allclose(d.values, 0.5, rtol=1e-12)


class TestCauchy:
    def test_exp_at_origin(self):
        r = cauchy_eval(setup_for("exp(z)"))
        np.testing.assert_allclose(r.via_contour.values, 1.0, atol=1e-13)
        np.testing.assert_allclose(r.direct.values, 1.0)
        assert r.gap_class.kind is Kind.NULL

    def test_square(self):
        r = cauchy_eval(setup_for("z^2", z0=0.3))
        np.testing.assert_allclose(r.via_contour.values, 0.09, atol=1e-13)
        np.testing.assert_allclose(r.direct.values, 0.09, rtol=1e-14)
        assert r.gap_class.kind is Kind.NULL

    def test_scaled_linear(self):
        r = cauchy_eval(setup_for("z/eps", z0=0.5))
        # per-eps linearity: 0.5 / eps
        np.testing.assert_allclose(r.via_contour.values, 0.5 / E, rtol=1e-12)
        np.testing.assert_allclose(r.direct.values, 0.5 / E, rtol=1e-14)
        assert r.gap_class.kind is Kind.NULL

    def test_shrinking_contour_about_generalized_centre(self):
        z0 = GenNet(GRID, 0.1 * E + 0j)
        gamma = circle(z0, alpha(1))
        r = cauchy_eval(ContourSetup.build(zrep("exp(z)"), gamma, z0))
        assert r.gap_class.kind is Kind.NULL

    def test_outside_point_rejected(self):
        with pytest.raises(HypothesisError, match="winding"):
            ContourSetup.build(zrep("exp(z)"), circle(3.0, 1.0), 0.0)

    def test_clockwise_rejected(self):
        cw = History.parse(["cos(2*pi*t)", "-sin(2*pi*t)"], growth=(7, 0), closed=True)
        with pytest.raises(HypothesisError):
            ContourSetup.build(zrep("exp(z)"), cw, 0)

    def test_non_holomorphic_rejected(self):
        with pytest.raises(HypothesisError, match="Cauchy-Riemann"):
            setup_for("re(z)")

    def test_real_representative_rejected(self):
        with pytest.raises(ValueError):
            ContourSetup.build(Representative.parse("x1", 1), circle(0, 1.0), 0)


class TestTaylor:
    def test_square_coefficients(self):
        coeffs = taylor_coefficients(setup_for("z^2"), 5)
        for n, a in enumerate(coeffs):
            np.testing.assert_allclose(a.values, 1.0 if n == 2 else 0.0, atol=1e-10)

    def test_exp_coefficients(self):
        coeffs = taylor_coefficients(setup_for("exp(z)"), 10)
        for n, a in enumerate(coeffs):
            np.testing.assert_allclose(a.values, 1 / math.factorial(n), atol=1e-9)

    def test_geometric_coefficients(self):
        f = Representative.parse("1/(1 - z)", 1, codomain="complex", domain=[[-0.6, 0.6], [-0.6, 0.6]])
        coeffs = taylor_coefficients(ContourSetup.build(f, circle(0, 0.5), 0), 10)
        # residue calculus: 1/(1-z) = sum z^n
        for a in coeffs:
            np.testing.assert_allclose(a.values, 1.0, atol=1e-8)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            taylor_coefficients(setup_for("z"), -1)

    def test_eval_at_centre(self):
        setup = setup_for("exp(z)", z0=0.2)
        coeffs = taylor_coefficients(setup, 12)
        r = taylor_eval(setup, coeffs, 0.2)
        assert np.array_equal(r.series.values, coeffs[0].values)
        assert r.terms_used == 2
        assert r.gap_class.kind is Kind.NULL

    def test_eval_classical_point(self):
        setup = setup_for("exp(z)")
        r = taylor_eval(setup, taylor_coefficients(setup, 20), 0.1)
        np.testing.assert_allclose(r.series.values, math.exp(0.1), atol=1e-10)
        assert r.gap_class.kind is Kind.NULL and r.in_v_rho

    def test_eval_gauge_point(self):
        setup = setup_for("exp(z)")
        r = taylor_eval(setup, taylor_coefficients(setup, 20), alpha(1))
        np.testing.assert_allclose(r.direct.values, np.exp(E), rtol=1e-15)
        np.testing.assert_allclose(r.series.values, np.exp(E), rtol=1e-12)
        assert r.gap_class.kind is Kind.NULL
        assert r.distance_norm == pytest.approx(math.exp(-1))

    def test_far_point_refused(self):
        setup = setup_for("exp(z)")
        with pytest.raises(DivergenceRiskError):
            taylor_eval(setup, taylor_coefficients(setup, 20), 0.99)


ENTIRE = st.sampled_from(["exp(z)", "sin(z)", "z^3 - 2*z + 1", "cos(2*z)*z", "exp(z)*z^2"])


@settings(max_examples=15)
@given(ENTIRE, st.floats(0, 0.7), st.floats(0, 2 * math.pi))
def test_cauchy_gap_null_for_entire_functions(body, rad, angle):
    z0 = rad * complex(math.cos(angle), math.sin(angle))
    r = cauchy_eval(setup_for(body, z0=z0))
    assert r.gap_class.kind is Kind.NULL


@settings(max_examples=5)
@given(ENTIRE)
def test_coefficients_do_not_depend_on_radius(body):
    small = taylor_coefficients(setup_for(body, radius=0.5), 8)
    large = taylor_coefficients(setup_for(body, radius=1.0), 8)
    for a, b in zip(small, large):
        assert np.max(np.abs(a.values - b.values)) <= 1e-9


@pytest.mark.parametrize("body,z0", [("exp(z)", 0), ("z^2", 0.3), ("z/eps", 0.5), ("sin(z)", -0.2j)])
def test_leading_coefficient_is_the_contour_value(body, z0):
    setup = setup_for(body, z0=z0)
    assert np.array_equal(taylor_coefficients(setup, 3)[0].values, cauchy_eval(setup).via_contour.values)


def test_raising_order_keeps_earlier_coefficients():
    setup = setup_for("exp(z)*cos(z)", z0=0.1)
    short = taylor_coefficients(setup, 4)
    long = taylor_coefficients(setup, 9)
    for a, b in zip(short, long):
        assert np.array_equal(a.values, b.values)
