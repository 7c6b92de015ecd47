import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from membranecalc import expr as ex
from membranecalc.genfun import (CompactnessError, GenPoint, ModeratenessError, Representative,
                                 derivative_along_curve, evaluate_at, gradient)
from membranecalc.gennum import EpsilonGrid, GenNet, Kind, alpha, classify
from membranecalc.membrane import History

GRID = EpsilonGrid.default()
E = GRID.samples


class TestEvaluateAt:
    def test_identity_at_gauge_point(self):
        f = Representative.parse("x1", 1)
        np.testing.assert_array_equal(evaluate_at(f, GenPoint(alpha(1))).values, E)

    def test_scaled_linear_at_classical_point(self):
        f = Representative.parse("eps*x1", 1)
        np.testing.assert_allclose(evaluate_at(f, GenPoint.of([0.5])).values, 0.5 * E, rtol=1e-15)

    def test_square_at_constant(self):
        f = Representative.parse("x1^2", 1)
        assert np.all(evaluate_at(f, GenPoint.of([3.0])).values == 9.0)

    def test_point_outside_domain(self):
        f = Representative.parse("x1", 1, domain=[[-1, 1]])
        with pytest.raises(CompactnessError):
            evaluate_at(f, GenPoint.of([2.0]))

    def test_point_leaving_its_box_lists_samples(self):
        with pytest.raises(CompactnessError) as info:
            GenPoint(alpha(-1), compact_box=[[0, 5]])
        assert len(info.value.offending) == GRID.tail_len

    def test_arity_mismatch(self):
        f = Representative.parse("x1*x2", 2)
        with pytest.raises(ValueError):
            evaluate_at(f, GenPoint.of([1.0]))

    def test_complex_variable(self):
        f = Representative.parse("z^2", 1, codomain="complex")
        out = evaluate_at(f, GenNet.constant(1j))
        assert np.allclose(out.values, -1)


class TestRepresentative:
    def test_undeclared_variable(self):
        with pytest.raises(ex.ExprError):
            Representative.parse("x1 + x3", 2)

    def test_superpolynomial_growth_rejected(self):
        with pytest.raises(ModeratenessError):
            Representative.parse("exp(1/eps)", 1)

    def test_json_round_trip(self):
        f = Representative.parse("sin(x1)/eps", 1, domain=[[-2, 2]])
        g = Representative.from_json(f.to_json())
        assert str(g) == str(f) and np.array_equal(g.domain_box, f.domain_box)


class TestGradient:
    def test_quadratic(self):
        assert [str(g.body) for g in gradient(Representative.parse("x1^2 + x2^2", 2))] == ["2*x1", "2*x2"]

    def test_linear_in_eps(self):
        assert [str(g.body) for g in gradient(Representative.parse("eps*x1", 1))] == ["eps"]

    def test_oscillating(self):
        g = gradient(Representative.parse("sin(x1/eps)", 1))[0]
        assert str(g.body) == "cos(x1/eps)/eps"
        assert g.domain_box.tolist() == [[-10.0, 10.0]]


class TestCurveDerivative:
    def test_classical_line(self):
        f = Representative.parse("x1^2", 1)
        d = derivative_along_curve(f, History.parse(["t"]), 0.4)
        np.testing.assert_allclose(d.values, 0.8, rtol=1e-15)

    def test_identity_reads_velocity(self):
        f = Representative.parse("x1", 1)
        gamma = History.parse(["sin(3*t)*eps"], growth=(3.0, 0))
        d = derivative_along_curve(f, gamma, 0.2)
        np.testing.assert_allclose(d.values, 3 * np.cos(0.6) * E, rtol=1e-14)

    def test_scaled_line(self):
        f = Representative.parse("x1^2", 1)
        d = derivative_along_curve(f, History.parse(["eps*t"]), 1.0)
        # 2 * (eps * 1) * eps, applied by hand
        np.testing.assert_allclose(d.values, 2 * alpha(2).values, rtol=1e-14)
        assert classify(d).estimated_valuation == pytest.approx(2, abs=1e-9)

    def test_curve_outside_domain(self):
        f = Representative.parse("x1", 1, domain=[[-1, 1]])
        with pytest.raises(CompactnessError):
            derivative_along_curve(f, History.parse(["3*t"], growth=(3.0, 0)), 0.5)

    def test_t0_range(self):
        with pytest.raises(ValueError):
            derivative_along_curve(Representative.parse("x1", 1), History.parse(["t"]), 1.5)


COEF = st.integers(-3, 3)
POLY_F = st.tuples(COEF, COEF, COEF, COEF, COEF).map(
    lambda c: f"{c[0]}*x1^2 + {c[1]}*x1*x2 + {c[2]}*x2^3 + {c[3]}*eps*x1 + {c[4]}")
CURVE = st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).map(
    lambda c: [f"{c[0]}*t^2 + {c[1]}*eps*t", f"{c[2]}*t^3 + 0.5*t + eps"])


@settings(max_examples=20)
@given(POLY_F, CURVE, st.floats(0.05, 0.95))
def test_chain_rule_matches_finite_difference(body, curve, t0):
    f = Representative.parse(body, 2, check=False)
    gamma = History.parse(curve, growth=(10.0, 0))
    d = derivative_along_curve(f, gamma, t0)
    h = 1e-6
    pts = gamma.points(np.array([t0 - h, t0 + h]))
    vals = f.values(E[:, None], pts[..., 0], pts[..., 1])
    fd = (vals[:, 1] - vals[:, 0]) / (2 * h)
    tail = GRID.tail_slice
    assert np.all(np.abs(fd[tail] - d.values[tail]) <= 1e-4 * np.maximum(1.0, np.abs(d.values[tail])))


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-2, 2))
def test_evaluation_is_linear(a, b, x):
    f, g = "sin(x1)/eps", "x1^2*eps"
    combo = Representative.parse(f"({a})*({f}) + ({b})*({g})", 1, check=False)
    p = GenPoint.of([x])
    lhs = evaluate_at(combo, p).values
    rhs = a * evaluate_at(Representative.parse(f, 1), p).values + b * evaluate_at(Representative.parse(g, 1), p).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.max(np.abs(rhs), initial=1.0))


@given(st.sampled_from(["1", "x1^2 + 3", "x1^5 - 2*x1"]), st.floats(-5, 5),
       st.sampled_from([0.0, 1.0, -0.5]))
def test_null_factor_survives_evaluation(poly, x, r):
    f = Representative.parse(f"exp(-1/eps)*({poly})", 1)
    point = GenPoint(GenNet.constant(x) + alpha(1).scale(r)) if r else GenPoint.of([x])
    assert classify(evaluate_at(f, point)).kind is Kind.NULL
