import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from membranecalc.expr import ExprError
from membranecalc.genfun import GenPoint, Representative
from membranecalc.gennum import EpsilonGrid, GenNet, Kind, alpha
from membranecalc.pde import (FunctionSolution, MarginError, SourceDomainError, TransportProblem,
                              WaveProblem, bump, residual_check, transport_solve, wave_energy,
                              wave_solve)

GRID = EpsilonGrid.default()
E = GRID.samples
TAIL = GRID.tail_slice


def probes(n=1, count=5, seed=3):
    rng = np.random.default_rng(seed)
    return [(rng.uniform(-2, 2, n), float(rng.uniform(0.2, 2.0))) for _ in range(count)]


class TestTransport:
    def test_zero_velocity_keeps_data(self):
        sol = transport_solve(TransportProblem.parse([0.0], "sin(x1) + x1^2"))
        np.testing.assert_array_equal(sol([0.7], 3.0).values, math.sin(0.7) + 0.49)

    def test_linear_data(self):
        sol = transport_solve(TransportProblem.parse([1.0], "x1"))
        np.testing.assert_array_equal(sol([0.75], 0.25).values, 0.5)
        x = GenNet(GRID, 1 + E)
        np.testing.assert_allclose(sol(GenPoint(x), alpha(1)).values, 1.0, rtol=1e-15)

    def test_source_term(self):
        p = TransportProblem.parse([1.0], "0", "x1")
        sol = transport_solve(p)
        for x, t in [(0.3, 0.5), (-1.0, 2.0), (1.5, 0.1)]:
            # int_{-t}^0 (x + s) ds = x t - t^2/2
            np.testing.assert_allclose(sol([x], t).values, x * t - t * t / 2, atol=1e-12)
        rep = residual_check(sol, p, probes())
        assert rep.scaled.kind is Kind.NULL

    def test_linear_solution_residual_vanishes(self):
        p = TransportProblem.parse([1.0], "x1")
        rep = residual_check(FunctionSolution.parse("x1 - t"), p, probes())
        assert np.max(rep.residual.values) <= 1e-9
        assert rep.scaled.kind is Kind.NULL

    def test_smooth_solution_is_accepted(self):
        p = TransportProblem.parse([1.0], "sin(x1)")
        rep = residual_check(transport_solve(p), p, probes())
        assert rep.scaled.kind is Kind.NULL
        # truncation error of order h^2 with an eps-independent constant
        assert np.max(rep.residual.values) <= 1e-8

    def test_wrong_candidate_is_rejected(self):
        p = TransportProblem.parse([1.0], "sin(x1)")
        rep = residual_check(FunctionSolution.parse("sin(x1 + t)"), p, probes())
        assert rep.scaled.kind is not Kind.NULL
        assert rep.raw.kind is not Kind.NULL
        assert rep.scaled.estimated_valuation == pytest.approx(0, abs=1e-6)

    def test_generalized_velocity(self):
        p = TransportProblem.parse([alpha(-1)], "sin(x1)")
        sol = transport_solve(p)
        np.testing.assert_allclose(sol([0.2], 0.5).values, np.sin(0.2 - 0.5 / E), atol=1e-12)

    def test_margin(self):
        p = TransportProblem.parse([1.0], "x1")
        with pytest.raises(MarginError):
            residual_check(transport_solve(p), p, [([0.0], 1e-5)])

    def test_source_domain(self):
        p = TransportProblem.parse([1.0], "0", "x1", a=1.0)
        sol = transport_solve(p)
        with pytest.raises(SourceDomainError):
            sol.values(np.zeros((len(GRID), 1)), np.full(len(GRID), -2.0))

    def test_source_signature(self):
        with pytest.raises(ExprError):
            TransportProblem.parse([1.0, 2.0], "x1*x2", "x3*t")
        g = Representative.parse("x1", 1)
        with pytest.raises(ValueError):
            TransportProblem(GenNet.constant(np.array([1.0])), g, Representative.parse("x1", 1))

    def test_negative_time(self):
        sol = transport_solve(TransportProblem.parse([1.0], "x1"))
        with pytest.raises(ValueError):
            sol([0.0], -1.0)


class TestWave:
    def test_position_only(self):
        sol = wave_solve(WaveProblem.parse("x1", "0"))
        np.testing.assert_allclose(sol([0.3], 0.7).values, 0.3, rtol=1e-14)

    def test_velocity_only(self):
        sol = wave_solve(WaveProblem.parse("0", "1"))
        np.testing.assert_allclose(sol([0.3], 0.7).values, 0.7, rtol=1e-14)

    def test_sine(self):
        sol = wave_solve(WaveProblem.parse("sin(x1)", "0"))
        for x, t in [(0.3, 0.7), (-2.0, 3.0)]:
            np.testing.assert_allclose(sol([x], t).values, math.sin(x) * math.cos(t), atol=1e-10)

    def test_residual(self):
        p = WaveProblem.parse("sin(x1)", "cos(2*x1)")
        rep = residual_check(wave_solve(p), p, probes())
        assert rep.scaled.kind is Kind.NULL

    def test_wrong_wave_candidate(self):
        p = WaveProblem.parse("sin(x1)", "0")
        rep = residual_check(FunctionSolution.parse("sin(x1)*cos(2*t)"), p, probes())
        assert rep.scaled.kind is not Kind.NULL


# ------------------------------------------------------------ properties

def _g_classical(y):
    return np.sin(y[0]) * np.exp(-y[1] ** 2) + 0.5 * y[0] * y[1]


@settings(max_examples=5)
@given(st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_transport_matches_characteristics(b):
    p = TransportProblem.parse(list(b), "sin(x1)*exp(-(x2^2)) + 0.5*x1*x2")
    sol = transport_solve(p)
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = rng.uniform(-2, 2, 2)
        t = float(rng.uniform(0.1, 2))
        # follow the characteristic dX/ds = b from (x, t) back to time 0
        foot = solve_ivp(lambda s, y: np.asarray(b), (t, 0.0), x, rtol=1e-13, atol=1e-14).y[:, -1]
        np.testing.assert_allclose(sol(x, t).values, _g_classical(foot), atol=1e-10)


@given(st.floats(-2, 2), st.floats(0.1, 2), st.floats(-2, 2))
def test_superposition(x, t, b):
    g, f = "cos(x1)*x1", "x1*t + sin(t)"
    combined = transport_solve(TransportProblem.parse([b], g, f))([x], t)
    source_only = transport_solve(TransportProblem.parse([b], "0", f))([x], t)
    data_only = transport_solve(TransportProblem.parse([b], g))([x], t)
    assert np.array_equal(combined.values, (source_only + data_only).values)


@given(st.floats(0.05, 3.0), st.floats(0.02, 3.0), st.booleans())
def test_finite_speed(t, gap, left):
    sol = transport_solve(TransportProblem.parse([1.0], bump()))
    t_net = GenNet(GRID, t + E)
    offset = (1.01 + gap) * (-1 if left else 1)
    x_net = t_net + offset
    w = sol(GenPoint(x_net), t_net).values
    assert np.all(np.abs(w[TAIL]) <= 1e-12)


def test_bump_is_positive_inside():
    sol = transport_solve(TransportProblem.parse([1.0], bump()))
    assert np.all(sol([1.0], 1.0).values == pytest.approx(math.exp(-1)))


@pytest.mark.parametrize("g,h", [("exp(-(x1^2))", "0"), ("0", "x1*exp(-(x1^2))"),
                                 ("sin(x1)*exp(-(x1^2)/4)", "exp(-(x1^2))")])
def test_wave_energy_is_conserved(g, h):
    p = WaveProblem.parse(g, h)
    e0, e1 = wave_energy(p, 0.0).values, wave_energy(p, 1.0).values
    assert np.max(np.abs(e0 - e1)) <= 1e-6
    assert np.all(e0 > 0)
