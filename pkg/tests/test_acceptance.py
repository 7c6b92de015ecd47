"""Acceptance checks, one test per criterion. Run with ``-s`` to see the PASS/FAIL lines."""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from membranecalc.genfun import Representative
from membranecalc.gennum import EpsilonGrid, GenNet, Kind, alpha, classify, gap_class, sharp_norm, valuation
from membranecalc.holo import ContourSetup, cauchy_eval, taylor_coefficients, taylor_eval
from membranecalc.membrane import (Ball, Box, Indicator, Interval, NullPerturbation, ball_equivalence,
                                   circle, perturb, volume)
from membranecalc.pde import FunctionSolution, TransportProblem, WaveProblem, residual_check, transport_solve, wave_solve
from membranecalc.quad import green_check, interval_consistency, membrane_integral

import test_expr
import test_genfun

GRID = EpsilonGrid.default()
E = GRID.samples
NULL = GenNet.from_function(lambda e: np.exp(-1 / e), GRID)


@contextmanager
def criterion(number: int, title: str, limit: float | None = None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert limit is None or elapsed < limit, f"took {elapsed:.1f} s (limit {limit} s)"
    except BaseException as exc:
        print(f"\nFAIL criterion {number:2d}: {title}: {exc}")
        raise
    print(f"\nPASS criterion {number:2d}: {title} ({time.perf_counter() - start:.2f} s)")


def zrep(body, **kw):
    return Representative.parse(body, 1, codomain="complex", **kw)


def test_ball_volume_anchor():
    with criterion(1, "ball volume pi*eps^(2s)", limit=5.0):
        for s in (0.5, 1.0, 2.0):
            v = volume(Ball.of([0.0, 0.0], alpha(s)))
            assert classify(v).estimated_valuation == pytest.approx(2 * s, abs=0.05)
            np.testing.assert_allclose(v.values, math.pi * E ** (2 * s), rtol=1e-6)


def test_sharp_norm_anchor():
    with criterion(2, "sharp norm of x0/eps equals e"):
        for x0 in (1.0, -3.5, 0.02, 1e4):
            assert sharp_norm(alpha(-1) * x0) == pytest.approx(math.e, abs=1e-6)


def test_null_anchor():
    with criterion(3, "exp(-1/eps) is Null, eps^3 is Invertible"):
        assert classify(NULL).kind is Kind.NULL
        c = classify(alpha(3))
        assert c.kind is Kind.INVERTIBLE
        assert c.estimated_valuation == pytest.approx(3, abs=1e-6)


def _independence_catalog():
    ball = Ball.of([0.0, 0.0], alpha(1))
    box = Box.of([[0, 1], [0, 2]])
    yield ("x1^3 + 1", Interval.of(0.0, 1.0),
           NullPerturbation.parse(["exp(-1/eps)*sin(x1)"], [[0, 1]]))
    yield ("x1 + x1*x2^2", box,
           NullPerturbation.parse(["exp(-1/eps)*x1", "exp(-1/eps)"], box.compact_box))
    yield ("x1^2 + 1", ball,
           ball_equivalence(ball, GenNet.stack([NULL * alpha(1), GenNet.constant(0.0)]), alpha(1)))
    yield ("1/eps + x1", Interval.of(0.0, alpha(1)),
           NullPerturbation.parse(["exp(-1/eps)*x1^2"], [[0, 1]]))
    yield ("cos(x1)", Indicator.from_predicate("(x1 - 0.2)*(x1 - 0.7)", [[0, 1]]),
           NullPerturbation.parse(["exp(-1/eps)*cos(3*x1)"], [[0, 1]]))
    disk = Indicator.from_predicate("x1^2 + x2^2 - 0.25", [[-1, 1], [-1, 1]])
    yield ("x1^2 + x2", disk, NullPerturbation.zero(2, disk.compact_box))


def test_representative_and_membrane_independence():
    kinds = set()
    with criterion(4, "integrals independent of representative and membrane", limit=60.0):
        for body, M, psi in _independence_catalog():
            kinds.add(type(M).__name__)
            n = M.dim
            f = Representative.parse(body, n)
            g = Representative.parse(f"{body} + exp(-1/eps)*(1 + x1^2)", n)
            Mp = perturb(M, psi)
            results = [membrane_integral(h, region) for h in (f, g) for region in (M, Mp)]
            base, base_mag = results[0]
            for val, mag in results[1:]:
                c = gap_class(val, base, np.maximum(mag.values, base_mag.values))
                assert c.kind is Kind.NULL, (body, type(M).__name__, c)
        assert kinds >= {"Interval", "Box", "Ball", "Indicator"}


def test_cauchy_suite():
    cases = [
        (zrep("exp(z)"), circle(0, 1.0), 0.2 + 0.1j),
        (zrep("z^2"), circle(0, 1.0), -0.3),
        (zrep("1/(1 - z)", domain=[[-0.6, 0.6], [-0.6, 0.6]]), circle(0, 0.5), 0.1j),
        (zrep("z/eps"), circle(0, 1.0), 0.5),
        (zrep("exp(z)"), circle(0, alpha(1)), 0.0),
    ]
    with criterion(5, "Cauchy formula matches direct evaluation"):
        for f, gamma, z0 in cases:
            r = cauchy_eval(ContourSetup.build(f, gamma, z0))
            err = np.abs(r.via_contour.values - r.direct.values)
            assert np.all(err <= 1e-9 * np.maximum(1.0, np.abs(r.direct.values))), str(f.body)
            assert r.gap_class.kind is Kind.NULL


def test_taylor_coefficients_and_series():
    with criterion(6, "Taylor coefficients and series evaluation"):
        exp_setup = ContourSetup.build(zrep("exp(z)"), circle(0, 1.0), 0)
        exp_coeffs = taylor_coefficients(exp_setup, 10)
        for n, a in enumerate(exp_coeffs):
            assert np.max(np.abs(a.values - 1 / math.factorial(n))) <= 1e-9
        geo_setup = ContourSetup.build(zrep("1/(1 - z)", domain=[[-0.6, 0.6], [-0.6, 0.6]]), circle(0, 0.5), 0)
        geo_coeffs = taylor_coefficients(geo_setup, 10)
        for a in geo_coeffs:
            assert np.max(np.abs(a.values - 1.0)) <= 1e-8
        exp_long = taylor_coefficients(exp_setup, 40)
        geo_long = taylor_coefficients(geo_setup, 400)
        probes = [
            (exp_setup, exp_long, alpha(1) * 0.5),
            (exp_setup, exp_long, alpha(0.25) * (0.3 - 0.4j)),
            (exp_setup, exp_long, alpha(2) * 0.9j),
            (geo_setup, geo_long, alpha(0.5) * 0.2),
            (geo_setup, geo_long, alpha(1) * (-0.1 + 0.1j)),
        ]
        for setup, coeffs, z in probes:
            assert sharp_norm(z - setup.z0) < 1
            r = taylor_eval(setup, coeffs, z)
            assert r.gap_class.kind is Kind.NULL


def test_green_theorem():
    area = [Representative.parse(b, 2) for b in ("-x2/2", "x1/2")]
    swirl = [Representative.parse(b, 2) for b in ("-x2^3 + x1", "x1^3 + eps*x2")]
    cases = [
        (area, circle(0, alpha(1)), Ball.of([0.0, 0.0], alpha(1))),
        (swirl, circle(0, 1.0), Ball.of([0.0, 0.0], 1.0)),
        (area, circle(0.25 + 0.5j, 0.5), Ball.of([0.25, 0.5], 0.5)),
    ]
    with criterion(7, "Green's theorem on circles and disks"):
        for F, gamma, M in cases:
            r = green_check(F, gamma, M)
            lhs, rhs = r.lhs.values, r.rhs.values
            assert np.all(np.abs(lhs - rhs) <= 1e-8 * np.maximum(1.0, np.abs(lhs)))
            assert r.gap_class.kind is Kind.NULL


def test_transport_and_wave_residuals():
    rng = np.random.default_rng(3)
    probes = [(rng.uniform(-2, 2, 1), float(rng.uniform(0.2, 2.0))) for _ in range(5)]
    with criterion(8, "transport and wave residuals", limit=30.0):
        hom = TransportProblem.parse([1.0], "sin(x1)")
        assert residual_check(transport_solve(hom), hom, probes).scaled.kind is Kind.NULL

        inhom = TransportProblem.parse([1.0], "0", "x1")
        sol = transport_solve(inhom)
        for x, t in [(0.3, 0.5), (-1.0, 2.0), (1.5, 0.1)]:
            np.testing.assert_allclose(sol([x], t).values, x * t - t * t / 2, atol=1e-12)
        assert residual_check(sol, inhom, probes).scaled.kind is Kind.NULL

        wave = WaveProblem.parse("sin(x1)", "0")
        wsol = wave_solve(wave)
        np.testing.assert_allclose(wsol([0.3], 0.7).values, math.sin(0.3) * math.cos(0.7), atol=1e-10)
        assert residual_check(wsol, wave, probes).scaled.kind is Kind.NULL

        wrong = residual_check(FunctionSolution.parse("sin(x1 + t)"), hom, probes)
        assert wrong.scaled.kind is not Kind.NULL


def test_one_dimensional_consistency():
    cases = [
        ("x1", 0.0, 1.0),
        ("sin(x1)", 0.0, math.pi),
        ("1", 0.0, alpha(1)),
        ("x1^2/eps", alpha(2), alpha(0.5)),
        ("exp(x1)", -1.0, alpha(1) * 0.5),
    ]
    with criterion(9, "membrane and line integrals agree on intervals"):
        for body, a, b in cases:
            r = interval_consistency(Representative.parse(body, 1), a, b)
            assert r.gap_class.kind is Kind.NULL, body


def test_valuation_calibration():
    rng = np.random.default_rng(2024)
    with criterion(10, "valuation estimator and derivative checks"):
        for r in rng.uniform(-5, 5, 20):
            assert valuation(alpha(float(r))) == pytest.approx(r, abs=1e-9)
        test_expr.test_derivative_matches_central_difference()
        test_genfun.test_chain_rule_matches_finite_difference()
