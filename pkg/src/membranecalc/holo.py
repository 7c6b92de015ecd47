"""Distance to a history, the Cauchy formula and Taylor coefficients of holomorphic representatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as ex
from .genfun import CompactnessError, GenPoint, Representative, box_contains, evaluate_at
from .gennum import GenNet, Kind, NetClass, classify, gap_class, sharp_norm
from .membrane import History, history_image
from .quad import _pointwise, curve_integral
from .rules import DEFAULT_QUAD, QuadConfig

WINDING_SAMPLES = 1024
CR_TOL = 1e-8


class HypothesisError(ValueError):
    """A hypothesis of the Cauchy/Taylor machinery fails."""


class DivergenceRiskError(ArithmeticError):
    """The evaluation point is too far from the expansion centre."""


def _complex_net(z, grid) -> GenNet:
    if isinstance(z, GenNet):
        if z.is_vector:
            if z.arity != 2:
                raise ValueError("expected a complex net or a real 2-vector net")
            return GenNet(z.grid, z.values[:, 0] + 1j * z.values[:, 1])
        return GenNet(z.grid, z.values.astype(complex))
    return GenNet.constant(complex(z), grid)


def _planar(z: GenNet) -> GenNet:
    return GenNet(z.grid, np.stack([z.values.real, z.values.imag], axis=1))


def distance_to_history(z0, gamma: History) -> GenNet:
    """[eps -> distance from z0_eps to gamma_eps([0, 1])]."""
    if gamma.dim != 2:
        raise ValueError("distance to a history is defined here for planar histories")
    z0 = _complex_net(z0, gamma.grid)
    return history_image(gamma, WINDING_SAMPLES).distance_to(_planar(z0))


def winding_numbers(gamma: History, z0: GenNet) -> np.ndarray:
    """Discrete argument principle per eps."""
    t = np.arange(WINDING_SAMPLES + 1) / WINDING_SAMPLES
    pts = gamma.points(t)
    w = pts[..., 0] + 1j * pts[..., 1] - z0.values[:, None]
    steps = np.angle(w[:, 1:] / w[:, :-1])
    return np.sum(steps, axis=1) / (2 * np.pi)


def cauchy_riemann_residual(f: Representative, gamma: History, z0: GenNet) -> float:
    """max |df/dzbar| / max(1, |df/dz|) at 32 points between z0 and the curve on the tail."""
    x, y = ex.Var("zx"), ex.Var("zy")
    body = ex.substitute(f.body, {f.variables[0]: ex.add(x, ex.mul(ex.Const("i"), y))})
    fx = ex.differentiate(body, "zx")
    fy = ex.differentiate(body, "zy")
    t = np.arange(8) / 8
    radii = np.array([0.25, 0.5, 0.75, 0.95])
    tail = gamma.grid.tail_slice
    curve = gamma.points(t)[tail]
    c = curve[..., 0] + 1j * curve[..., 1]
    z0t = z0.values[tail][:, None, None]
    pts = z0t + radii[None, :, None] * (c[:, None, :] - z0t)  # (tail, 4, 8)
    env = {"zx": pts.real, "zy": pts.imag, ex.EPS: gamma.grid.tail[:, None, None]}
    with np.errstate(all="ignore"):
        dx = np.asarray(ex.evaluate(fx, env))
        dy = np.asarray(ex.evaluate(fy, env))
    dzbar = 0.5 * (dx + 1j * dy)
    dz = 0.5 * (dx - 1j * dy)
    return float(np.max(np.abs(dzbar) / np.maximum(1.0, np.abs(dz))))


@dataclass(frozen=True, eq=False)
class ContourSetup:
    """Validated data for the Cauchy formula: f, a winding-one contour and a centre z0."""

    f: Representative
    gamma: History
    z0: GenNet
    distance: GenNet
    separation: NetClass
    rho: GenNet
    winding: np.ndarray
    cr_residual: float

    @classmethod
    def build(cls, f: Representative, gamma: History, z0) -> "ContourSetup":
        if f.codomain != "complex" or not f.is_complex_variable:
            raise ValueError("the Cauchy formula needs a complex representative in z")
        if gamma.dim != 2 or not gamma.closed or not gamma.positively_oriented:
            raise HypothesisError("contour must be a closed, positively oriented planar history")
        if not box_contains(f.domain_box, gamma.compact_box):
            raise CompactnessError("contour leaves the representative's domain")
        z0 = _complex_net(z0, gamma.grid)
        d = distance_to_history(z0, gamma)
        sep = classify(d)
        if sep.kind is not Kind.INVERTIBLE:
            raise HypothesisError(f"distance from z0 to the contour is not invertible ({sep.kind.value})")
        wind = winding_numbers(gamma, z0)
        tail_wind = wind[gamma.grid.tail_slice]
        if np.any(np.abs(tail_wind - 1) > 1e-3):
            raise HypothesisError(f"winding number about z0 is not 1 on the tail (got {tail_wind.min():.3f})")
        cr = cauchy_riemann_residual(f, gamma, z0)
        if not cr <= CR_TOL:
            raise HypothesisError(f"representative fails the Cauchy-Riemann spot check (residual {cr:.3g})")
        rho = GenNet(gamma.grid, 0.99 * d.values / 4)
        return cls(f, gamma, z0, d, sep, rho, wind, cr)

    def to_json(self) -> dict:
        return {"f": self.f.to_json(), "z0": self.z0.to_json(), "distance": self.distance.to_json(),
                "separation": self.separation.to_json(), "cr_residual": self.cr_residual,
                "winding_tail": self.winding[self.gamma.grid.tail_slice].tolist()}


def _coefficient(setup: ContourSetup, n: int, cfg: QuadConfig) -> tuple[GenNet, GenNet]:
    """(1/2 pi i) int f(w) / (w - z0)^(n+1) dw and its size."""
    z0 = setup.z0.values[:, None]

    def integrand(eps, pos, vel):
        w = pos[..., 0] + 1j * pos[..., 1]
        dw = vel[..., 0] + 1j * vel[..., 1]
        val = _pointwise(setup.f, eps, pos) / (w - z0) ** (n + 1) * dw / (2j * np.pi)
        return val, np.abs(val)

    return curve_integral(setup.gamma, integrand, cfg)


@dataclass(frozen=True)
class CauchyResult:
    via_contour: GenNet
    direct: GenNet
    gap_class: NetClass

    def to_json(self) -> dict:
        return {"via_contour": self.via_contour.to_json(), "direct": self.direct.to_json(),
                "gap_class": self.gap_class.to_json()}


def cauchy_eval(setup: ContourSetup, cfg: QuadConfig = DEFAULT_QUAD) -> CauchyResult:
    via, size = _coefficient(setup, 0, cfg)
    direct = evaluate_at(setup.f, GenPoint(setup.z0))
    scale = np.maximum(size.values, np.abs(direct.values))
    return CauchyResult(via, direct, gap_class(via, direct, scale, cfg.gap_rtol))


def taylor_coefficients(setup: ContourSetup, n_max: int, cfg: QuadConfig = DEFAULT_QUAD) -> list[GenNet]:
    """a_n = (1/2 pi i) int f(w)/(w - z0)^(n+1) dw for n = 0..n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return [_coefficient(setup, n, cfg)[0] for n in range(n_max + 1)]


@dataclass(frozen=True)
class TaylorResult:
    series: GenNet
    direct: GenNet
    gap_class: NetClass
    terms_used: int
    in_v_rho: bool
    distance_norm: float

    def to_json(self) -> dict:
        return {"series": self.series.to_json(), "direct": self.direct.to_json(),
                "gap_class": self.gap_class.to_json(), "terms_used": self.terms_used,
                "in_v_rho": self.in_v_rho, "distance_norm": self.distance_norm}


MAX_RATIO = 0.95


def taylor_eval(setup: ContourSetup, coeffs: Sequence[GenNet], z, cfg: QuadConfig = DEFAULT_QUAD,
                term_tol: float = 1e-14) -> TaylorResult:
    """Partial sums of sum a_n (z - z0)^n compared with f(z).

    Refuses points with |z - z0| > 0.95 d(z0, gamma*) at some tail eps,
    where the coefficient series cannot be trusted to converge.
    """
    z = _complex_net(z, setup.gamma.grid)
    h = z - setup.z0
    tail = setup.gamma.grid.tail_slice
    ratio = np.abs(h.values[tail]) / setup.distance.values[tail]
    if np.any(ratio > MAX_RATIO):
        raise DivergenceRiskError(
            f"|z - z0| reaches {ratio.max():.3g} of the distance to the contour (limit {MAX_RATIO})")
    norm = sharp_norm(h)
    in_v_rho = bool(np.all(np.abs(h.values[tail]) <= setup.rho.values[tail]))
    partial = np.zeros(len(h.grid), dtype=complex)
    size = np.zeros(len(h.grid))
    power = np.ones(len(h.grid), dtype=complex)
    used = 0
    for a in coeffs:
        term = a.values * power
        partial = partial + term
        size = size + np.abs(term)
        used += 1
        # every sample, not just the tail, so head values are accurate too
        if np.all(np.abs(term) < term_tol * np.maximum(1.0, np.abs(partial))):
            break
        power = power * h.values
    series = GenNet(h.grid, partial)
    direct = evaluate_at(setup.f, GenPoint(z))
    scale = np.maximum(size, np.abs(direct.values))
    return TaylorResult(series, direct, gap_class(series, direct, scale, cfg.gap_rtol),
                        used, in_v_rho, norm)
