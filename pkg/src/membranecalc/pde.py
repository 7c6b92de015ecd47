"""Explicit solutions of the transport and 1-D wave equations, with finite-difference checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as ex
from .genfun import GenPoint, Representative
from .gennum import EpsilonGrid, GenNet, Kind, NetClass, classify
from .rules import DEFAULT_QUAD, QuadConfig, composite, gauss_legendre

SOURCE_NODES = 64
DEFAULT_H = 1e-5
SAFETY = 10.0
MACH = np.finfo(float).eps


class SourceDomainError(ValueError):
    """The source term is needed at times outside (-a, inf)."""


class MarginError(ValueError):
    """A residual probe is too close to the boundary of the time domain."""


def bump(var: str = "x1") -> str:
    """exp(-1/(1 - x^2)) on (-1, 1), exactly 0 outside, as one expression."""
    u = f"(1 - {var}^2)"
    return f"exp(-2/({u} + abs({u}) + 1e-300))"


def _data(body: str, variables: Sequence[str]) -> Representative:
    return Representative.parse(body, len(variables), variables=variables, check=False)


def _as_vector_net(b, grid: EpsilonGrid) -> GenNet:
    if isinstance(b, GenNet):
        return b if b.is_vector else GenNet(b.grid, b.values[:, None])
    if isinstance(b, (list, tuple)) and any(isinstance(c, GenNet) for c in b):
        return GenNet.stack([c if isinstance(c, GenNet) else GenNet.constant(float(c), grid) for c in b])
    return GenNet.constant(np.atleast_1d(np.asarray(b, dtype=float)), grid)


def _per_eps(value, grid: EpsilonGrid, width: int | None = None) -> np.ndarray:
    """Nets, points or classical values as arrays of shape (E,) or (E, width)."""
    if isinstance(value, GenPoint):
        value = value.coords
    v = value.values if isinstance(value, GenNet) else np.asarray(value, dtype=float)
    if width is None:
        return np.broadcast_to(v, (len(grid),)).astype(float)
    if v.ndim == 0 or (v.ndim == 1 and not isinstance(value, GenNet)):
        v = np.broadcast_to(np.atleast_1d(v), (len(grid), width))
    elif v.ndim == 1:
        v = v[:, None]
    if v.shape != (len(grid), width):
        raise ValueError(f"expected {width} coordinates per eps")
    return np.asarray(v, dtype=float)


# ------------------------------------------------------------------ problems


@dataclass(frozen=True, eq=False)
class TransportProblem:
    """u_t + <grad_x u | b> = f on R^n x (0, inf), u(x, 0) = g(x); b constant in x."""

    b: GenNet
    g: Representative
    f: Representative | None = None
    a: float = 1.0

    def __post_init__(self):
        if not self.b.is_vector:
            object.__setattr__(self, "b", GenNet(self.b.grid, self.b.values[:, None]))
        if self.g.arity != self.b.arity:
            raise ValueError("g must take as many variables as b has components")
        for k in range(self.b.arity):
            if classify(self.b.component(k)).kind is Kind.INDETERMINATE:
                raise ValueError(f"velocity component {k + 1} is not moderate")
        if self.f is not None:
            if self.f.arity != self.n + 1 or self.f.variables[-1] != "t":
                raise ValueError("source must take x1..xn and t (last)")
        if not self.a > 0:
            raise ValueError("a must be positive")

    @classmethod
    def parse(cls, b, g: str, f: str | None = None, a: float = 1.0,
              grid: EpsilonGrid | None = None) -> "TransportProblem":
        grid = grid or (b.grid if isinstance(b, GenNet) else EpsilonGrid.default())
        bn = _as_vector_net(b, grid)
        xs = [f"x{k + 1}" for k in range(bn.arity)]
        return cls(bn, _data(g, xs), _data(f, xs + ["t"]) if f else None, float(a))

    @property
    def n(self) -> int:
        return self.b.arity

    @property
    def grid(self) -> EpsilonGrid:
        return self.b.grid

    def to_json(self) -> dict:
        return {"b": self.b.to_json(), "g": str(self.g), "f": None if self.f is None else str(self.f),
                "a": self.a}


@dataclass(frozen=True, eq=False)
class WaveProblem:
    """u_tt - u_xx = 0 on R x (0, inf), u(x, 0) = g, u_t(x, 0) = h."""

    g: Representative
    h: Representative
    grid: EpsilonGrid = field(default_factory=EpsilonGrid.default)

    def __post_init__(self):
        if self.g.arity != 1 or self.h.arity != 1:
            raise ValueError("wave data must be functions of one variable")

    @classmethod
    def parse(cls, g: str, h: str, grid: EpsilonGrid | None = None) -> "WaveProblem":
        return cls(_data(g, ["x1"]), _data(h, ["x1"]), grid or EpsilonGrid.default())

    def to_json(self) -> dict:
        return {"g": str(self.g), "h": str(self.h)}


# ------------------------------------------------------------- evaluators


class Solution:
    """A candidate u(x, t) evaluated eps-wise.

    ``values`` takes x of shape (E, n) and t of shape (E,) and returns (E,).
    """

    grid: EpsilonGrid
    n: int

    def values(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, t) -> GenNet:
        tv = _per_eps(t, self.grid)
        if np.any(tv[self.grid.tail_slice] <= 0):
            raise ValueError("t must be positive on the tail")
        return GenNet(self.grid, self.values(_per_eps(x, self.grid, self.n), tv))


@dataclass(frozen=True, eq=False)
class TransportSolution(Solution):
    problem: TransportProblem

    @property
    def grid(self):
        return self.problem.grid

    @property
    def n(self):
        return self.problem.n

    def homogeneous(self, x, t):
        p = self.problem
        eps = self.grid.samples
        y = x - t[:, None] * p.b.values
        return np.real(p.g.values(eps, *y.T))

    def source(self, x, t):
        p = self.problem
        if p.f is None:
            return np.zeros(len(self.grid))
        s, w = gauss_legendre(SOURCE_NODES)
        nodes = -t[:, None] + t[:, None] * s[None, :]  # s in [-t, 0]
        weights = t[:, None] * w[None, :]
        times = t[:, None] + nodes
        if np.any(times <= -p.a):
            raise SourceDomainError("source evaluated outside (-a, inf)")
        pts = x[:, None, :] + nodes[..., None] * p.b.values[:, None, :]
        eps = self.grid.column()
        vals = p.f.values(eps, *np.moveaxis(pts, -1, 0), times)
        return np.sum(np.real(vals) * weights, axis=1)

    def values(self, x, t):
        return self.homogeneous(x, t) + self.source(x, t)


def transport_solve(problem: TransportProblem) -> TransportSolution:
    """u(x, t) = g(x - t b) + int_{-t}^0 f(x + s b, t + s) ds, eps-wise."""
    return TransportSolution(problem)


@dataclass(frozen=True, eq=False)
class WaveSolution(Solution):
    problem: WaveProblem
    cfg: QuadConfig = DEFAULT_QUAD
    n: int = 1

    @property
    def grid(self):
        return self.problem.grid

    def values(self, x, t):
        p = self.problem
        eps = self.grid.samples
        x = x[:, 0]
        shift = 0.5 * (np.real(p.g.values(eps, x + t)) + np.real(p.g.values(eps, x - t)))
        nodes, w = composite(x - t, x + t, self.cfg.gauss_order, self.cfg.segments)
        integral = np.sum(np.real(p.h.values(eps[:, None], nodes)) * w, axis=1)
        return shift + 0.5 * integral


def wave_solve(problem: WaveProblem, cfg: QuadConfig = DEFAULT_QUAD) -> WaveSolution:
    """d'Alembert: u = (g(x+t) + g(x-t))/2 + (1/2) int_{x-t}^{x+t} h."""
    return WaveSolution(problem, cfg)


@dataclass(frozen=True, eq=False)
class FunctionSolution(Solution):
    """A candidate given by an expression in x1..xn, t and eps (e.g. a wrong guess)."""

    rep: Representative
    grid: EpsilonGrid
    n: int

    @classmethod
    def parse(cls, body: str, n: int = 1, grid: EpsilonGrid | None = None) -> "FunctionSolution":
        xs = [f"x{k + 1}" for k in range(n)]
        return cls(_data(body, xs + ["t"]), grid or EpsilonGrid.default(), n)

    def values(self, x, t):
        return np.real(self.rep.values(self.grid.samples, *x.T, t))


# --------------------------------------------------------------- residuals


@dataclass(frozen=True)
class ResidualReport:
    residual: GenNet
    floor: GenNet
    raw: NetClass
    scaled: NetClass

    def to_json(self) -> dict:
        return {"residual": self.residual.to_json(), "floor": self.floor.to_json(),
                "raw_class": self.raw.to_json(), "scaled_class": self.scaled.to_json()}


def _transport_residual(sol: Solution, p: TransportProblem, x, t, h):
    eps = p.grid.samples
    E, n = x.shape
    stencil = [sol.values(x, t)]
    ut = (sol.values(x, t + h) - sol.values(x, t - h)) / (2 * h)
    stencil += [sol.values(x, t + h), sol.values(x, t - h)]
    r = ut
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        up, dn = sol.values(x + e, t), sol.values(x - e, t)
        stencil += [up, dn]
        r = r + p.b.values[:, k] * (up - dn) / (2 * h)
    if p.f is not None:
        r = r - np.real(p.f.values(eps, *x.T, t))
    size = np.max(np.abs(np.stack(stencil)), axis=0)
    rounding = 4 * MACH * size / h * (1 + np.sum(np.abs(p.b.values), axis=1))
    return r, rounding


def _wave_residual(sol: Solution, p: WaveProblem, x, t, h):
    u0 = sol.values(x, t)
    tp, tm = sol.values(x, t + h), sol.values(x, t - h)
    xp, xm = sol.values(x + h, t), sol.values(x - h, t)
    r = (tp - 2 * u0 + tm) / h ** 2 - (xp - 2 * u0 + xm) / h ** 2
    size = np.max(np.abs(np.stack([u0, tp, tm, xp, xm])), axis=0)
    return r, 16 * MACH * size / h ** 2


def residual_check(solution: Solution, problem, probes: Sequence[tuple], h_fd: float = DEFAULT_H) -> ResidualReport:
    """Central-difference residual of the PDE at each probe, worst case over probes.

    The raw class judges the residual as is.  The scaled class first discards,
    probe by probe, what finite differencing alone explains: SAFETY times
    the Richardson estimate |R(2h) - R(h)|/3 of the truncation error plus a
    rounding bound.
    """
    grid = problem.grid
    if isinstance(problem, TransportProblem):
        n, kernel = problem.n, _transport_residual
    elif isinstance(problem, WaveProblem):
        n, kernel = 1, _wave_residual
    else:
        raise TypeError("unknown problem type")
    worst = np.zeros(len(grid))
    excess = np.zeros(len(grid))
    floor_worst = np.zeros(len(grid))
    tail = grid.tail_slice
    for x, t in probes:
        xv = _per_eps(x, grid, n)
        tv = _per_eps(t, grid)
        if np.any(tv[tail] - 4 * h_fd <= 0):
            raise MarginError("probe time within 2 steps of the boundary t = 0")
        r1, round1 = kernel(solution, problem, xv, tv, h_fd)
        r2, round2 = kernel(solution, problem, xv, tv, 2 * h_fd)
        floor = SAFETY * (np.abs(r2 - r1) / 3 + round1 + round2)
        a = np.abs(r1)
        worst = np.maximum(worst, a)
        floor_worst = np.maximum(floor_worst, floor)
        excess = np.maximum(excess, np.where(a <= floor, 0.0, a))
    res = GenNet(grid, worst)
    return ResidualReport(res, GenNet(grid, floor_worst), classify(res), classify(GenNet(grid, excess)))


# ------------------------------------------------------------ wave energy


def wave_energy(problem: WaveProblem, t: float, half_width: float = 20.0,
                cfg: QuadConfig = DEFAULT_QUAD) -> GenNet:
    """(1/2) int_{-L}^{L} (u_t^2 + u_x^2) dx of the d'Alembert solution, eps-wise."""
    g, h = problem.g, problem.h
    dg = g.with_body(ex.differentiate(g.body, g.variables[0]))
    eps = problem.grid.column()
    x, w = composite(-half_width, half_width, cfg.gauss_order, 4 * cfg.segments)
    gp, gm = np.real(dg.values(eps, x + t)), np.real(dg.values(eps, x - t))
    hp, hm = np.real(h.values(eps, x + t)), np.real(h.values(eps, x - t))
    ut = 0.5 * (gp - gm) + 0.5 * (hp + hm)
    ux = 0.5 * (gp + gm) + 0.5 * (hp - hm)
    return GenNet(problem.grid, 0.5 * np.sum((ut ** 2 + ux ** 2) * w, axis=1))
