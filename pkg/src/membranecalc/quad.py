"""Integrals of generalized functions over membranes and along histories."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .genfun import CompactnessError, Representative, box_contains
from .gennum import GenNet, Kind, NetClass, classify, gap_class
from .membrane import Ball, Box, History, Interval, PreMembrane, segment, volume
from .rules import (DEFAULT_QUAD, IntegrabilitySuspectError, QuadConfig, composite,
                    composite_unit, gauss_legendre, integrate_region, map_eps)

__all__ = [
    "QuadConfig", "DEFAULT_QUAD", "IntegrabilitySuspectError", "BoundDegenerateError",
    "integrate_membrane", "line_integral_real", "line_integral_complex", "rot2",
    "green_check", "mean_value_bound", "interval_consistency",
    "GreenResult", "MeanValueResult", "ConsistencyResult",
]


class BoundDegenerateError(ArithmeticError):
    """vol(M) is null, so no power bound can be read off at finite resolution."""


def _pointwise(f: Representative, eps, pts: np.ndarray) -> np.ndarray:
    """f_eps at real points of shape (..., space_dim)."""
    return f.values(eps, *f._coords_from_real(pts))


def _check_contained(f: Representative, box: np.ndarray, what: str) -> None:
    if box.shape[0] != f.space_dim:
        raise ValueError(f"{what} of dimension {box.shape[0]} does not match arity {f.arity}")
    if not box_contains(f.domain_box, box):
        raise CompactnessError(f"{what} box {box.tolist()} is not inside the domain {f.domain_box.tolist()}")


def _net_pair(grid, values, mags) -> tuple[GenNet, GenNet]:
    return GenNet(grid, np.asarray(values)), GenNet(grid, np.asarray(mags, dtype=float))


# ------------------------------------------------------------ membranes


def _interval_rule(f, M: Interval, cfg) -> tuple[np.ndarray, np.ndarray]:
    eps = M.grid.samples
    x, w = composite(M.a.values, M.b.values, cfg.gauss_order, cfg.segments)  # (E, q)
    vals = _pointwise(f, eps[:, None], x[..., None]) * w
    return np.sum(vals, axis=1), np.sum(np.abs(vals), axis=1)


def _box_rule(f, M: Box, cfg) -> tuple[np.ndarray, np.ndarray]:
    eps = M.grid.samples
    segs = cfg.segments if M.dim <= 2 else 1
    windows = M.windows()

    def one(i):
        axes = [composite(lo, hi, cfg.gauss_order, segs) for lo, hi in windows[i]]
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        weights = np.ones(grids[0].shape)
        for k, (_, w) in enumerate(axes):
            shape = [1] * M.dim
            shape[k] = w.size
            weights = weights * w.reshape(shape)
        vals = _pointwise(f, eps[i], np.stack(grids, axis=-1)) * weights
        return np.sum(vals), np.sum(np.abs(vals))

    out = map_eps(one, len(eps), cfg.workers)
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def _ball_rule(f, M: Ball, cfg) -> tuple[np.ndarray, np.ndarray]:
    eps = M.grid.samples
    n = M.dim
    if n == 1:
        c, r = M.center.values[:, 0], M.radius.values
        return _interval_rule(f, Interval(GenNet(M.grid, c - r), GenNet(M.grid, c + r)), cfg)
    s, ws = gauss_legendre(cfg.ball_radial)
    m = cfg.ball_angular
    phi = 2 * np.pi * np.arange(m) / m
    if n == 2:
        dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)  # (A, 2)
        dir_w = np.full(m, 2 * np.pi / m)
    elif n == 3:
        u, wu = gauss_legendre(cfg.ball_radial)
        cos_t = 2 * u - 1
        sin_t = np.sqrt(1 - cos_t ** 2)
        dirs = np.stack([np.outer(sin_t, np.cos(phi)), np.outer(sin_t, np.sin(phi)),
                         np.broadcast_to(cos_t[:, None], (u.size, m))], axis=-1).reshape(-1, 3)
        dir_w = np.outer(2 * wu, np.full(m, 2 * np.pi / m)).ravel()
    else:
        raise ValueError("balls of dimension > 3 are not supported")

    def one(i):
        R = M.radius.values[i]
        rad = R * s
        pts = M.center.values[i] + rad[:, None, None] * dirs[None, :, :]  # (q, A, n)
        w = (ws * R * rad ** (n - 1))[:, None] * dir_w[None, :]
        vals = _pointwise(f, eps[i], pts) * w
        return np.sum(vals), np.sum(np.abs(vals))

    out = map_eps(one, len(eps), cfg.workers)
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def _indicator_rule(f, M: PreMembrane, cfg) -> tuple[np.ndarray, np.ndarray]:
    eps = M.grid.samples
    windows = M.windows()
    cplx = f.codomain == "complex"

    def one(i):
        v, m, _ = integrate_region(lambda p: M.level(i, p), windows[i],
                                   lambda p: _pointwise(f, eps[i], p), cfg)
        return (v if cplx else v.real), m

    out = map_eps(one, len(eps), cfg.workers)
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def membrane_integral(f: Representative, M: PreMembrane,
                      cfg: QuadConfig = DEFAULT_QUAD) -> tuple[GenNet, GenNet]:
    """(integral net, integral of |f| net); the second is the noise scale."""
    _check_contained(f, M.compact_box, "membrane")
    if isinstance(M, Interval):
        v, m = _interval_rule(f, M, cfg)
    elif isinstance(M, Box):
        v, m = _box_rule(f, M, cfg)
    elif isinstance(M, Ball):
        v, m = _ball_rule(f, M, cfg)
    else:
        v, m = _indicator_rule(f, M, cfg)
    if f.codomain == "real":
        v = np.real(v)
    return _net_pair(M.grid, v, m)


def integrate_membrane(f: Representative, M: PreMembrane, cfg: QuadConfig = DEFAULT_QUAD) -> GenNet:
    """[eps -> integral of f_eps over M_eps]."""
    return membrane_integral(f, M, cfg)[0]


# ---------------------------------------------------------- line integrals


def _t_rule(cfg: QuadConfig) -> tuple[np.ndarray, np.ndarray]:
    return composite_unit(cfg.gauss_order, cfg.segments)


def curve_integral(gamma: History, integrand: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
                   cfg: QuadConfig = DEFAULT_QUAD) -> tuple[GenNet, GenNet]:
    """[eps -> int_0^1 integrand(eps, gamma_eps(t), gamma_eps'(t)) dt] and its |.| scale.

    ``integrand`` receives eps with shape (E, 1) and positions and
    velocities with shape (E, T, n).  It may return a pair (value, size)
    where size bounds the terms that cancelled inside value.
    """
    t, w = _t_rule(cfg)
    pos = gamma.points(t)
    vel = gamma.velocity(t)
    out = integrand(gamma.grid.column(), pos, vel)
    vals, size = out if isinstance(out, tuple) else (out, np.abs(out))
    return _net_pair(gamma.grid, np.sum(np.asarray(vals) * w, axis=1), np.sum(np.abs(size) * w, axis=1))


def _line_real(F: Sequence[Representative], gamma: History, cfg) -> tuple[GenNet, GenNet]:
    if len(F) != gamma.dim:
        raise ValueError("field arity does not match the history's dimension")
    for comp in F:
        _check_contained(comp, gamma.compact_box, "history image")

    def integrand(eps, pos, vel):
        terms = [_pointwise(comp, eps, pos) * vel[..., k] for k, comp in enumerate(F)]
        return sum(terms), sum(np.abs(tm) for tm in terms)

    return curve_integral(gamma, integrand, cfg)


def line_integral_real(F: Sequence[Representative], gamma: History,
                       cfg: QuadConfig = DEFAULT_QUAD) -> GenNet:
    """[eps -> int_0^1 <F_eps(gamma_eps(t)) | gamma_eps'(t)> dt]."""
    return _line_real(F, gamma, cfg)[0]


def _line_complex(f: Representative, gamma: History, cfg) -> tuple[GenNet, GenNet]:
    if f.codomain != "complex":
        raise ValueError("complex line integrals need a complex-valued representative")
    if gamma.dim != 2:
        raise ValueError("complex line integrals need a planar history")
    _check_contained(f, gamma.compact_box, "history image")

    def integrand(eps, pos, vel):
        return _pointwise(f, eps, pos) * (vel[..., 0] + 1j * vel[..., 1])

    return curve_integral(gamma, integrand, cfg)


def line_integral_complex(f: Representative, gamma: History,
                          cfg: QuadConfig = DEFAULT_QUAD) -> GenNet:
    """[eps -> int_0^1 f_eps(gamma_eps(t)) gamma_eps'(t) dt], with R^2 read as C."""
    return _line_complex(f, gamma, cfg)[0]


# ------------------------------------------------------------- rot, Green


def rot2(F: Sequence[Representative]) -> Representative:
    """The e3 component dF2/dx1 - dF1/dx2 of a planar field."""
    if len(F) != 2 or any(c.arity != 2 for c in F):
        raise ValueError("rot2 needs two components of arity 2")
    x1, x2 = F[0].variables
    body = ex.sub(ex.differentiate(F[1].body, x1), ex.differentiate(F[0].body, x2))
    lo = np.maximum(F[0].domain_box[:, 0], F[1].domain_box[:, 0])
    hi = np.minimum(F[0].domain_box[:, 1], F[1].domain_box[:, 1])
    codomain = "complex" if "complex" in (F[0].codomain, F[1].codomain) else "real"
    return Representative(body, 2, np.stack([lo, hi], axis=1), codomain, F[0].variables)


@dataclass(frozen=True)
class GreenResult:
    lhs: GenNet
    rhs: GenNet
    gap_class: NetClass

    def to_json(self) -> dict:
        return {"lhs": self.lhs.to_json(), "rhs": self.rhs.to_json(), "gap_class": self.gap_class.to_json()}


def green_check(F: Sequence[Representative], gamma: History, M: PreMembrane,
                cfg: QuadConfig = DEFAULT_QUAD) -> GreenResult:
    """Compare the circulation of F along gamma with the integral of rot F over M.

    M must be the region enclosed by gamma; it is supplied by the caller.
    """
    if not (gamma.closed and gamma.simple and gamma.positively_oriented):
        raise ValueError("Green's identity needs a closed, simple, positively oriented history")
    lhs, lhs_abs = _line_real(F, gamma, cfg)
    rhs, rhs_abs = membrane_integral(rot2(F), M, cfg)
    scale = np.maximum(lhs_abs.values, rhs_abs.values)
    return GreenResult(lhs, rhs, gap_class(lhs, rhs, scale, cfg.gap_rtol))


# ------------------------------------------------------- mean-value bound


R_GRID = np.arange(-2000, 2001) / 100.0


@dataclass(frozen=True)
class MeanValueResult:
    integral: GenNet
    volume: GenNet
    r_star: float

    def to_json(self) -> dict:
        r = self.r_star
        return {"integral": self.integral.to_json(), "volume": self.volume.to_json(),
                "r_star": r if math.isfinite(r) else ("inf" if r > 0 else "-inf")}


def mean_value_bound(f: Representative, M: PreMembrane, cfg: QuadConfig = DEFAULT_QUAD) -> MeanValueResult:
    """Largest r (step 0.01 in [-20, 20]) with |int_M f| <= vol(M) eps^r on the tail.

    Returns +inf when the bound holds across the whole range and -inf when it
    fails everywhere.
    """
    integral = integrate_membrane(f, M, cfg)
    vol = volume(M, cfg)
    vc = classify(vol)
    if vc.kind is Kind.NULL:
        raise BoundDegenerateError("vol(M) is null")
    tail = M.grid.tail_slice
    with np.errstate(divide="ignore"):
        lhs = np.log(np.abs(integral.values[tail]))
        lv = np.log(np.abs(vol.values[tail]))
    log_eps = np.log(M.grid.tail)
    slack = 1e-9
    ok = np.all(lhs[None, :] <= lv[None, :] + R_GRID[:, None] * log_eps[None, :] + slack, axis=1)
    if ok.all():
        r_star = math.inf
    elif not ok.any():
        r_star = -math.inf
    else:
        # the condition is monotone in r (log eps < 0): take the last r that holds
        r_star = float(R_GRID[np.flatnonzero(ok)[-1]])
    return MeanValueResult(integral, vol, r_star)


# ------------------------------------------------- n = 1 consistency


@dataclass(frozen=True)
class ConsistencyResult:
    membrane_val: GenNet
    line_val: GenNet
    gap_class: NetClass

    def to_json(self) -> dict:
        return {"membrane_val": self.membrane_val.to_json(), "line_val": self.line_val.to_json(),
                "gap_class": self.gap_class.to_json()}


def interval_consistency(f: Representative, a, b, cfg: QuadConfig = DEFAULT_QUAD) -> ConsistencyResult:
    """One-dimensional membrane integral against the line integral along a + t(b - a)."""
    if f.arity != 1 or f.is_complex_variable:
        raise ValueError("interval consistency needs a real arity-1 representative")
    M = Interval.of(a, b)
    gamma = segment(M.a, M.b)
    mem, mem_abs = membrane_integral(f, M, cfg)
    line, line_abs = _line_real([f], gamma, cfg)
    scale = np.maximum(mem_abs.values, line_abs.values)
    return ConsistencyResult(mem, line, gap_class(mem, line, scale, cfg.gap_rtol))
