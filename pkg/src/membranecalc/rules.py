"""Quadrature rules shared by volumes, membrane integrals and contour integrals."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq


class IntegrabilitySuspectError(ArithmeticError):
    """Refinement of an indicator-region integral failed to converge."""


@dataclass(frozen=True)
class QuadConfig:
    """Node counts and tolerances.

    The same node counts are used at every epsilon.  Integrands oscillating
    like sin(x/eps) are therefore under-resolved for small eps; this is
    deliberate, since growing the rule with 1/eps would hide moderateness.
    """

    gauss_order: int = 64
    segments: int = 8
    ball_radial: int = 64
    ball_angular: int = 128
    indicator_refine_max: int = 40
    indicator_samples: int = 257
    indicator_tol: float = 1e-9
    abs_tol: float = 1e-10
    gap_rtol: float = 1e-9
    workers: int = 1

    def __post_init__(self):
        for name in ("gauss_order", "segments", "ball_radial", "ball_angular", "indicator_samples"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.indicator_refine_max < 1 or self.workers < 1:
            raise ValueError("indicator_refine_max must be >= 1 and workers >= 1")
        if not (self.abs_tol > 0 and self.indicator_tol > 0 and self.gap_rtol > 0):
            raise ValueError("tolerances must be positive")

    def to_json(self) -> dict:
        return asdict(self)


DEFAULT_QUAD = QuadConfig()


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=64)
def composite_unit(order: int, segments: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1] with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.arange(segments)[:, None] / segments
    nodes = (edges + x[None, :] / segments).ravel()
    weights = np.tile(w / segments, segments)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite(a, b, order: int, segments: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [a, b]; ``a``, ``b`` broadcast, nodes along the last axis."""
    u, w = composite_unit(order, segments)
    a = np.asarray(a)[..., None]
    b = np.asarray(b)[..., None]
    return a + (b - a) * u, (b - a) * w


def map_eps(fn: Callable[[int], object], n: int, workers: int = 1) -> list:
    """Run ``fn`` for each epsilon index; results come back in index order."""
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


# ------------------------------------------------------ indicator regions

Level = Callable[[np.ndarray], np.ndarray]
Integrand = Callable[[np.ndarray], np.ndarray]


def _bisect(level: Level, base: np.ndarray, axis: int, lo: np.ndarray, hi: np.ndarray,
            lo_inside: np.ndarray, iterations: int = 200) -> np.ndarray:
    """Locate the boundary of {level <= 0} between lo and hi along ``axis``."""
    lo, hi = lo.copy(), hi.copy()
    pts = base.copy()
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        pts[:, axis] = mid
        inside = level(pts) <= 0
        same = inside == lo_inside
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        if np.all(hi - lo <= np.spacing(np.maximum(np.abs(lo), np.abs(hi)))):
            break
    return 0.5 * (lo + hi)


def _runs(flags: np.ndarray) -> list[tuple[int, int]]:
    """Index runs [start, stop] (inclusive) of True in a 1-D bool array."""
    out = []
    padded = np.concatenate([[False], flags, [False]])
    d = np.diff(padded.astype(int))
    for s, e in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)):
        out.append((int(s), int(e) - 1))
    return out


_GOLD = (np.sqrt(5.0) - 1) / 2


def _golden_min(level: Level, base: np.ndarray, axis: int, lo: np.ndarray, hi: np.ndarray,
                iterations: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section minimisation of ``level`` along ``axis``."""
    pts = base.copy()

    def at(v):
        pts[..., axis] = v
        return level(pts)

    a, b = lo.copy(), hi.copy()
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = at(c), at(d)
    for _ in range(iterations):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        # one new evaluation per row: the surviving interior point is reused
        probe = np.where(left, b - _GOLD * (b - a), a + _GOLD * (b - a))
        fp = at(probe)
        c, d, fc, fd = (np.where(left, probe, d), np.where(left, c, probe),
                        np.where(left, fp, fd), np.where(left, fc, fp))
        if np.all(b - a <= np.spacing(np.maximum(np.abs(a), np.abs(b)))):
            break
    x = np.where(fc < fd, c, d)
    return x, np.minimum(fc, fd)


def _sections_1d(level: Level, prefix: np.ndarray, lo: float, hi: float, n_samples: int):
    """Sections of the region along the last axis, endpoints located by bisection.

    ``prefix`` has shape (B, n-1).  Rows whose samples all miss the region
    get a refined minimum of ``level`` so thin sections are not lost.
    Returns arrays (batch, start, stop).
    """
    B, k = prefix.shape
    y = np.linspace(lo, hi, n_samples)
    pts = np.concatenate([np.repeat(prefix[:, None, :], n_samples, axis=1),
                          np.broadcast_to(y[None, :, None], (B, n_samples, 1))], axis=2)
    lv = level(pts)
    inside = lv <= 0
    flips_b, flips_j = np.nonzero(inside[:, 1:] != inside[:, :-1])
    roots = np.empty(0)
    if flips_b.size:
        base = np.concatenate([prefix[flips_b], np.zeros((flips_b.size, 1))], axis=1)
        roots = _bisect(level, base, k, y[flips_j], y[flips_j + 1], inside[flips_b, flips_j])
    batch, start, stop = [], [], []
    j = 0
    for b in range(B):
        cur = lo if inside[b, 0] else None
        while j < flips_b.size and flips_b[j] == b:
            if cur is None:
                cur = roots[j]
            else:
                batch.append(b)
                start.append(cur)
                stop.append(roots[j])
                cur = None
            j += 1
        if cur is not None:
            batch.append(b)
            start.append(cur)
            stop.append(hi)
    missed = np.flatnonzero(~np.any(inside, axis=1))
    if missed.size:
        jmin = np.argmin(lv[missed], axis=1)
        a = y[np.maximum(jmin - 1, 0)]
        c = y[np.minimum(jmin + 1, n_samples - 1)]
        base = np.concatenate([prefix[missed], np.zeros((missed.size, 1))], axis=1)
        ymin, fmin = _golden_min(level, base, k, a, c)
        hit = fmin <= 0
        if np.any(hit):
            rows, ym, a, c = missed[hit], ymin[hit], a[hit], c[hit]
            base = np.concatenate([prefix[rows], np.zeros((rows.size, 1))], axis=1)
            flag = np.zeros(rows.size, dtype=bool)
            left = _bisect(level, base, k, a, ym, flag)
            right = _bisect(level, base, k, ym, c, ~flag)
            batch.extend(rows.tolist())
            start.extend(left.tolist())
            stop.extend(right.tolist())
    return np.asarray(batch, dtype=int), np.asarray(start, dtype=float), np.asarray(stop, dtype=float)


def _slice_min(level: Level, prefix: np.ndarray, axis_vals: np.ndarray, window: np.ndarray,
               n_sub: int) -> np.ndarray:
    """Minimum of ``level`` over the slice {x_k = v} (prefix coordinates fixed)."""
    k = prefix.shape[0]
    rest = window[k + 1:]
    m = rest.shape[0]
    axes = [np.linspace(lo, hi, n_sub) for lo, hi in rest]
    grids = np.meshgrid(*axes, indexing="ij")
    sub = np.stack([g.ravel() for g in grids], axis=1)  # (G, m)
    T, G = axis_vals.size, sub.shape[0]
    pts = np.concatenate([
        np.broadcast_to(prefix, (T, G, k)),
        np.broadcast_to(axis_vals[:, None, None], (T, G, 1)),
        np.broadcast_to(sub[None], (T, G, m)),
    ], axis=2)
    lv = level(pts)
    best = np.argmin(lv, axis=1)
    x = pts[np.arange(T), best].copy()  # (T, n)
    fmin = lv[np.arange(T), best]
    steps = (rest[:, 1] - rest[:, 0]) / (n_sub - 1)
    # coordinate descent in a one-cell bracket around the best sample
    for _ in range(2 if m > 1 else 1):
        for ax in range(m):
            col = k + 1 + ax
            lo_b = np.maximum(x[:, col] - steps[ax], rest[ax, 0])
            hi_b = np.minimum(x[:, col] + steps[ax], rest[ax, 1])
            xv, fv = _golden_min(level, x, col, lo_b, hi_b)
            better = fv < fmin
            x[better, col] = xv[better]
            fmin = np.where(better, fv, fmin)
    return fmin


def _support_pieces(level: Level, prefix: np.ndarray, window: np.ndarray, n_samples: int,
                    n_sub: int) -> list[tuple[float, float]]:
    k = prefix.shape[0]
    lo, hi = window[k]
    xs = np.linspace(lo, hi, n_samples)
    smin = _slice_min(level, prefix, xs, window, n_sub)
    flags = smin <= 0
    pieces = []
    for s, e in _runs(flags):
        a = lo if s == 0 else _refine_edge(level, prefix, window, xs[s - 1], xs[s], n_sub)
        b = hi if e == n_samples - 1 else _refine_edge(level, prefix, window, xs[e + 1], xs[e], n_sub)
        pieces.append((a, b))
    # thin pieces falling between samples: refine local minima of the slice minimum
    padded = np.concatenate([[np.inf], smin, [np.inf]])
    local = np.flatnonzero((smin <= padded[:-2]) & (smin <= padded[2:]) & ~flags)
    for j in local:
        a, c = xs[max(j - 1, 0)], xs[min(j + 1, n_samples - 1)]
        x, f = _golden_scalar(lambda v: float(_slice_min(level, prefix, np.array([v]), window, n_sub)[0]), a, c)
        if f <= 0:
            pieces.append((_refine_edge(level, prefix, window, a, x, n_sub),
                           _refine_edge(level, prefix, window, c, x, n_sub)))
    return sorted(pieces)


def _golden_scalar(fn: Callable[[float], float], a: float, b: float, iterations: int = 80):
    c, d = b - _GOLD * (b - a), a + _GOLD * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        if fc <= 0 or fd <= 0:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = fn(d)
    return (c, fc) if fc < fd else (d, fd)


def _refine_edge(level, prefix, window, outside: float, inside: float, n_sub: int) -> float:
    """Root of the slice minimum between an empty and a non-empty slice."""
    def m(v):
        return float(_slice_min(level, prefix, np.array([v]), window, n_sub)[0])

    m_in = m(inside)
    if m_in == 0:
        return inside
    m_out = m(outside)
    if not m_out > 0:
        return outside
    lo, hi = sorted((outside, inside))
    # relative tolerance only: edges of tiny pieces sit far below the bracket scale
    return brentq(m, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)


def _cosine_nodes(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes after x = a + (b-a)(1 - cos(pi s))/2; smooths sqrt-type endpoints."""
    s, w = gauss_legendre(order)
    x = a + (b - a) * (1 - np.cos(np.pi * s)) / 2
    wx = w * (b - a) * (np.pi / 2) * np.sin(np.pi * s)
    return x, wx


def _integrate(level: Level, window: np.ndarray, integrand: Integrand | None,
               prefix: np.ndarray, ctx: "_Ctx") -> tuple[np.ndarray, np.ndarray]:
    """Integrals (value, |value|) over the remaining axes for each prefix row."""
    n = window.shape[0]
    k = prefix.shape[1]
    B = prefix.shape[0]
    val = np.zeros(B, dtype=complex)
    mag = np.zeros(B)
    if k == n - 1:
        batch, start, stop = _sections_1d(level, prefix, window[k, 0], window[k, 1], ctx.n_samples)
        if batch.size == 0:
            return val, mag
        nodes, weights = composite(start, stop, ctx.section_order, 1)  # (K, q)
        if integrand is None:
            f = np.ones_like(nodes)
        else:
            pts = np.concatenate([np.broadcast_to(prefix[batch][:, None, :], nodes.shape + (k,)),
                                  nodes[..., None]], axis=2)
            f = np.asarray(integrand(pts))
        np.add.at(val, batch, np.sum(weights * f, axis=1))
        np.add.at(mag, batch, np.sum(np.abs(weights * f), axis=1))
        return val, mag
    n_sub = 65 if n - k - 1 == 1 else 33
    for b in range(B):
        key = prefix[b].tobytes()
        pieces = ctx.cache.get(key)
        if pieces is None:
            pieces = _support_pieces(level, prefix[b], window, ctx.n_samples // 2 + 1, n_sub)
            ctx.cache[key] = pieces

        def rule(a, c, boost=1, row=prefix[b]):
            x, w = _cosine_nodes(a, c, boost * ctx.order)
            sub = np.concatenate([np.repeat(row[None, :], x.size, axis=0), x[:, None]], axis=1)
            v, m = _integrate(level, window, integrand, sub, ctx)
            return np.sum(w * v), np.sum(w * m)

        for a, c in pieces:
            if k == 0:
                v, m = _adaptive(rule, a, c, ctx)
            else:
                v, m = rule(a, c, 2)
            val[b] += v
            mag[b] += m
    return val, mag


@dataclass
class _Ctx:
    order: int
    section_order: int
    n_samples: int
    rtol: float
    max_depth: int
    cache: dict
    error: float = 0.0
    leaves: int = 0
    max_leaves: int = 512


def _adaptive(rule, a: float, c: float, ctx: _Ctx) -> tuple[complex, float]:
    """Bisect [a, c] until each half-pair agrees with its parent rule.

    A piece of width w may carry an error of rtol * |mass| * sqrt(w / width),
    so isolated kinks and square-root points inside a support piece (corners
    of perturbed boxes) are bisected towards rather than under-resolved,
    while the accepted errors still sum to a small multiple of rtol.
    """
    root_v, root_m = rule(a, c)
    width = c - a
    budget = 64 * np.finfo(float).eps
    stack = [(a, c, root_v, root_m, 0)]
    total_v, total_m, leaves = 0j, 0.0, 0
    while stack:
        lo, hi, pv, pm, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lv, lm = rule(lo, mid)
        rv, rm = rule(mid, hi)
        err = abs(lv + rv - pv)
        tol = max(ctx.rtol * root_m * np.sqrt((hi - lo) / width), budget * (lm + rm))
        if err <= tol or root_m == 0:
            total_v += lv + rv
            total_m += lm + rm
            leaves += 1
            ctx.error += err
            ctx.leaves += 1
            continue
        if depth + 1 >= ctx.max_depth or leaves + len(stack) > ctx.max_leaves:
            raise IntegrabilitySuspectError(
                f"indicator integral did not converge: change {err:.3g} on [{lo:.6g}, {hi:.6g}]")
        stack.append((mid, hi, rv, rm, depth + 1))
        stack.append((lo, mid, lv, lm, depth + 1))
    return total_v, total_m


def integrate_region(level: Level, window: np.ndarray, integrand: Integrand | None = None,
                     cfg: QuadConfig = DEFAULT_QUAD) -> tuple[complex, float, float]:
    """Integrate over {x in window : level(x) <= 0}.

    Sections along the last axis are located exactly by bisection; the outer
    axes use Gauss rules in a cosine variable on each support piece; pieces of
    the first axis are bisected adaptively up to ``indicator_refine_max``
    levels, inner axes use a fixed rule of twice the base order.  Returns
    (value, integral of |f|, uncertainty).
    """
    window = np.asarray(window, dtype=float)
    ctx = _Ctx(order=max(8, cfg.gauss_order // 4), section_order=max(8, cfg.gauss_order // 2),
               n_samples=cfg.indicator_samples, rtol=cfg.indicator_tol,
               max_depth=cfg.indicator_refine_max, cache={})
    v, m = _integrate(level, window, integrand, np.zeros((1, 0)), ctx)
    return v[0], float(m[0]), float(ctx.error)
