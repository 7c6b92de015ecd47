"""Pre-membranes, histories, null perturbations and volumes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import expr as ex
from .genfun import CompactnessError, as_box, box_contains
from .gennum import EpsilonGrid, GenNet, Kind, NetClass, classify
from .rules import DEFAULT_QUAD, QuadConfig, integrate_region, map_eps


class MembraneError(ValueError):
    pass


class GrowthError(MembraneError):
    pass


class NotNullError(MembraneError):
    def __init__(self, netclass: NetClass):
        super().__init__(f"perturbation is not null (sup net classified {netclass.kind.value})")
        self.netclass = netclass


class PerturbationTooLargeError(MembraneError):
    pass


def _net(value, grid: EpsilonGrid) -> GenNet:
    if isinstance(value, GenNet):
        return value
    return GenNet.constant(value, grid)


def _vector_net(value, grid: EpsilonGrid, dim: int | None = None) -> GenNet:
    if isinstance(value, GenNet):
        net = value
    elif isinstance(value, (list, tuple)) and value and isinstance(value[0], GenNet):
        net = GenNet.stack(list(value))
    else:
        net = GenNet.constant(np.atleast_1d(np.asarray(value, dtype=float)), grid)
    if not net.is_vector:
        net = GenNet(net.grid, net.values[:, None])
    if dim is not None and net.arity != dim:
        raise ValueError(f"expected a {dim}-vector net")
    return net


def _tail_box(windows: np.ndarray, grid: EpsilonGrid) -> np.ndarray:
    tail = windows[grid.tail_slice]
    return np.stack([tail[:, :, 0].min(axis=0), tail[:, :, 1].max(axis=0)], axis=1)


# ------------------------------------------------------------- pre-membranes


class PreMembrane:
    """A family (M_eps) of bounded, Riemann integrable regions.

    Subclasses provide per-eps bounding windows, a level function
    (``level <= 0`` inside) and, where available, exact volumes.
    """

    grid: EpsilonGrid
    dim: int
    compact_box: np.ndarray

    def windows(self) -> np.ndarray:
        """Per-eps bounding boxes, shape (E, dim, 2)."""
        raise NotImplementedError

    def level(self, i: int, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exact_volume(self) -> np.ndarray | None:
        return None

    def _init_box(self, compact_box) -> None:
        windows = self.windows()
        if compact_box is None:
            box = _tail_box(windows, self.grid)
        else:
            box = as_box(compact_box, self.dim)
        tail = windows[self.grid.tail_slice]
        scale = 1e-12 * max(1.0, float(np.max(np.abs(box))))
        ok = np.all((tail[:, :, 0] >= box[:, 0] - scale) & (tail[:, :, 1] <= box[:, 1] + scale), axis=1)
        if not np.all(ok):
            offset = len(self.grid) - self.grid.tail_len
            raise CompactnessError("membrane leaves its compact box",
                                   [offset + int(k) for k in np.flatnonzero(~ok)])
        object.__setattr__(self, "compact_box", box)


@dataclass(frozen=True, eq=False)
class Interval(PreMembrane):
    a: GenNet
    b: GenNet
    compact_box: np.ndarray = None

    def __post_init__(self):
        if self.a.is_vector or self.b.is_vector:
            raise ValueError("interval endpoints must be scalar nets")
        if np.any(self.a.tail_values > self.b.tail_values):
            raise MembraneError("interval requires a <= b on the tail")
        self._init_box(self.compact_box)

    @classmethod
    def of(cls, a, b, grid: EpsilonGrid | None = None, compact_box=None) -> "Interval":
        grid = grid or (a.grid if isinstance(a, GenNet) else b.grid if isinstance(b, GenNet)
                        else EpsilonGrid.default())
        return cls(_net(a, grid), _net(b, grid), compact_box)

    @property
    def grid(self) -> EpsilonGrid:
        return self.a.grid

    dim = 1

    def windows(self):
        return np.stack([self.a.values, self.b.values], axis=1)[:, None, :]

    def level(self, i, pts):
        x = pts[..., 0]
        return np.maximum(self.a.values[i] - x, x - self.b.values[i])

    def exact_volume(self):
        return self.b.values - self.a.values


@dataclass(frozen=True, eq=False)
class Box(PreMembrane):
    intervals: tuple[Interval, ...]
    compact_box: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if not self.intervals:
            raise ValueError("box needs at least one interval")
        self._init_box(self.compact_box)

    @classmethod
    def of(cls, bounds, grid: EpsilonGrid | None = None, compact_box=None) -> "Box":
        grid = grid or EpsilonGrid.default()
        return cls(tuple(Interval.of(a, b, grid) for a, b in bounds), compact_box)

    @property
    def grid(self):
        return self.intervals[0].grid

    @property
    def dim(self):
        return len(self.intervals)

    def windows(self):
        return np.concatenate([iv.windows() for iv in self.intervals], axis=1)

    def level(self, i, pts):
        return np.max(np.stack([iv.level(i, pts[..., k:k + 1]) for k, iv in enumerate(self.intervals)]), axis=0)

    def exact_volume(self):
        return np.prod(np.stack([iv.exact_volume() for iv in self.intervals]), axis=0)


def ball_volume_factor(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True, eq=False)
class Ball(PreMembrane):
    center: GenNet
    radius: GenNet
    compact_box: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "center", _vector_net(self.center, self.radius.grid))
        if self.radius.is_vector:
            raise ValueError("radius must be a scalar net")
        if np.any(self.radius.tail_values <= 0):
            raise MembraneError("ball radius must be positive on the tail")
        self._init_box(self.compact_box)

    @classmethod
    def of(cls, center, radius, grid: EpsilonGrid | None = None, compact_box=None) -> "Ball":
        grid = grid or (radius.grid if isinstance(radius, GenNet) else
                        center.grid if isinstance(center, GenNet) else EpsilonGrid.default())
        return cls(_vector_net(center, grid), _net(radius, grid), compact_box)

    @property
    def grid(self):
        return self.radius.grid

    @property
    def dim(self):
        return self.center.arity

    def windows(self):
        c = self.center.values
        r = self.radius.values[:, None]
        return np.stack([c - r, c + r], axis=2)

    def level(self, i, pts):
        return np.linalg.norm(pts - self.center.values[i], axis=-1) - self.radius.values[i]

    def exact_volume(self):
        return ball_volume_factor(self.dim) * self.radius.values ** self.dim


@dataclass(frozen=True, eq=False)
class Indicator(PreMembrane):
    """Region {x : level_eps(x) <= 0} inside per-eps windows.

    Built from a predicate expression p(x, eps) with p continuously
    differentiable in x, or as the pull-back of another membrane through a
    perturbation.
    """

    level_fn: Callable[[int, np.ndarray], np.ndarray]
    window_values: np.ndarray
    grid: EpsilonGrid
    predicate: ex.Expr | None = None
    compact_box: np.ndarray = None

    def __post_init__(self):
        w = np.asarray(self.window_values, dtype=float)
        if w.ndim == 2:
            w = np.broadcast_to(w, (len(self.grid),) + w.shape).copy()
        object.__setattr__(self, "window_values", w)
        self._init_box(self.compact_box)

    @classmethod
    def from_predicate(cls, text: str, bounding_box, grid: EpsilonGrid | None = None,
                       params: Mapping[str, GenNet] | None = None) -> "Indicator":
        grid = grid or EpsilonGrid.default()
        box = as_box(bounding_box)
        n = box.shape[0]
        names = [f"x{k + 1}" for k in range(n)]
        params = dict(params or {})
        pred = ex.parse(text, names + list(params))
        eps = grid.samples

        def level(i, pts):
            env = {ex.EPS: eps[i]}
            env.update({nm: pts[..., k] for k, nm in enumerate(names)})
            env.update({nm: net.values[i] for nm, net in params.items()})
            return np.real(np.asarray(ex.evaluate(pred, env))) * np.ones(pts.shape[:-1])

        return cls(level, box, grid, pred, box)

    @property
    def dim(self):
        return self.window_values.shape[1]

    def windows(self):
        return self.window_values

    def level(self, i, pts):
        return self.level_fn(i, pts)


# ----------------------------------------------------------------- histories


@dataclass(frozen=True, eq=False)
class History:
    """A family of C^1 curves gamma_eps : [0, 1] -> R^n with |gamma'| <= c eps^-N.

    Curves are expressions in ``t`` and ``eps`` (and named parameter nets).
    """

    curve: tuple[ex.Expr, ...]
    grid: EpsilonGrid
    growth: tuple[float, int] = (1.0, 0)
    closed: bool = False
    simple: bool = True
    positively_oriented: bool = False
    params: Mapping[str, GenNet] = field(default_factory=dict)
    compact_box: np.ndarray = None
    derivative: tuple[ex.Expr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "curve", tuple(self.curve))
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "derivative", tuple(ex.differentiate(c, "t") for c in self.curve))
        c, N = self.growth
        if c <= 0 or N < 0 or int(N) != N:
            raise GrowthError("growth needs c > 0 and integer N >= 0")
        self._validate()

    @classmethod
    def parse(cls, curve: Sequence[str], grid: EpsilonGrid | None = None, growth=(1.0, 0),
              closed: bool = False, simple: bool = True, positively_oriented: bool = False,
              params: Mapping[str, GenNet] | None = None, compact_box=None) -> "History":
        grid = grid or EpsilonGrid.default()
        params = dict(params or {})
        names = ["t"] + list(params)
        exprs = tuple(ex.parse(c, names) for c in curve)
        return cls(exprs, grid, (float(growth[0]), int(growth[1])), closed, simple,
                   positively_oriented, params, compact_box)

    @property
    def dim(self) -> int:
        return len(self.curve)

    def _env(self, t: np.ndarray) -> dict:
        env = {"t": np.asarray(t)[None, :], ex.EPS: self.grid.column()}
        env.update({k: v.values[:, None] for k, v in self.params.items()})
        return env

    def _stack(self, exprs, t) -> np.ndarray:
        env = self._env(t)
        shape = (len(self.grid), np.size(t))
        cols = [np.broadcast_to(np.real(ex.evaluate(e, env)), shape) for e in exprs]
        return np.stack(cols, axis=-1)

    def points(self, t) -> np.ndarray:
        """gamma_eps(t) for every eps: shape (E, T, n)."""
        return self._stack(self.curve, np.atleast_1d(t))

    def velocity(self, t) -> np.ndarray:
        return self._stack(self.derivative, np.atleast_1d(t))

    def _validate(self) -> None:
        t = np.linspace(0.0, 1.0, 64)
        tail = self.grid.tail_slice
        speed = np.linalg.norm(self.velocity(t), axis=-1)[tail]
        c, N = self.growth
        bound = np.max(speed * self.grid.tail[:, None] ** N)
        if not bound <= c:
            raise GrowthError(f"|gamma'| eps^{N} reaches {bound:.4g} > c = {c}")
        if self.closed:
            ends = self.points(np.array([0.0, 1.0]))[tail]
            gap = np.linalg.norm(ends[:, 0] - ends[:, 1], axis=-1)
            if np.any(gap >= 1e-12 * max(1.0, float(np.max(np.abs(ends))))):
                raise MembraneError(f"history declared closed but endpoints differ by {gap.max():.3g}")
        dense = self.points(np.linspace(0.0, 1.0, 1025))
        if self.positively_oriented:
            if self.dim != 2 or not self.closed:
                raise MembraneError("orientation is only defined for closed planar histories")
            area = signed_area(dense[tail])
            if np.any(area == 0):
                raise MembraneError("history collapses below double-precision resolution on the tail")
            if np.any(area < 0):
                raise MembraneError("history declared positively oriented but encloses negative area")
        lo = dense[tail].min(axis=(0, 1))
        hi = dense[tail].max(axis=(0, 1))
        if self.compact_box is None:
            object.__setattr__(self, "compact_box", np.stack([lo, hi], axis=1))
        else:
            box = as_box(self.compact_box, self.dim)
            pad = 1e-12 * max(1.0, float(np.max(np.abs(box))))
            if np.any(lo < box[:, 0] - pad) or np.any(hi > box[:, 1] + pad):
                raise CompactnessError("history image leaves its compact box")
            object.__setattr__(self, "compact_box", box)


def signed_area(pts: np.ndarray) -> np.ndarray:
    """Shoelace area of closed polygons; pts shape (E, T, 2)."""
    centred = pts - pts.mean(axis=-2, keepdims=True)
    x, y = centred[..., 0], centred[..., 1]
    return 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y, axis=-1)


def circle(center, radius, grid: EpsilonGrid | None = None, growth=None, **kw) -> History:
    """Positively oriented circle; center and radius may be nets or classical."""
    grid = grid or EpsilonGrid.default()
    if isinstance(center, GenNet):
        cx, cy = (center.real(), center.imag()) if center.is_complex and not center.is_vector else \
            (center.component(0), center.component(1))
    else:
        z = complex(center) if np.ndim(center) == 0 else complex(*center)
        cx, cy = GenNet.constant(z.real, grid), GenNet.constant(z.imag, grid)
    r = _net(radius, grid)
    if growth is None:
        growth = (1.01 * 2 * math.pi * float(np.max(np.abs(r.tail_values))), 0)
    params = {"cx": cx, "cy": cy, "r": r}
    return History.parse(["cx + r*cos(2*pi*t)", "cy + r*sin(2*pi*t)"], grid, growth,
                         closed=True, simple=True, positively_oriented=True, params=params, **kw)


def segment(a, b, grid: EpsilonGrid | None = None, **kw) -> History:
    """gamma_eps(t) = a_eps + t (b_eps - a_eps) in one dimension."""
    grid = grid or (a.grid if isinstance(a, GenNet) else EpsilonGrid.default())
    a, b = _net(a, grid), _net(b, grid)
    speed = float(np.max(np.abs(b.tail_values - a.tail_values)))
    kw.setdefault("growth", (max(1.01 * speed, 1e-300), 0))
    return History.parse(["a + t*(b - a)"], grid, params={"a": a, "b": b}, **kw)


@dataclass(frozen=True, eq=False)
class HistoryImage:
    """The image family gamma* = (gamma_eps([0, 1])) as a sampled point set."""

    history: History
    n_samples: int = 1024

    @property
    def grid(self):
        return self.history.grid

    @property
    def compact_box(self):
        return self.history.compact_box

    def samples(self) -> np.ndarray:
        t = np.arange(self.n_samples + 1) / self.n_samples
        return self.history.points(t)

    def diameter(self) -> GenNet:
        pts = self.samples()

        def diam(i):
            p = pts[i]
            d = p[:, None, :] - p[None, :, :]
            return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))

        return GenNet(self.grid, np.array(map_eps(diam, len(self.grid))))

    def distance_to(self, point) -> GenNet:
        """d(x, gamma*) by dense sampling plus golden-section refinement in t."""
        h = self.history
        x = _vector_net(point, self.grid, h.dim).values  # (E, n)
        n = self.n_samples
        t = np.arange(n + 1) / n
        d = np.linalg.norm(h.points(t) - x[:, None, :], axis=-1)
        k = np.argmin(d, axis=1)
        best = d[np.arange(len(self.grid)), k]
        lo = np.maximum(t[k] - 1.0 / n, 0.0)
        hi = np.minimum(t[k] + 1.0 / n, 1.0)
        g = (math.sqrt(5) - 1) / 2

        def dist_at(tt):
            env = h._env(np.zeros(1))
            env["t"] = tt[:, None]
            p = np.stack([np.broadcast_to(np.real(ex.evaluate(e, env)), (len(self.grid), 1))[:, 0]
                          for e in h.curve], axis=1)
            return np.linalg.norm(p - x, axis=1)

        c, e = hi - g * (hi - lo), lo + g * (hi - lo)
        for _ in range(80):
            fc, fe = dist_at(c), dist_at(e)
            left = fc < fe
            hi = np.where(left, e, hi)
            lo = np.where(left, lo, c)
            c, e = hi - g * (hi - lo), lo + g * (hi - lo)
        refined = dist_at(0.5 * (lo + hi))
        return GenNet(self.grid, np.minimum(best, refined))


def history_image(gamma: History, n_samples: int = 1024) -> HistoryImage:
    return HistoryImage(gamma, n_samples)


# ---------------------------------------------------------- perturbations


@dataclass(frozen=True, eq=False)
class NullPerturbation:
    """x -> x + Psi_eps(x) with Psi certified null on a compact box."""

    psi: tuple[ex.Expr, ...]
    grid: EpsilonGrid
    compact_box: np.ndarray
    params: Mapping[str, GenNet] = field(default_factory=dict)
    certificate: NetClass = None
    sup: GenNet = None

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(self.psi))
        object.__setattr__(self, "params", dict(self.params))
        box = as_box(self.compact_box, len(self.psi))
        object.__setattr__(self, "compact_box", box)
        pts = _probe_points(box, 64)
        disp = np.stack([self.displacement(i, pts) for i in range(len(self.grid))])  # (E, 64, n)
        sup = GenNet(self.grid, np.max(np.linalg.norm(disp, axis=-1), axis=1))
        cert = classify(sup)
        object.__setattr__(self, "sup", sup)
        object.__setattr__(self, "certificate", cert)
        if cert.kind is not Kind.NULL:
            raise NotNullError(cert)

    @classmethod
    def parse(cls, psi: Sequence[str], compact_box, grid: EpsilonGrid | None = None,
              params: Mapping[str, GenNet] | None = None) -> "NullPerturbation":
        grid = grid or EpsilonGrid.default()
        params = dict(params or {})
        names = [f"x{k + 1}" for k in range(len(psi))] + list(params)
        return cls(tuple(ex.parse(p, names) for p in psi), grid, compact_box, params)

    @classmethod
    def zero(cls, dim: int, compact_box, grid: EpsilonGrid | None = None) -> "NullPerturbation":
        return cls.parse(["0"] * dim, compact_box, grid)

    @property
    def dim(self) -> int:
        return len(self.psi)

    @property
    def is_zero(self) -> bool:
        return all(ex.is_zero(p) for p in self.psi)

    def _env(self, i: int, pts: np.ndarray) -> dict:
        env = {ex.EPS: self.grid.samples[i]}
        env.update({f"x{k + 1}": pts[..., k] for k in range(self.dim)})
        env.update({k: v.values[i] for k, v in self.params.items()})
        return env

    def displacement(self, i: int, pts: np.ndarray) -> np.ndarray:
        env = self._env(i, pts)
        shape = pts.shape[:-1]
        return np.stack([np.broadcast_to(np.real(ex.evaluate(p, env)), shape) for p in self.psi], axis=-1)

    def affine(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(A, c) with Psi_eps(x) = A_eps x + c_eps, when Psi is affine in x."""
        names = [f"x{k + 1}" for k in range(self.dim)]
        jac = [[ex.differentiate(p, v) for v in names] for p in self.psi]
        for row in jac:
            for d in row:
                if any(not ex.is_zero(ex.differentiate(d, v)) for v in names):
                    return None
        E = len(self.grid)
        zero = np.zeros((1, self.dim))
        A = np.empty((E, self.dim, self.dim))
        c = np.empty((E, self.dim))
        for i in range(E):
            env = self._env(i, zero)
            A[i] = [[float(np.real(np.ravel(ex.evaluate(d, env))[0])) for d in row] for row in jac]
            c[i] = self.displacement(i, zero)[0]
        return A, c

    def invert(self, i: int, pts: np.ndarray, max_iter: int = 200) -> np.ndarray:
        """Solve y + Psi_eps(y) = pts by fixed-point iteration."""
        y = np.array(pts, dtype=float)
        tol = 1e-15 * (1.0 + np.max(np.abs(pts))) if pts.size else 0.0
        prev = math.inf
        for _ in range(max_iter):
            nxt = pts - self.displacement(i, y)
            change = float(np.max(np.abs(nxt - y))) if y.size else 0.0
            y = nxt
            if change <= tol:
                return y
            if change > prev and change > 1e3 * tol:
                break
            prev = change
        raise PerturbationTooLargeError(
            f"fixed-point inversion did not contract at eps = {self.grid.samples[i]:.3g}")


def _probe_points(box: np.ndarray, n: int) -> np.ndarray:
    rng = np.random.default_rng(64)
    corners = np.array(np.meshgrid(*box, indexing="ij")).reshape(box.shape[0], -1).T
    k = max(n - corners.shape[0], 0)
    rand = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((k, box.shape[0]))
    return np.concatenate([corners, rand])[:n]


def perturb(M: PreMembrane, psi: NullPerturbation) -> PreMembrane:
    """The equivalent pre-membrane (x + Psi_eps(x))(M_eps)."""
    if psi.dim != M.dim:
        raise ValueError("perturbation dimension does not match membrane")
    if psi.is_zero:
        return M
    grid = M.grid
    aff = psi.affine()
    if aff is not None:
        A, c = aff
        L = np.eye(M.dim)[None] + A
        diagonal = np.allclose(L - np.einsum("eii->ei", L)[:, :, None] * np.eye(M.dim)[None], 0, atol=0)
        if isinstance(M, (Interval, Box)) and diagonal:
            ivs = M.intervals if isinstance(M, Box) else (M,)
            new = []
            for k, iv in enumerate(ivs):
                lo = L[:, k, k] * iv.a.values + c[:, k]
                hi = L[:, k, k] * iv.b.values + c[:, k]
                new.append(Interval(GenNet(grid, np.minimum(lo, hi)), GenNet(grid, np.maximum(lo, hi))))
            out = new[0] if isinstance(M, Interval) else Box(tuple(new))
            _check_enlarged(M, out)
            return out
        if isinstance(M, Ball) and diagonal and np.allclose(L[:, :, :], L[:, :1, :1] * np.eye(M.dim)[None], atol=0):
            lam = L[:, 0, 0]
            center = lam[:, None] * M.center.values + c
            out = Ball(GenNet(grid, center), GenNet(grid, np.abs(lam) * M.radius.values))
            _check_enlarged(M, out)
            return out
    pad = 2.0 * psi.sup.values + 1e-12 * np.max(np.abs(M.windows()), axis=(1, 2))
    windows = M.windows() + np.stack([-pad, pad], axis=1)[:, None, :]

    def level(i, pts):
        return M.level(i, psi.invert(i, pts))

    out = Indicator(level, windows, grid)
    _check_enlarged(M, out)
    return out


def _check_enlarged(M: PreMembrane, out: PreMembrane) -> None:
    width = M.compact_box[:, 1] - M.compact_box[:, 0]
    slack = 0.01 * np.maximum(width, 1e-300) + 1e-12
    big = np.stack([M.compact_box[:, 0] - slack, M.compact_box[:, 1] + slack], axis=1)
    if not box_contains(big, out.compact_box):
        raise CompactnessError("perturbed membrane leaves the enlarged compact box")


def ball_equivalence(ball: Ball, center, radius) -> NullPerturbation:
    """Affine Psi mapping B(c, r) onto B(c', r'): y -> c' + (r'/r)(y - c).

    The result is a valid null perturbation only when c' - c and r' - r are
    null nets.
    """
    grid = ball.grid
    c2 = _vector_net(center, grid, ball.dim)
    r2 = _net(radius, grid)
    params = {"k": GenNet(grid, (r2.values - ball.radius.values) / ball.radius.values)}
    psi = []
    for j in range(ball.dim):
        params[f"c{j + 1}"] = ball.center.component(j)
        params[f"d{j + 1}"] = GenNet(grid, c2.values[:, j] - ball.center.values[:, j])
        psi.append(f"k*(x{j + 1} - c{j + 1}) + d{j + 1}")
    box = ball.compact_box
    return NullPerturbation.parse(psi, box, grid, params)


# ---------------------------------------------------------------- volumes


def volume(M: PreMembrane, cfg: QuadConfig = DEFAULT_QUAD) -> GenNet:
    """vol(M) = [eps -> vol(M_eps)]; exact where a closed form exists."""
    exact = M.exact_volume()
    if exact is not None:
        return GenNet(M.grid, exact)
    windows = M.windows()

    def one(i):
        v, _, _ = integrate_region(lambda p: M.level(i, p), windows[i], None, cfg)
        return float(np.real(v))

    return GenNet(M.grid, np.array(map_eps(one, len(M.grid), cfg.workers)))
