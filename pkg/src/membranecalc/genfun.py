"""Generalized functions given by expression representatives f(eps, x)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as ex
from .gennum import EpsilonGrid, GenNet, Kind, classify


class CompactnessError(ValueError):
    """A generalized point (or region) leaves the declared compact set."""

    def __init__(self, message: str, offending: Sequence[int] = ()):
        super().__init__(message if not offending else f"{message}; offending samples {list(offending)}")
        self.offending = list(offending)


class ModeratenessError(ValueError):
    pass


def as_box(box, dim: int | None = None) -> np.ndarray:
    b = np.asarray(box, dtype=float)
    if b.ndim == 1:
        b = b[None, :]
    if b.ndim != 2 or b.shape[1] != 2 or np.any(b[:, 0] > b[:, 1]):
        raise ValueError(f"not a box: {box!r}")
    if dim is not None and b.shape[0] != dim:
        raise ValueError(f"box has dimension {b.shape[0]}, expected {dim}")
    return b


def box_contains(outer: np.ndarray, inner: np.ndarray, tol: float = 0.0) -> bool:
    return bool(np.all(inner[:, 0] >= outer[:, 0] - tol) and np.all(inner[:, 1] <= outer[:, 1] + tol))


def default_variables(arity: int, codomain: str) -> tuple[str, ...]:
    if codomain == "complex" and arity == 1:
        return ("z",)
    return tuple(f"x{k + 1}" for k in range(arity))


@dataclass(frozen=True, eq=False)
class Representative:
    """A representative (f_eps) written as one expression in its variables and eps.

    For complex representatives of one complex variable ``z`` the domain box
    is given over (Re z, Im z).
    """

    body: ex.Expr
    arity: int
    domain_box: np.ndarray
    codomain: str = "real"
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        if self.codomain not in ("real", "complex"):
            raise ValueError(f"codomain must be 'real' or 'complex', got {self.codomain!r}")
        variables = self.variables or default_variables(self.arity, self.codomain)
        object.__setattr__(self, "variables", tuple(variables))
        if len(self.variables) != self.arity:
            raise ValueError("variables do not match arity")
        undeclared = self.body.variables() - set(self.variables) - {ex.EPS}
        if undeclared:
            raise ex.ExprError(f"undeclared variables in body: {sorted(undeclared)}")
        object.__setattr__(self, "domain_box", as_box(self.domain_box, self.space_dim))

    @classmethod
    def parse(cls, body: str, arity: int = 1, domain=None, codomain: str = "real",
              variables: Sequence[str] | None = None, check: bool = True,
              grid: EpsilonGrid | None = None) -> "Representative":
        variables = tuple(variables) if variables else default_variables(arity, codomain)
        dim = 2 if (codomain == "complex" and arity == 1 and variables == ("z",)) else arity
        if domain is None:
            domain = [[-10.0, 10.0]] * dim
        rep = cls(ex.parse(body, variables), arity, domain, codomain, variables)
        if check:
            rep.check_moderate(grid)
        return rep

    @classmethod
    def from_json(cls, data: dict, check: bool = True) -> "Representative":
        return cls.parse(data["body"], int(data.get("arity", 1)), data.get("domain"),
                         data.get("codomain", "real"), data.get("variables"), check=check)

    def to_json(self) -> dict:
        return {"body": str(self.body), "arity": self.arity, "domain": self.domain_box.tolist(),
                "codomain": self.codomain, "variables": list(self.variables)}

    @property
    def is_complex_variable(self) -> bool:
        return self.codomain == "complex" and self.variables == ("z",)

    @property
    def space_dim(self) -> int:
        return 2 if self.is_complex_variable else self.arity

    def __str__(self) -> str:
        return str(self.body)

    def values(self, eps, *coords) -> np.ndarray:
        """Evaluate f(eps, coords...) with numpy broadcasting."""
        env = {ex.EPS: eps}
        env.update(zip(self.variables, coords))
        out = ex.evaluate(self.body, env)
        shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()))
        return np.broadcast_to(out, shape) if np.shape(out) != shape else np.asarray(out)

    def with_body(self, body: ex.Expr) -> "Representative":
        return Representative(body, self.arity, self.domain_box, self.codomain, self.variables)

    def check_moderate(self, grid: EpsilonGrid | None = None, n_points: int = 32, seed: int = 0) -> None:
        """Sampled moderateness: no overflowing or non-finite nets at random points."""
        grid = grid or EpsilonGrid.default()
        rng = np.random.default_rng(seed)
        box = self.domain_box
        pts = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((n_points, box.shape[0]))
        coords = self._coords_from_real(pts[None, :, :])
        vals = self.values(grid.column(), *coords)
        for j in range(n_points):
            c = classify(GenNet(grid, np.broadcast_to(vals[:, j], (len(grid),))))
            if c.kind is Kind.INDETERMINATE:
                raise ModeratenessError(
                    f"representative {self.body} is not moderate near {pts[j].tolist()}")

    def _coords_from_real(self, pts: np.ndarray) -> list[np.ndarray]:
        """Split real coordinates (..., space_dim) into the variables' bindings."""
        if self.is_complex_variable:
            return [pts[..., 0] + 1j * pts[..., 1]]
        return [pts[..., k] for k in range(self.arity)]


def _real_coords(values: np.ndarray) -> np.ndarray:
    """(E,) or (E, n) values -> (E, m) real coordinates (complex -> re, im pairs)."""
    v = values if values.ndim == 2 else values[:, None]
    if np.iscomplexobj(v):
        return np.concatenate([v.real, v.imag], axis=1)
    return v


@dataclass(frozen=True, eq=False)
class GenPoint:
    """A compactly supported generalized point: coordinates plus a compact box."""

    coords: GenNet
    compact_box: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = _real_coords(self.coords.values)
        tail = pts[self.coords.grid.tail_slice]
        if self.compact_box is None:
            box = np.stack([tail.min(axis=0), tail.max(axis=0)], axis=1)
        else:
            box = as_box(self.compact_box, pts.shape[1])
        object.__setattr__(self, "compact_box", box)
        inside = np.all((tail >= box[:, 0]) & (tail <= box[:, 1]), axis=1)
        if not np.all(inside):
            offset = len(self.coords.grid) - self.coords.grid.tail_len
            raise CompactnessError("generalized point leaves its compact box",
                                   [offset + int(k) for k in np.flatnonzero(~inside)])

    @classmethod
    def of(cls, x, grid: EpsilonGrid | None = None, box=None) -> "GenPoint":
        if isinstance(x, GenPoint):
            return x
        if not isinstance(x, GenNet):
            x = GenNet.constant(np.asarray(x), grid)
        return cls(x, box)

    @property
    def grid(self) -> EpsilonGrid:
        return self.coords.grid

    def real_coords(self) -> np.ndarray:
        return _real_coords(self.coords.values)


def _check_point(f: Representative, x: GenPoint) -> None:
    if x.real_coords().shape[1] != f.space_dim:
        raise ValueError(f"point of dimension {x.real_coords().shape[1]} fed to arity-{f.arity} representative")
    if not box_contains(f.domain_box, x.compact_box):
        raise CompactnessError(
            f"point box {x.compact_box.tolist()} not inside domain {f.domain_box.tolist()}")


def evaluate_at(f: Representative, x) -> GenNet:
    """The net eps -> f_eps(x_eps) (the point value of f at a generalized point)."""
    x = GenPoint.of(x)
    _check_point(f, x)
    coords = f._coords_from_real(x.real_coords())
    return GenNet(x.grid, f.values(x.grid.samples, *coords))


def gradient(f: Representative) -> list[Representative]:
    return [f.with_body(ex.differentiate(f.body, v)) for v in f.variables]


def derivative_along_curve(f: Representative, gamma, t0: float) -> GenNet:
    """(f o gamma)'(t0) = <grad f(gamma(t0)) | gamma'(t0)>, eps-wise."""
    if not 0.0 <= t0 <= 1.0:
        raise ValueError("t0 must lie in [0, 1]")
    if gamma.dim != f.space_dim:
        raise ValueError("curve dimension does not match representative arity")
    if not box_contains(f.domain_box, gamma.compact_box):
        raise CompactnessError("curve image is not inside the representative's domain")
    t = np.array([t0])
    pos = gamma.points(t)[:, 0, :]
    vel = gamma.velocity(t)[:, 0, :]
    eps = gamma.grid.samples
    total = np.zeros(len(eps), dtype=complex if f.codomain == "complex" else float)
    coords = [pos[:, k] for k in range(f.arity)]
    for k, g in enumerate(gradient(f)):
        total = total + g.values(eps, *coords) * vel[:, k]
    return GenNet(gamma.grid, total)
