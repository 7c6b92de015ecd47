"""Generalized numbers as sampled epsilon-nets.

A :class:`GenNet` stores one value (real, complex, or a fixed-length vector)
per sample of a shared :class:`EpsilonGrid`.  Asymptotic questions (valuation,
null/invertible) are answered by a log-log least-squares fit over the tail of
the grid, i.e. the smallest ``tail_len`` epsilon values.
"""
from __future__ import annotations

import contextlib
import contextvars
import enum
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

Number = Union[int, float, complex]


class NotInvertibleError(ArithmeticError):
    def __init__(self, netclass: "NetClass"):
        super().__init__(f"divisor is not invertible (classified {netclass.kind.value})")
        self.netclass = netclass


class NormUndefinedError(ArithmeticError):
    def __init__(self, netclass: "NetClass"):
        super().__init__("sharp norm undefined for an Indeterminate net")
        self.netclass = netclass


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EpsilonGrid:
    """Strictly decreasing samples of epsilon in (0, 1]."""

    samples: np.ndarray
    tail_len: int = 16

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("grid samples must be a non-empty 1-D sequence")
        if np.any(s <= 0) or np.any(s > 1):
            raise ValueError("grid samples must lie in (0, 1]")
        if np.any(np.diff(s) >= 0):
            raise ValueError("grid samples must be strictly decreasing")
        if not 4 <= self.tail_len <= s.size:
            raise ValueError(f"tail_len must be in [4, {s.size}], got {self.tail_len}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_decades(cls, k_min: int = 4, k_max: int = 48, per_decade: int = 4,
                     tail_len: int = 16) -> "EpsilonGrid":
        """eps_k = 10**(-k/per_decade) for k = k_min..k_max."""
        k = np.arange(k_min, k_max + 1, dtype=float)
        return cls(10.0 ** (-k / per_decade), tail_len)

    @classmethod
    def default(cls) -> "EpsilonGrid":
        return _DEFAULT_GRID

    def __len__(self) -> int:
        return self.samples.size

    @property
    def tail(self) -> np.ndarray:
        return self.samples[-self.tail_len:]

    @property
    def tail_slice(self) -> slice:
        return slice(len(self) - self.tail_len, None)

    def column(self) -> np.ndarray:
        """Samples shaped (E, 1) for broadcasting against node arrays."""
        return self.samples[:, None]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, EpsilonGrid):
            return NotImplemented
        return self.tail_len == other.tail_len and np.array_equal(self.samples, other.samples)

    def __hash__(self) -> int:
        return hash((self.tail_len, self.samples.tobytes()))


_DEFAULT_GRID = EpsilonGrid.from_decades()


class Kind(str, enum.Enum):
    NULL = "Null"
    INVERTIBLE = "Invertible"
    MODERATE = "Moderate"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ClassifyConfig:
    null_threshold: float = 25.0
    residual_max: float = 0.5
    invertible_margin: float = 2.0
    underflow: float = 1e-300

    def __post_init__(self):
        if not (self.null_threshold > 0 and self.residual_max > 0 and self.underflow > 0):
            raise ValueError("classification thresholds must be positive")
        if self.invertible_margin < 0:
            raise ValueError("invertible_margin must be >= 0")

    def to_json(self) -> dict:
        return dict(vars(self))


DEFAULT_CLASSIFY = ClassifyConfig()
_ACTIVE = contextvars.ContextVar("classify_config", default=DEFAULT_CLASSIFY)


@contextlib.contextmanager
def classification(config: ClassifyConfig):
    """Use ``config`` as the default thresholds inside the block."""
    token = _ACTIVE.set(config)
    try:
        yield config
    finally:
        _ACTIVE.reset(token)


@dataclass(frozen=True)
class NetClass:
    estimated_valuation: float
    fit_residual: float
    kind: Kind

    @property
    def is_null(self) -> bool:
        return self.kind is Kind.NULL

    def to_json(self) -> dict:
        v = self.estimated_valuation
        return {
            "valuation": "inf" if v == math.inf else (None if math.isnan(v) else v),
            "kind": self.kind.value,
            "residual": None if math.isnan(self.fit_residual) else self.fit_residual,
        }


@dataclass(frozen=True, eq=False)
class GenNet:
    """Sampled representative eps -> x_eps on a grid.

    ``values`` has shape (E,) for scalar nets and (E, d) for vector nets.
    """

    grid: EpsilonGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.ndim not in (1, 2) or v.shape[0] != len(self.grid):
            raise ValueError(f"values shape {v.shape} does not match grid of length {len(self.grid)}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # -- constructors
    @classmethod
    def constant(cls, c, grid: EpsilonGrid | None = None) -> "GenNet":
        grid = grid or EpsilonGrid.default()
        c = np.asarray(c)
        return cls(grid, np.broadcast_to(c, (len(grid),) + c.shape).copy())

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray],
                      grid: EpsilonGrid | None = None) -> "GenNet":
        grid = grid or EpsilonGrid.default()
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(grid.samples))
        if vals.ndim == 0:
            vals = np.full(len(grid), vals.item())
        return cls(grid, vals)

    @classmethod
    def stack(cls, nets: list["GenNet"]) -> "GenNet":
        grid = nets[0].grid
        for n in nets:
            _same_grid(grid, n.grid)
        return cls(grid, np.stack([n.values for n in nets], axis=1))

    # -- shape
    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    @property
    def arity(self) -> int:
        return self.values.shape[1] if self.is_vector else 1

    def component(self, i: int) -> "GenNet":
        return GenNet(self.grid, self.values[:, i])

    def magnitude(self) -> "GenNet":
        """Euclidean magnitude net (|x_eps| for scalars)."""
        if self.is_vector:
            return GenNet(self.grid, np.linalg.norm(self.values, axis=1))
        return GenNet(self.grid, np.abs(self.values))

    @property
    def tail_values(self) -> np.ndarray:
        return self.values[self.grid.tail_slice]

    def real(self) -> "GenNet":
        return GenNet(self.grid, np.real(self.values))

    def imag(self) -> "GenNet":
        return GenNet(self.grid, np.imag(self.values))

    # -- arithmetic
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, GenNet):
            _same_grid(self.grid, other.grid)
            if self.is_vector and other.is_vector and self.arity != other.arity:
                raise ValueError("vector nets of different arity")
            return other.values
        return np.asarray(other)

    def _wrap(self, vals) -> "GenNet":
        return GenNet(self.grid, vals)

    def __add__(self, other):
        with np.errstate(all="ignore"):
            return self._wrap(self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        with np.errstate(all="ignore"):
            return self._wrap(self.values - self._coerce(other))

    def __rsub__(self, other):
        with np.errstate(all="ignore"):
            return self._wrap(self._coerce(other) - self.values)

    def __mul__(self, other):
        o = self._coerce(other)
        if self.is_vector and isinstance(other, GenNet) and not other.is_vector:
            o = o[:, None]
        with np.errstate(all="ignore"):
            return self._wrap(self.values * o)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, GenNet):
            cls_ = classify(other)
            if cls_.kind is not Kind.INVERTIBLE:
                raise NotInvertibleError(cls_)
            o = self._coerce(other)
            if self.is_vector and not other.is_vector:
                o = o[:, None]
        else:
            o = np.asarray(other)
            if np.any(o == 0):
                raise ZeroDivisionError("division of a net by a zero constant")
        with np.errstate(all="ignore"):
            return self._wrap(self.values / o)

    def __neg__(self):
        return self._wrap(-self.values)

    def __abs__(self):
        return self.magnitude()

    def __pow__(self, k):
        with np.errstate(all="ignore"):
            return self._wrap(self.values ** k)

    def scale(self, c: Number) -> "GenNet":
        return self * c

    def __repr__(self) -> str:
        return f"GenNet(len={len(self.grid)}, shape={self.values.shape}, tail[-1]={self.values[-1]!r})"

    # -- serialization
    def to_json(self) -> dict:
        out = {"grid": self.grid.samples.tolist(), "values": _encode_values(self.values)}
        if self.is_complex:
            out["complex"] = True
        return out

    @classmethod
    def from_json(cls, data: dict, tail_len: int = 16, grid: EpsilonGrid | None = None) -> "GenNet":
        samples = np.asarray(data["grid"], dtype=float)
        if grid is not None:
            if samples.shape != grid.samples.shape or not np.allclose(samples, grid.samples, rtol=1e-12, atol=0):
                raise GridMismatchError("net grid does not match the run grid")
        else:
            grid = EpsilonGrid(samples, min(tail_len, samples.size))
        return cls(grid, _decode_values(data["values"], bool(data.get("complex", False))))


def _encode_values(v: np.ndarray):
    if np.iscomplexobj(v):
        if v.ndim == 1:
            return [[float(z.real), float(z.imag)] for z in v]
        return [[[float(z.real), float(z.imag)] for z in row] for row in v]
    return v.tolist()


def _decode_values(raw, is_complex: bool) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    # complex samples are [re, im] pairs in the innermost axis
    if is_complex:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr


def _same_grid(a: EpsilonGrid, b: EpsilonGrid) -> None:
    if a is not b and a != b:
        raise GridMismatchError("nets live on different grids")


# ---------------------------------------------------------------- operations


def alpha(r: float, grid: EpsilonGrid | None = None) -> GenNet:
    """The gauge net eps -> eps**r."""
    grid = grid or EpsilonGrid.default()
    return GenNet(grid, grid.samples ** float(r))


def _fit(log_eps: np.ndarray, log_mag: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(log_eps, log_mag, 1)
    resid = log_mag - (slope * log_eps + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))


def classify(a: GenNet, config: ClassifyConfig | None = None, floor=None) -> NetClass:
    """Estimate the valuation of ``a`` and decide Null/Invertible/Moderate.

    ``floor`` (scalar or per-sample array) marks magnitudes at or below it as
    numerically zero; it is how quadrature noise is kept out of gap tests.
    """
    config = config or _ACTIVE.get()
    m = np.abs(a.values) if not a.is_vector else np.linalg.norm(a.values, axis=1)
    if floor is not None:
        fl = np.broadcast_to(np.asarray(floor, dtype=float), m.shape)
        m = np.where(m <= fl, 0.0, m)
    m = m[a.grid.tail_slice]
    eps = a.grid.tail
    if not np.all(np.isfinite(m)):
        return NetClass(math.nan, math.nan, Kind.INDETERMINATE)
    small = m < config.underflow
    if np.all(small):
        return NetClass(math.inf, 0.0, Kind.NULL)
    log_eps = np.log(eps)
    if np.any(small):
        # zeros are only consistent with decay when they fill the deep end of the tail
        first_small = int(np.argmax(small))
        if not np.all(small[first_small:]):
            return NetClass(math.nan, math.nan, Kind.INDETERMINATE)
        if first_small < 2:
            return NetClass(math.inf, 0.0, Kind.NULL)
        slope, _, resid = _fit(log_eps[:first_small], np.log(m[:first_small]))
        if slope >= config.null_threshold:
            return NetClass(slope, resid, Kind.NULL)
        return NetClass(slope, resid, Kind.INDETERMINATE)
    log_m = np.log(m)
    slope, _, resid = _fit(log_eps, log_m)
    if slope >= config.null_threshold and resid <= config.residual_max:
        return NetClass(slope, resid, Kind.NULL)
    local_exponent = log_m / log_eps
    if resid <= config.residual_max and np.max(local_exponent) <= slope + config.invertible_margin:
        return NetClass(slope, resid, Kind.INVERTIBLE)
    return NetClass(slope, resid, Kind.MODERATE)


def valuation(a: GenNet, config: ClassifyConfig | None = None) -> float:
    return classify(a, config).estimated_valuation


def sharp_norm(a: GenNet, config: ClassifyConfig | None = None) -> float:
    """exp(-valuation); 0 for null nets."""
    c = classify(a, config)
    if c.kind is Kind.INDETERMINATE:
        raise NormUndefinedError(c)
    if c.kind is Kind.NULL:
        return 0.0
    return math.exp(-c.estimated_valuation)


def gen_distance(x: GenNet, y) -> GenNet:
    """eps-wise Euclidean distance; ``y`` may be a net or a classical point."""
    d = x - y
    return d.magnitude()


def in_ball(x: GenNet, x0, r: float) -> bool:
    """Membership of ``x`` in V_r[x0]: |x_eps - x0_eps| <= eps**r on the tail."""
    d = gen_distance(x, x0).tail_values
    bound = x.grid.tail ** float(r)
    x0_mag = np.abs(x0.values if isinstance(x0, GenNet) else np.asarray(x0))
    if x0_mag.ndim > 1:
        x0_mag = x0_mag.max(axis=1)
    if np.ndim(x0_mag):
        x0_mag = x0_mag[x.grid.tail_slice]
    slack = 1e-12 * bound + 4 * np.spacing(np.maximum(x0_mag, np.abs(x.magnitude().tail_values)))
    return bool(np.all(d <= bound + slack))


def equals(a: GenNet, b, config: ClassifyConfig | None = None) -> bool:
    """Equality in the ring: the difference is null."""
    return classify(a - b, config).kind is Kind.NULL


def associated(a: GenNet, b) -> bool:
    """a ~ b: the tail magnitudes of the difference decrease towards 0, at any rate."""
    m = (a - b).magnitude().tail_values
    if np.all(m == 0):
        return True
    if not np.all(np.isfinite(m)):
        return False
    eps = a.grid.tail
    slope = np.polyfit(np.log(eps), np.log(np.maximum(m, 1e-320)), 1)[0]
    return bool(slope > 0 and m[-1] < m[0])


def gap_class(lhs: GenNet, rhs, scale=None, rtol: float = 1e-9,
              config: ClassifyConfig | None = None) -> NetClass:
    """Classify ``lhs - rhs`` after discarding per-sample quadrature noise.

    The noise floor is ``rtol * scale`` where ``scale`` is the magnitude of
    what was summed to produce the operands (defaults to max(|lhs|, |rhs|)).
    """
    diff = lhs - rhs
    if scale is None:
        rv = rhs.values if isinstance(rhs, GenNet) else np.asarray(rhs)
        scale = np.maximum(np.abs(lhs.values), np.abs(rv))
    elif isinstance(scale, GenNet):
        scale = np.abs(scale.values)
    if np.ndim(scale) == 2:
        scale = np.max(scale, axis=1)
    return classify(diff, config, floor=rtol * np.asarray(scale))
