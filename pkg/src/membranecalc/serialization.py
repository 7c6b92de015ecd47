"""Run configuration, JSON decoding of inputs, and JSON/CSV report writing."""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from . import expr as ex
from .gennum import ClassifyConfig, EpsilonGrid, GenNet, NetClass, alpha
from .membrane import Ball, Box, History, Indicator, Interval, PreMembrane, circle
from .pde import TransportProblem, WaveProblem
from .rules import QuadConfig

CONFIG_ENV = "MEMBRANE_CALC_CONFIG"


class InputError(ValueError):
    """Malformed input file or value (exit code 1)."""


# --------------------------------------------------------------- config


@dataclass(frozen=True)
class GridSettings:
    k_min: int = 4
    k_max: int = 48
    per_decade: int = 4
    tail: int = 16

    def __post_init__(self):
        if self.k_min < 0 or self.k_max <= self.k_min or self.per_decade < 1:
            raise ValueError("grid needs 0 <= k_min < k_max and per_decade >= 1")
        if not 4 <= self.tail <= self.k_max - self.k_min + 1:
            raise ValueError("tail must be between 4 and the number of samples")

    def build(self) -> EpsilonGrid:
        return EpsilonGrid.from_decades(self.k_min, self.k_max, self.per_decade, self.tail)


@dataclass(frozen=True)
class RunConfig:
    grid: GridSettings = field(default_factory=GridSettings)
    quad: QuadConfig = field(default_factory=QuadConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    format: str = "json"
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.quad.workers != self.workers:
            object.__setattr__(self, "quad", replace(self.quad, workers=self.workers))

    def to_json(self) -> dict:
        return {"grid": vars(self.grid).copy(), "quad": self.quad.to_json(),
                "classify": self.classify.to_json(), "format": self.format,
                "out": self.out, "workers": self.workers}

    @classmethod
    def from_mapping(cls, data: Mapping) -> "RunConfig":
        def section(kind, key):
            raw = dict(data.get(key, {}))
            known = {f.name for f in fields(kind)}
            unknown = set(raw) - known
            if unknown:
                raise InputError(f"unknown {key} settings: {sorted(unknown)}")
            return kind(**raw)

        unknown = set(data) - {"grid", "quad", "classify", "format", "out", "workers"}
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(section(GridSettings, "grid"), section(QuadConfig, "quad"),
                       section(ClassifyConfig, "classify"), data.get("format", "json"),
                       data.get("out"), int(data.get("workers", 1)))
        except (TypeError, ValueError) as exc:
            raise InputError(f"invalid config: {exc}") from exc


def load_config(path: str | None, env: Mapping[str, str] = os.environ) -> RunConfig:
    """Config from ``path``, else from $MEMBRANE_CALC_CONFIG, else defaults."""
    path = path or env.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    return RunConfig.from_mapping(read_json(path))


def read_json(path: str | os.PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


# ---------------------------------------------------------------- nets


def parse_net(raw, grid: EpsilonGrid, params: Mapping[str, float] | None = None) -> GenNet:
    """Decode a net.

    Accepted forms: numbers; lists of specs (vector nets); "alpha:r" or
    "alpha:NAME" with NAME taken from ``params``; expressions in eps such
    as "exp(-1/eps)" or "0.3 + 2*i"; and {"grid", "values"} objects.
    """
    params = params or {}
    if isinstance(raw, bool):
        raise InputError("booleans are not nets")
    if isinstance(raw, (int, float)):
        return GenNet.constant(float(raw), grid)
    if isinstance(raw, list):
        parts = [parse_net(p, grid, params) for p in raw]
        if any(p.is_vector for p in parts):
            raise InputError("nested vector nets are not supported")
        return GenNet.stack(parts)
    if isinstance(raw, dict):
        try:
            return GenNet.from_json(raw, grid=grid)
        except (KeyError, ValueError) as exc:
            raise InputError(f"invalid net object: {exc}") from exc
    if isinstance(raw, str):
        text = raw.strip()
        if text.startswith("alpha:"):
            arg = text[len("alpha:"):].strip()
            if arg in params:
                return alpha(float(params[arg]), grid)
            try:
                return alpha(float(arg), grid)
            except ValueError:
                raise InputError(f"unknown gauge exponent {arg!r}") from None
        try:
            node = ex.parse(text, list(params))
            env = {ex.EPS: grid.samples, **{k: float(v) for k, v in params.items()}}
            vals = ex.evaluate(node, env)
        except (ex.ExprError, ex.DomainError) as exc:
            raise InputError(f"net {text!r}: {exc}") from exc
        return GenNet(grid, np.broadcast_to(vals, (len(grid),)).copy())
    raise InputError(f"cannot read a net from {raw!r}")


# ------------------------------------------------------------ membranes


def parse_membrane(data: Mapping, grid: EpsilonGrid, params: Mapping[str, float] | None = None) -> PreMembrane:
    params = params or {}
    try:
        variant = data["variant"]
        box = data.get("compact_box")
        if variant == "interval":
            return Interval(parse_net(data["a"], grid, params), parse_net(data["b"], grid, params), box)
        if variant == "box":
            ivs = tuple(Interval(parse_net(a, grid, params), parse_net(b, grid, params))
                        for a, b in data["intervals"])
            return Box(ivs, box)
        if variant == "ball":
            return Ball(parse_net(data["center"], grid, params), parse_net(data["radius"], grid, params), box)
        if variant == "indicator":
            ind = Indicator.from_predicate(data["predicate"], data["bounding_box"], grid)
            return ind
    except KeyError as exc:
        raise InputError(f"membrane is missing field {exc}") from exc
    except ex.ExprError as exc:
        raise InputError(f"membrane predicate: {exc}") from exc
    raise InputError(f"unknown membrane variant {data.get('variant')!r}")


def parse_history(data: Mapping, grid: EpsilonGrid, params: Mapping[str, float] | None = None) -> History:
    params = params or {}
    try:
        if "circle" in data:
            c = data["circle"]
            return circle(parse_net(c.get("center", 0.0), grid, params),
                          parse_net(c.get("radius", 1.0), grid, params), grid)
        growth = data.get("growth", {})
        flags = data.get("flags", {})
        nets = {k: parse_net(v, grid, params) for k, v in data.get("params", {}).items()}
        return History.parse(data["curve"], grid, (float(growth.get("c", 1.0)), int(growth.get("N", 0))),
                             closed=bool(flags.get("closed", False)), simple=bool(flags.get("simple", True)),
                             positively_oriented=bool(flags.get("positively_oriented", False)),
                             params=nets, compact_box=data.get("compact_box"))
    except KeyError as exc:
        raise InputError(f"history is missing field {exc}") from exc
    except ex.ExprError as exc:
        raise InputError(f"history curve: {exc}") from exc


def parse_problem(data: Mapping, grid: EpsilonGrid, params: Mapping[str, float] | None = None):
    """TransportProblem when "b" is present, else WaveProblem."""
    try:
        if "b" in data:
            b = parse_net(data["b"], grid, params)
            return TransportProblem.parse(b, data["g"], data.get("f"), float(data.get("a", 1.0)), grid)
        return WaveProblem.parse(data["g"], data.get("h", "0"), grid)
    except KeyError as exc:
        raise InputError(f"problem is missing field {exc}") from exc
    except ex.ExprError as exc:
        raise InputError(f"problem data: {exc}") from exc


# -------------------------------------------------------------- reports


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def quantity(net: GenNet, cls: NetClass | None = None) -> dict:
    out = {"net": net.to_json()}
    if cls is not None:
        out["class"] = cls.to_json()
    return out


@dataclass
class Report:
    command: str
    inputs: dict
    config: RunConfig
    nets: dict = field(default_factory=dict)       # name -> (GenNet, NetClass | None)
    scalars: dict = field(default_factory=dict)    # name -> JSON-ready value
    table: list | None = None                      # optional row table (taylor)

    def to_json_text(self) -> str:
        body = {"command": self.command, "inputs": self.inputs, "config": self.config.to_json(),
                "results": {k: quantity(n, c) for k, (n, c) in self.nets.items()},
                "scalars": self.scalars}
        if self.table is not None:
            body["table"] = self.table
        return json.dumps(_jsonable(body), indent=2, allow_nan=False) + "\n"

    def to_csv_text(self, grid: EpsilonGrid) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if self.table is not None:
            writer.writerow(self.table[0])
            writer.writerows(self.table[1:])
        else:
            header, cols = ["eps"], [grid.samples]
            for name, (net, _) in self.nets.items():
                v = net.values if net.is_vector else net.values[:, None]
                for j in range(v.shape[1]):
                    suffix = f"_{j + 1}" if net.is_vector else ""
                    if np.iscomplexobj(v):
                        header += [f"{name}{suffix}_re", f"{name}{suffix}_im"]
                        cols += [v[:, j].real, v[:, j].imag]
                    else:
                        header.append(f"{name}{suffix}")
                        cols.append(v[:, j])
            writer.writerow(header)
            for row in zip(*cols):
                writer.writerow([repr(float(x)) for x in row])
        lines = [f"# command: {self.command}"]
        for name, (_, cls) in self.nets.items():
            if cls is not None:
                c = cls.to_json()
                lines.append(f"# {name}: kind={c['kind']} valuation={c['valuation']} residual={c['residual']}")
        for name, value in self.scalars.items():
            lines.append(f"# {name}: {json.dumps(_jsonable(value))}")
        lines.append(f"# inputs: {json.dumps(_jsonable(self.inputs), sort_keys=True)}")
        lines.append(f"# config: {json.dumps(_jsonable(self.config.to_json()), sort_keys=True)}")
        return buf.getvalue() + "\n".join(lines) + "\n"


def write_report(report: Report, grid: EpsilonGrid, out: str | None, fmt: str, force: bool,
                 stdout=None) -> None:
    text = report.to_json_text() if fmt == "json" else report.to_csv_text(grid)
    if out is None:
        (stdout or sys.stdout).write(text)
        return
    path = Path(out)
    if path.exists() and not force:
        raise FileExistsError(f"{out} exists; pass --force to overwrite")
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc.strerror}") from exc
