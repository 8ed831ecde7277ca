"""Experiment configuration: YAML in, validated dataclasses out.

Schema (all keys optional except ``family`` and ``eps``)::

    interval: [0.0, 1.0]        # [a, b]
    grid_n: 201                 # kernel / base grid nodes
    mu: [0.0, 0.0]              # spectral parameter as [re, im]
    points_per_scale: 10        # resolution: h <= eps / points_per_scale
    singular_cond: 1.0e8        # cond(characteristic matrix) above this is singular
    warn_cond: 1.0e4
    family:
      kind: exp_osc | scaled_exp_osc | l2_perturb | table
      theta: 0.2                # scaled_exp_osc, 0 < theta < 1/3
      q0: "0"                   # l2_perturb: expression in t, number, or CSV path
      p: "sin(t)"
      limit: q0.csv             # table: CSV of t, re, im
      rows: [{eps: 0.1, path: q_0.1.csv}]
      eps_max: 1.0
    boundary:
      preset: dirichlet | neumann-quasi | periodic | explicit
      alpha0: [[[1,0],[0,0]], [[0,0],[0,0]]]   # explicit: 2x2 of [re, im]
      beta0:  ...
      alpha1: ...               # optional, alpha(eps) = alpha0 + eps * alpha1
      beta1:  ...
    eps: "g:3:10:2"             # base**-k, k = 3..10; or an explicit list
    thresholds: {decay_rel: 0.01, decay_floor: 1e-8, bound: 1000,
                 divergence_ratio: 10, inversion_tol: 0.1}
    output: {dir: out, format: both}   # csv | json | both

Relative CSV paths resolve against the config file's directory.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .conditions import Thresholds
from .gridfn import Grid, GridFunction, load_csv
from .potential import (PRESETS, BoundaryPair, PotentialFamily, affine_boundary,
                        boundary_preset, family_exp_osc, family_from_table,
                        family_l2_perturb, family_scaled_exp_osc)

FAMILY_KINDS = ("exp_osc", "scaled_exp_osc", "l2_perturb", "table")
BOUNDARY_PRESETS = (*PRESETS, "explicit")
FORMATS = ("csv", "json", "both")

_EXPR_NS = {name: getattr(np, name) for name in
            ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh", "pi", "e")}
_EXPR_NS.update(i=1j, j=1j)


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line, self.key = line, key
        where = f"line {line}: " if line else ""
        where += f"{key}: " if key else ""
        super().__init__(where + message)


@dataclass
class FamilySpec:
    kind: str = "exp_osc"
    theta: float | None = None
    q0: Any = None
    p: Any = None
    limit: str | None = None
    rows: list = field(default_factory=list)
    eps_max: float | None = None


@dataclass
class BoundarySpec:
    preset: str = "dirichlet"
    alpha0: list | None = None
    beta0: list | None = None
    alpha1: list | None = None
    beta1: list | None = None


@dataclass
class OutputSpec:
    dir: str | None = None
    format: str = "both"


@dataclass
class ExperimentConfig:
    family: FamilySpec
    eps: Any
    interval: tuple[float, float] = (0.0, 1.0)
    grid_n: int = 201
    mu: complex = 0j
    points_per_scale: float = 10.0
    singular_cond: float = 1e8
    warn_cond: float = 1e4
    boundary: BoundarySpec = field(default_factory=BoundarySpec)
    thresholds: Thresholds = field(default_factory=Thresholds)
    output: OutputSpec = field(default_factory=OutputSpec)
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    @property
    def grid(self) -> Grid:
        return Grid(self.interval[0], self.interval[1], self.grid_n)

    @property
    def eps_ladder(self) -> tuple[float, ...]:
        return parse_eps(self.eps)

    def to_dict(self) -> dict:
        d = {
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "grid_n": self.grid_n,
            "mu": [self.mu.real, self.mu.imag],
            "points_per_scale": self.points_per_scale,
            "singular_cond": self.singular_cond,
            "warn_cond": self.warn_cond,
            "family": {k: v for k, v in asdict(self.family).items() if v not in (None, [])},
            "boundary": {k: v for k, v in asdict(self.boundary).items() if v is not None},
            "eps": self.eps if isinstance(self.eps, str) else [float(e) for e in self.eps],
            "thresholds": asdict(self.thresholds),
            "output": {k: v for k, v in asdict(self.output).items() if v is not None},
        }
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    # builders

    def _path(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def _function(self, spec, name: str):
        if spec is None:
            spec = 0
        if isinstance(spec, (int, float)):
            return lambda t, c=complex(spec): np.full(t.shape, c)
        if isinstance(spec, str) and spec.endswith(".csv"):
            return load_csv(self._path(spec))
        code = compile(str(spec), f"<family.{name}>", "eval")
        return lambda t: np.asarray(eval(code, {"__builtins__": {}}, {**_EXPR_NS, "t": t}), dtype=complex)

    def build_family(self) -> PotentialFamily:
        f = self.family
        kw = {} if f.eps_max is None else {"eps_max": f.eps_max}
        if f.kind == "exp_osc":
            return family_exp_osc(self.grid, **kw)
        if f.kind == "scaled_exp_osc":
            return family_scaled_exp_osc(self.grid, f.theta, **kw)
        if f.kind == "l2_perturb":
            return family_l2_perturb(self.grid, self._function(f.q0, "q0"), self._function(f.p, "p"), **kw)
        if f.kind == "table":
            q0 = load_csv(self._path(f.limit))
            rows = [(float(r["eps"]), load_csv(self._path(r["path"]))) for r in f.rows]
            return family_from_table(self.grid, rows, q0)
        raise ConfigError(f"unknown family kind {f.kind!r}", key="family.kind")

    def build_boundary(self) -> BoundaryPair:
        b = self.boundary
        if b.preset != "explicit":
            return boundary_preset(b.preset)
        return affine_boundary(_cmatrix(b.alpha0), _cmatrix(b.beta0),
                               _cmatrix(b.alpha1) if b.alpha1 is not None else None,
                               _cmatrix(b.beta1) if b.beta1 is not None else None)


def _cmatrix(m) -> np.ndarray:
    """2x2 nested list of [re, im] pairs (or plain reals) to a complex array."""
    arr = np.asarray(m, dtype=float)
    if arr.shape == (2, 2):
        return arr.astype(complex)
    if arr.shape == (2, 2, 2):
        return arr[..., 0] + 1j * arr[..., 1]
    raise ValueError(f"expected a 2x2 matrix of [re, im] pairs, got shape {arr.shape}")


def parse_eps(spec) -> tuple[float, ...]:
    """``"g:kmin:kmax:base"`` -> base**-k for k = kmin..kmax; or a list / comma string."""
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith("g:"):
            parts = s.split(":")
            if len(parts) != 4:
                raise ValueError(f"geometric ladder must be g:kmin:kmax:base, got {spec!r}")
            kmin, kmax, base = int(parts[1]), int(parts[2]), float(parts[3])
            if kmax < kmin or base <= 1:
                raise ValueError(f"need kmin <= kmax and base > 1 in {spec!r}")
            return tuple(base ** (-k) for k in range(kmin, kmax + 1))
        items = [x for x in s.replace(";", ",").split(",") if x.strip()]
        vals = tuple(float(x) for x in items)
    elif spec is None:
        vals = ()
    else:
        vals = tuple(float(x) for x in spec)
    if not vals:
        raise ValueError("eps ladder is empty")
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(vals, vals[1:])):
        raise ValueError("eps ladder must be strictly decreasing")
    return vals


def parse_mu(spec) -> complex:
    if isinstance(spec, str):
        parts = [p for p in spec.split(",") if p.strip()]
        spec = [float(p) for p in parts]
    if isinstance(spec, (int, float)):
        return complex(spec)
    vals = [float(x) for x in spec]
    if len(vals) == 1:
        vals.append(0.0)
    if len(vals) != 2:
        raise ValueError("mu must be given as re,im")
    return complex(vals[0], vals[1])


def _line_map(node, prefix=(), out=None) -> dict:
    out = {} if out is None else out
    out[prefix] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _line_map(v, prefix + (k.value,), out)
            out.setdefault(prefix + (k.value,), k.start_mark.line + 1)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, prefix + (i,), out)
    return out


def _num(x, key, lines, kind=float):
    try:
        v = kind(float(x)) if kind is int else float(x)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {x!r}", lines.get(tuple(key.split("."))), key) from None
    if kind is int and v != float(x):
        raise ConfigError(f"expected an integer, got {x!r}", lines.get(tuple(key.split("."))), key)
    return v


def _dataclass_from(cls, raw: dict, key: str, lines: dict):
    if not isinstance(raw, dict):
        raise ConfigError("expected a mapping", lines.get((key,)), key)
    names = {f.name for f in fields(cls)}
    for k in raw:
        if k not in names:
            raise ConfigError(f"unknown key (allowed: {sorted(names)})", lines.get((key, k)), f"{key}.{k}")
    return cls(**raw)


def from_dict(raw: dict, base_dir: Path = Path("."), lines: dict | None = None) -> ExperimentConfig:
    lines = lines or {}
    line = lambda *k: lines.get(tuple(k))
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    known = {f.name for f in fields(ExperimentConfig)} - {"base_dir"}
    for k in raw:
        if k not in known:
            raise ConfigError(f"unknown key (allowed: {sorted(known)})", line(k), k)
    if "family" not in raw:
        raise ConfigError("missing required key", None, "family")
    if "eps" not in raw:
        raise ConfigError("missing required key", None, "eps")

    interval = raw.get("interval", [0.0, 1.0])
    if not isinstance(interval, (list, tuple)) or len(interval) != 2:
        raise ConfigError("interval must be [a, b]", line("interval"), "interval")
    a, b = (_num(x, "interval", lines) for x in interval)
    if not b > a:
        raise ConfigError(f"need a < b, got [{a}, {b}]", line("interval"), "interval")
    grid_n = _num(raw.get("grid_n", 201), "grid_n", lines, int)
    if grid_n < 2:
        raise ConfigError("grid_n must be >= 2", line("grid_n"), "grid_n")
    try:
        mu = parse_mu(raw.get("mu", [0.0, 0.0]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), line("mu"), "mu") from None

    fam = _dataclass_from(FamilySpec, raw["family"], "family", lines)
    if fam.kind not in FAMILY_KINDS:
        raise ConfigError(f"kind must be one of {FAMILY_KINDS}, got {fam.kind!r}",
                          line("family", "kind"), "family.kind")
    if fam.kind == "scaled_exp_osc":
        if fam.theta is None:
            raise ConfigError("scaled_exp_osc needs theta", line("family"), "family.theta")
        fam.theta = _num(fam.theta, "family.theta", lines)
        if not 0 < fam.theta < 1 / 3:
            raise ConfigError(f"theta={fam.theta} violates 0 < theta < 1/3 (eps*rho^3 -> 0)",
                              line("family", "theta"), "family.theta")
    if fam.kind == "table":
        if not fam.limit or not fam.rows:
            raise ConfigError("table family needs 'limit' and a non-empty 'rows' list",
                              line("family"), "family")
        for i, r in enumerate(fam.rows):
            if not isinstance(r, dict) or "eps" not in r or "path" not in r:
                raise ConfigError("each row needs eps and path", line("family", "rows", i), f"family.rows[{i}]")
            r["eps"] = _num(r["eps"], f"family.rows", lines)
    if fam.eps_max is not None:
        fam.eps_max = _num(fam.eps_max, "family.eps_max", lines)

    bnd = _dataclass_from(BoundarySpec, raw.get("boundary", {}), "boundary", lines)
    if bnd.preset not in BOUNDARY_PRESETS:
        raise ConfigError(f"preset must be one of {BOUNDARY_PRESETS}, got {bnd.preset!r}",
                          line("boundary", "preset"), "boundary.preset")
    if bnd.preset == "explicit":
        for name in ("alpha0", "beta0", "alpha1", "beta1"):
            m = getattr(bnd, name)
            if m is None:
                if name.endswith("0"):
                    raise ConfigError("explicit boundary needs alpha0 and beta0", line("boundary"),
                                      f"boundary.{name}")
                continue
            try:
                _cmatrix(m)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc), line("boundary", name), f"boundary.{name}") from None

    eps = raw["eps"]
    try:
        parse_eps(eps)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), line("eps"), "eps") from None
    if not isinstance(eps, str):
        eps = [float(e) for e in eps]

    th_raw = _dataclass_from(Thresholds, raw.get("thresholds", {}), "thresholds", lines)
    th = Thresholds(**{f.name: _num(getattr(th_raw, f.name), f"thresholds.{f.name}", lines)
                       for f in fields(Thresholds)})
    if any(getattr(th, f.name) <= 0 for f in fields(Thresholds)):
        raise ConfigError("thresholds must be positive", line("thresholds"), "thresholds")

    out = _dataclass_from(OutputSpec, raw.get("output", {}), "output", lines)
    if out.format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}", line("output", "format"), "output.format")

    pps = _num(raw.get("points_per_scale", 10.0), "points_per_scale", lines)
    sing = _num(raw.get("singular_cond", 1e8), "singular_cond", lines)
    warn = _num(raw.get("warn_cond", 1e4), "warn_cond", lines)
    if pps <= 0 or sing <= 1 or warn <= 1:
        raise ConfigError("points_per_scale must be > 0 and condition thresholds > 1")
    return ExperimentConfig(family=fam, eps=eps, interval=(a, b), grid_n=grid_n, mu=mu,
                            points_per_scale=pps, singular_cond=sing, warn_cond=warn,
                            boundary=bnd, thresholds=th, output=out, base_dir=Path(base_dir))


def loads(text: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None) from None
    lines = _line_map(node) if node is not None else {}
    return from_dict(raw if raw is not None else {}, base_dir, lines)


def load(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return loads(path.read_text(), path.parent)


def with_overrides(cfg: ExperimentConfig, *, grid_n=None, eps=None, mu=None) -> ExperimentConfig:
    if grid_n is not None:
        if grid_n < 2:
            raise ConfigError("--grid-n must be >= 2")
        cfg = replace(cfg, grid_n=int(grid_n))
    if eps is not None:
        try:
            parse_eps(eps)
        except ValueError as exc:
            raise ConfigError(str(exc), key="--eps") from None
        cfg = replace(cfg, eps=eps)
    if mu is not None:
        try:
            cfg = replace(cfg, mu=parse_mu(mu))
        except ValueError as exc:
            raise ConfigError(str(exc), key="--mu") from None
    return cfg
