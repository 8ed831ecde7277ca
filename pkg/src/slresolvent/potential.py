"""Potential families eps -> q_eps and eps-dependent boundary matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gridfn import Grid, GridFunction


@dataclass(frozen=True)
class PotentialFamily:
    """A rule producing q_eps on any grid, plus the declared limit q_0.

    ``scale(eps)`` is the oscillation length of q_eps (``None`` for smooth
    families); drivers refine the grid so that h <= scale / 10.
    Evaluating at eps = 0 always returns the limit, never the generator.
    """

    kind: str
    generator: Callable[[Grid, float], GridFunction]
    limit_rule: Callable[[Grid], GridFunction]
    eps_max: float = 1.0
    scale: Callable[[float], float | None] = field(default=lambda eps: None)
    listed_eps: tuple[float, ...] | None = None
    native_grid: Grid | None = None
    params: dict = field(default_factory=dict)

    def limit(self, grid: Grid) -> GridFunction:
        return self.limit_rule(grid)

    def __call__(self, eps: float, grid: Grid) -> GridFunction:
        if eps < 0 or not math.isfinite(eps):
            raise ValueError(f"eps must be >= 0, got {eps}")
        if eps == 0:
            return self.limit(grid)
        if eps > self.eps_max * (1 + 1e-12):
            raise ValueError(f"eps={eps} exceeds eps_max={self.eps_max} for family {self.kind}")
        return self.generator(grid, eps)

    def oscillation_scale(self, eps: float) -> float | None:
        return None if eps == 0 else self.scale(eps)

    def needs_resample(self, grid: Grid) -> bool:
        return self.native_grid is not None and not self.native_grid.same_as(grid)

    @property
    def midpoint_rule(self) -> str:
        # tabulated data may be L2-rough; cubic interpolation would overshoot
        return "linear" if self.kind == "table" else "cubic"


def _check_positive(eps: float) -> None:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")


def _zero(grid: Grid) -> GridFunction:
    return GridFunction.zeros(grid)


def family_exp_osc(grid: Grid | None = None, eps_max: float = 1.0) -> PotentialFamily:
    """q_eps(t) = exp(i t / eps), q_0 = 0.

    ``grid`` is accepted for interface symmetry; families are grid-free rules.
    """

    def gen(g: Grid, eps: float) -> GridFunction:
        _check_positive(eps)
        return GridFunction(g, np.exp(1j * g.nodes / eps))

    return PotentialFamily("exp_osc", gen, _zero, eps_max=eps_max, scale=lambda eps: eps)


def family_scaled_exp_osc(grid: Grid | None = None, theta: float = 0.2,
                          eps_max: float = 1.0) -> PotentialFamily:
    """q_eps(t) = eps**(-theta) * exp(i t / eps), q_0 = 0.

    Requires 0 < theta < 1/3 so that eps * rho(eps)**3 = eps**(1 - 3 theta) -> 0.
    """
    if not 0 < theta < 1 / 3:
        raise ValueError(
            f"theta={theta} violates 0 < theta < 1/3 (needs eps*rho^3 = eps^(1-3*theta) -> 0)"
        )

    def gen(g: Grid, eps: float) -> GridFunction:
        _check_positive(eps)
        return GridFunction(g, eps ** (-theta) * np.exp(1j * g.nodes / eps))

    return PotentialFamily("scaled_exp_osc", gen, _zero, eps_max=eps_max,
                           scale=lambda eps: eps, params={"theta": theta})


def _as_rule(fn) -> Callable[[Grid], GridFunction]:
    if isinstance(fn, GridFunction):
        return fn.resample
    if isinstance(fn, (int, float, complex, np.number)):
        c = complex(fn)
        return lambda g: GridFunction(g, np.full(g.n, c))
    return lambda g: GridFunction.from_callable(g, fn)


def family_l2_perturb(grid: Grid | None, q0, p, eps_max: float = 1.0) -> PotentialFamily:
    """q_eps = q_0 + eps * p.

    ``q0`` and ``p`` are grid functions (resampled linearly when the grid
    differs) or callables of t.
    """
    q0_rule, p_rule = _as_rule(q0), _as_rule(p)

    def gen(g: Grid, eps: float) -> GridFunction:
        return q0_rule(g) + eps * p_rule(g)

    native = None
    for f in (q0, p):
        if isinstance(f, GridFunction):
            native = f.grid
    return PotentialFamily("l2_perturb", gen, q0_rule, eps_max=eps_max, native_grid=native)


def family_constant(q0) -> PotentialFamily:
    """q_eps = q_0 for every eps."""
    fam = family_l2_perturb(None, q0, lambda t: np.zeros_like(t), eps_max=math.inf)
    return PotentialFamily("constant", fam.generator, fam.limit_rule, eps_max=math.inf,
                           native_grid=fam.native_grid)


def family_from_table(grid: Grid | None, rows: Sequence[tuple[float, GridFunction]],
                      q0: GridFunction) -> PotentialFamily:
    """Family defined only at the tabulated eps values.

    Requests on a different grid are answered by linear interpolation;
    ``needs_resample`` tells callers to flag this in reports.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("table family needs at least one (eps, q_eps) row")
    eps_list = tuple(float(e) for e, _ in rows)
    if any(e <= 0 for e in eps_list):
        raise ValueError("tabulated eps values must be positive")
    table = {e: q for e, q in rows}
    native = q0.grid

    def lookup(eps: float) -> GridFunction:
        for e in eps_list:
            if math.isclose(e, eps, rel_tol=1e-9):
                return table[e]
        raise KeyError(f"eps={eps} is not tabulated (have {sorted(eps_list)})")

    def gen(g: Grid, eps: float) -> GridFunction:
        return lookup(eps).resample(g)

    return PotentialFamily("table", gen, q0.resample, eps_max=max(eps_list),
                           listed_eps=eps_list, native_grid=native)


@dataclass(frozen=True)
class BoundaryPair:
    """alpha(eps) Y_a + beta(eps) Y_b = 0 with Y = (y, D1 y)."""

    alpha: Callable[[float], np.ndarray]
    beta: Callable[[float], np.ndarray]
    name: str = "explicit"

    def at(self, eps: float) -> tuple[np.ndarray, np.ndarray]:
        a = np.asarray(self.alpha(eps), dtype=complex)
        b = np.asarray(self.beta(eps), dtype=complex)
        if a.shape != (2, 2) or b.shape != (2, 2):
            raise ValueError("boundary matrices must be 2x2")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("boundary matrices must be finite")
        return a, b


def affine_boundary(alpha0, beta0, alpha1=None, beta1=None, name: str = "explicit") -> BoundaryPair:
    """alpha(eps) = alpha0 + eps * alpha1, likewise for beta."""
    a0, b0 = np.asarray(alpha0, dtype=complex), np.asarray(beta0, dtype=complex)
    a1 = np.zeros((2, 2), complex) if alpha1 is None else np.asarray(alpha1, dtype=complex)
    b1 = np.zeros((2, 2), complex) if beta1 is None else np.asarray(beta1, dtype=complex)
    return BoundaryPair(lambda eps: a0 + eps * a1, lambda eps: b0 + eps * b1, name)


PRESETS = {
    # y(a) = y(b) = 0
    "dirichlet": ([[1, 0], [0, 0]], [[0, 0], [1, 0]]),
    # D1 y(a) = D1 y(b) = 0, quasi-derivative rather than y'
    "neumann-quasi": ([[0, 1], [0, 0]], [[0, 0], [0, 1]]),
    # Y_a = Y_b
    "periodic": ([[1, 0], [0, 1]], [[-1, 0], [0, -1]]),
}


def boundary_preset(name: str) -> BoundaryPair:
    try:
        alpha, beta = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown boundary preset {name!r}; choose from {sorted(PRESETS)}") from None
    return affine_boundary(alpha, beta, name=name)
