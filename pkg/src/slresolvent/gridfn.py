"""Complex grid functions on a uniform mesh of [a, b].

All quadrature is composite trapezoid. Matrix-valued functions are stored
as ``(n, m, m)`` arrays and vector-valued ones as ``(n, m)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise ValueError(f"need finite a < b, got [{self.a}, {self.b}]")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need at least 2 nodes, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def nodes(self) -> np.ndarray:
        t = np.linspace(self.a, self.b, self.n)
        t[-1] = self.b
        return t

    @property
    def midpoints(self) -> np.ndarray:
        t = self.nodes
        return 0.5 * (t[1:] + t[:-1])

    def weights(self) -> np.ndarray:
        """Trapezoid weights, summing to b - a."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def refine(self, factor: int) -> "Grid":
        """Subdivide every cell into ``factor`` cells; old nodes are kept."""
        if factor < 1:
            raise ValueError("refinement factor must be >= 1")
        return Grid(self.a, self.b, (self.n - 1) * factor + 1)

    def refinement_for(self, scale: float | None, points_per_scale: float = 10.0) -> int:
        """Smallest subdivision factor giving h <= scale / points_per_scale."""
        if scale is None:
            return 1
        if scale <= 0:
            raise ValueError("oscillation scale must be positive")
        return max(1, math.ceil(self.h * points_per_scale / scale * (1 - 1e-12)))

    def same_as(self, other: "Grid") -> bool:
        return self.n == other.n and math.isclose(self.a, other.a) and math.isclose(self.b, other.b)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        t = grid.nodes
        return cls(grid, np.broadcast_to(np.asarray(fn(t), dtype=complex), t.shape).copy())

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n, dtype=complex))

    def _other(self, other):
        if isinstance(other, GridFunction):
            if not self.grid.same_as(other.grid):
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __pow__(self, k):
        return GridFunction(self.grid, self.values**k)

    def resample(self, grid: Grid) -> "GridFunction":
        """Piecewise-linear interpolation onto ``grid``."""
        if grid.same_as(self.grid):
            return self
        if grid.a < self.grid.a - 1e-12 or grid.b > self.grid.b + 1e-12:
            raise ValueError("target grid extends outside the source interval")
        t, s = grid.nodes, self.grid.nodes
        v = np.interp(t, s, self.values.real) + 1j * np.interp(t, s, self.values.imag)
        return GridFunction(grid, v)


@dataclass(frozen=True, eq=False)
class VectorGridFunction:
    grid: Grid
    values: np.ndarray  # (n, m)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != self.grid.n:
            raise ValueError(f"expected ({self.grid.n}, m) samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vector grid function has non-finite samples")
        object.__setattr__(self, "values", v)

    def component(self, i: int) -> GridFunction:
        return GridFunction(self.grid, self.values[:, i])


@dataclass(frozen=True, eq=False)
class MatrixGridFunction:
    grid: Grid
    values: np.ndarray  # (n, m, m)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != self.grid.n or v.shape[1] != v.shape[2]:
            raise ValueError(f"expected ({self.grid.n}, m, m) samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("matrix grid function has non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, grid: Grid, matrix) -> "MatrixGridFunction":
        M = np.asarray(matrix, dtype=complex)
        return cls(grid, np.broadcast_to(M, (grid.n, *M.shape)).copy())

    def entry(self, i: int, j: int) -> GridFunction:
        return GridFunction(self.grid, self.values[:, i, j])

    def __sub__(self, other: "MatrixGridFunction") -> "MatrixGridFunction":
        return MatrixGridFunction(self.grid, self.values - other.values)

    def __add__(self, other: "MatrixGridFunction") -> "MatrixGridFunction":
        return MatrixGridFunction(self.grid, self.values + other.values)

    def __matmul__(self, other: "MatrixGridFunction") -> "MatrixGridFunction":
        """Pointwise matrix product."""
        return MatrixGridFunction(self.grid, self.values @ other.values)

    def subsample(self, stride: int) -> "MatrixGridFunction":
        if (self.grid.n - 1) % stride:
            raise ValueError("stride must divide the number of cells")
        coarse = Grid(self.grid.a, self.grid.b, (self.grid.n - 1) // stride + 1)
        return MatrixGridFunction(coarse, self.values[::stride])


def _cumtrapz(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    np.cumsum(0.5 * h * (values[1:] + values[:-1]), axis=0, out=out[1:])
    return out


def trapezoid(values: np.ndarray, grid: Grid) -> complex | np.ndarray:
    return np.tensordot(grid.weights(), values, axes=(0, 0))


def antiderivative(c):
    """Cumulative integral from a; exactly zero at the first node.

    Works entrywise on matrix grid functions.
    """
    if isinstance(c, MatrixGridFunction):
        return MatrixGridFunction(c.grid, _cumtrapz(c.values, c.grid.h))
    return GridFunction(c.grid, _cumtrapz(c.values, c.grid.h))


def norm_l2(c: GridFunction) -> float:
    return math.sqrt(max(float(trapezoid(np.abs(c.values) ** 2, c.grid)), 0.0))


def norm_l1(c: GridFunction) -> float:
    return float(trapezoid(np.abs(c.values), c.grid))


def norm_sup(c) -> float:
    """Max over nodes; row-sum matrix norm for matrix grid functions."""
    if isinstance(c, MatrixGridFunction):
        return float(np.max(row_sum_norm(c.values)))
    return float(np.max(np.abs(c.values)))


def row_sum_norm(M: np.ndarray) -> np.ndarray:
    """Max absolute row sum over the last two axes."""
    return np.abs(M).sum(axis=-1).max(axis=-1)


def norm_l1_matrix(M: MatrixGridFunction) -> float:
    return float(trapezoid(row_sum_norm(M.values), M.grid))


def load_csv(path: str | Path) -> GridFunction:
    """Read ``t, re, im`` rows into a grid function on their own uniform grid.

    Lines starting with ``#`` and a non-numeric header row are skipped.
    """
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in rec[:3]])
            except ValueError:
                if rows:
                    raise
                continue  # header
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: need at least two rows of t, re[, im]")
    t = data[:, 0]
    grid = Grid(float(t[0]), float(t[-1]), len(t))
    if not np.allclose(t, grid.nodes, atol=1e-9 * grid.length):
        raise ValueError(f"{path}: nodes are not uniformly spaced")
    im = data[:, 2] if data.shape[1] > 2 else 0.0
    return GridFunction(grid, data[:, 1] + 1j * im)


def save_csv(c: GridFunction, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re", "im"])
        for t, v in zip(c.grid.nodes, c.values):
            w.writerow([f"{t:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
