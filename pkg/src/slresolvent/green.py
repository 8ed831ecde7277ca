"""Green matrix of w' = A w + phi, alpha w(a) + beta w(b) = 0.

With the fundamental matrix Y and characteristic matrix D = alpha + beta Y(b):

    G(t, s) =  Y(t) D^-1 alpha Y(s)^-1              s <= t
    G(t, s) = -Y(t) D^-1 beta Y(b) Y(s)^-1          s >  t

The scalar resolvent kernel is Gamma = -G_12.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson

from .gridfn import Grid, GridFunction, MatrixGridFunction
from .odeint import FundamentalMatrix, fundamental_matrix
from .quasi_system import QuasiDerivatives

SINGULAR_COND = 1e8
WARN_COND = 1e4


class SingularBoundaryProblem(ArithmeticError):
    """The homogeneous boundary problem has (numerically) nontrivial solutions."""

    def __init__(self, cond: float, delta: np.ndarray | None = None):
        self.cond = cond
        self.delta = delta
        super().__init__(
            f"characteristic matrix is singular: cond = {cond:.3e}; "
            "mu is (numerically) in the spectrum of the boundary problem"
        )


class NearSpectrumWarning(RuntimeWarning):
    pass


def characteristic_matrix(alpha, beta, Y: FundamentalMatrix) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    return alpha + beta @ Y.end


def _cond(delta: np.ndarray) -> float:
    s = np.linalg.svd(delta, compute_uv=False)
    return float(np.inf) if s[-1] == 0 else float(s[0] / s[-1])


@dataclass(frozen=True, eq=False)
class GreenKernel:
    grid: Grid
    fundamental: FundamentalMatrix
    delta: np.ndarray
    delta_cond: float
    lower: np.ndarray  # D^-1 alpha
    upper: np.ndarray  # -D^-1 beta Y(b)
    Yinv: np.ndarray = field(repr=False)

    def _branches(self, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        Y = self.fundamental.Y.values
        v = self.Yinv[:, :, j]  # (n, 2) over s
        lo = (Y[:, i, :] @ self.lower) @ v.T
        up = (Y[:, i, :] @ self.upper) @ v.T
        return lo, up

    def entry(self, i: int, j: int) -> np.ndarray:
        """G_ij on the node tensor grid, indexed [t, s]; G(t, t) is the s <= t branch."""
        lo, up = self._branches(i, j)
        return np.where(np.tri(self.grid.n, dtype=bool), lo, up)

    @cached_property
    def gamma(self) -> np.ndarray:
        g = -self.entry(0, 1)
        g.setflags(write=False)
        return g

    @cached_property
    def G(self) -> np.ndarray:
        """Full (n, n, 2, 2) Green matrix; memory heavy for large grids."""
        n = self.grid.n
        out = np.empty((n, n, 2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[:, :, i, j] = self.entry(i, j)
        return out

    def jump(self) -> np.ndarray:
        """G(t+, t) - G(t-, t) at every node; the identity in exact arithmetic."""
        Y = self.fundamental.Y.values
        return Y @ (self.lower - self.upper) @ self.Yinv

    def gamma_function(self, i: int) -> GridFunction:
        return GridFunction(self.grid, self.gamma[i])


def green_matrix(A: MatrixGridFunction, alpha, beta, stride: int = 1,
                 scale: float | None = None,
                 fundamental: FundamentalMatrix | None = None,
                 mid=None,
                 singular_cond: float = SINGULAR_COND,
                 warn_cond: float = WARN_COND) -> GreenKernel:
    """Assemble the Green kernel.

    The fundamental matrix is integrated on ``A.grid``; the kernel lives on
    every ``stride``-th node of it. ``mid`` selects the RK4 half-step rule.
    """
    if fundamental is None:
        fundamental = fundamental_matrix(A, scale=scale, mid=mid)
    delta = characteristic_matrix(alpha, beta, fundamental)
    cond = _cond(delta)
    if not cond <= singular_cond:
        raise SingularBoundaryProblem(cond, delta)
    if cond > warn_cond:
        warnings.warn(f"characteristic matrix cond = {cond:.3e}: mu is close to the spectrum",
                      NearSpectrumWarning, stacklevel=2)
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    lower = np.linalg.solve(delta, alpha)
    upper = -np.linalg.solve(delta, beta @ fundamental.end)
    kernel_fm = fundamental.subsample(stride) if stride > 1 else fundamental
    return GreenKernel(kernel_fm.grid, kernel_fm, delta, cond, lower, upper, kernel_fm.inverse())


def solve_bvp(A: MatrixGridFunction, alpha, beta, f: GridFunction,
              kernel: GreenKernel | None = None, **kw) -> QuasiDerivatives:
    """(y, D1 y) for D2 y - mu y = f with the given boundary conditions.

    Evaluates w(t) = int G(t, s) phi(s) ds, phi = (0, -f), so that
    y = int Gamma f ds and D1 y = -int G_22 f ds. The kernel factorizes as
    Y(t) M Y(s)^-1 on each side of the diagonal, so the integral reduces to
    cumulative integrals of Y^-1 phi, taken with cumulative Simpson.
    """
    if kernel is None:
        kernel = green_matrix(A, alpha, beta, **kw)
    if not f.grid.same_as(kernel.grid):
        raise ValueError("f must live on the kernel grid")
    phi = np.zeros((f.grid.n, 2), dtype=complex)
    phi[:, 1] = -f.values
    g = np.einsum("nij,nj->ni", kernel.Yinv, phi)
    # complex input is silently truncated by scipy
    below = (cumulative_simpson(g.real, dx=f.grid.h, axis=0, initial=0)
             + 1j * cumulative_simpson(g.imag, dx=f.grid.h, axis=0, initial=0))
    above = below[-1] - below
    inner = below @ kernel.lower.T + above @ kernel.upper.T
    w = np.einsum("nij,nj->ni", kernel.fundamental.Y.values, inner)
    return QuasiDerivatives(GridFunction(f.grid, w[:, 0]), GridFunction(f.grid, w[:, 1]))
