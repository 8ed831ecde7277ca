"""First-order reduction of -y'' + q'y via the quasi-derivatives.

With w = (y, D1 y), D1 y = y' - q y, the equation D2 y - mu y = f becomes
w' = A w + phi where

    A = [[q, 1], [-q**2 - mu, -q]],   phi = (0, -f).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridfn import GridFunction, MatrixGridFunction, VectorGridFunction


@dataclass(frozen=True)
class SystemMatrix:
    A: MatrixGridFunction
    q: GridFunction
    mu: complex


@dataclass(frozen=True)
class QuasiDerivatives:
    d0: GridFunction
    d1: GridFunction

    def __post_init__(self):
        if not self.d0.grid.same_as(self.d1.grid):
            raise ValueError("quasi-derivatives must share a grid")

    def stacked(self) -> np.ndarray:
        return np.stack([self.d0.values, self.d1.values], axis=1)


def _matrix_values(q: np.ndarray, mu: complex) -> np.ndarray:
    A = np.empty((q.shape[0], 2, 2), dtype=complex)
    A[:, 0, 0] = q
    A[:, 0, 1] = 1.0
    A[:, 1, 0] = -q * q - mu
    A[:, 1, 1] = -q
    return A


def system_matrix(q: GridFunction, mu: complex = 0.0) -> SystemMatrix:
    return SystemMatrix(MatrixGridFunction(q.grid, _matrix_values(q.values, complex(mu))), q, complex(mu))


def perturbation_matrix(q_eps: GridFunction, q0: GridFunction) -> MatrixGridFunction:
    """R = A(q_eps) - A(q0); the spectral parameter cancels."""
    dq = (q_eps - q0).values
    dq2 = (q_eps.values**2) - (q0.values**2)
    R = np.zeros((q_eps.grid.n, 2, 2), dtype=complex)
    R[:, 0, 0] = dq
    R[:, 1, 0] = -dq2
    R[:, 1, 1] = -dq
    return MatrixGridFunction(q_eps.grid, R)


def rhs_lift(f: GridFunction) -> VectorGridFunction:
    phi = np.zeros((f.grid.n, 2), dtype=complex)
    phi[:, 1] = -f.values
    return VectorGridFunction(f.grid, phi)


def quasi_derivatives(y: GridFunction, q: GridFunction) -> QuasiDerivatives:
    """(y, y' - q y) with second-order differences, one-sided at the ends."""
    dy = np.gradient(y.values, y.grid.h, edge_order=2)
    return QuasiDerivatives(y, GridFunction(y.grid, dy) - q * y)
