"""Classical RK4 for complex linear systems on a fixed uniform grid.

Coefficients at half-steps are taken by linear interpolation between
nodes unless explicit midpoint samples are supplied. Because the system is
linear, each step is a matrix propagator P_k and the solution is the
running product P_{k-1} ... P_0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gridfn import Grid, MatrixGridFunction, VectorGridFunction


class ResolutionError(ValueError):
    """Grid too coarse for the declared oscillation scale."""


POINTS_PER_SCALE = 10.0


def check_resolution(grid: Grid, scale: float | None, points_per_scale: float = POINTS_PER_SCALE) -> None:
    if scale is None:
        return
    if grid.h > scale / points_per_scale * (1 + 1e-9):
        raise ResolutionError(
            f"step h={grid.h:.3g} exceeds scale/{points_per_scale:g}={scale / points_per_scale:.3g}; "
            f"refine to n >= {grid.refine(grid.refinement_for(scale, points_per_scale)).n}"
        )


def interp_midpoints(A: np.ndarray) -> np.ndarray:
    """Cell-midpoint values of node samples by 4-point cubic interpolation.

    One-sided stencils in the end cells; linear when there are fewer than
    four nodes. Keeps RK4 fourth order when only node samples are known.
    """
    if A.shape[0] < 4:
        return 0.5 * (A[:-1] + A[1:])
    mid = np.empty((A.shape[0] - 1, *A.shape[1:]), dtype=np.result_type(A, float))
    mid[1:-1] = (-A[:-3] + 9.0 * A[1:-2] + 9.0 * A[2:-1] - A[3:]) / 16.0
    mid[0] = (5.0 * A[0] + 15.0 * A[1] - 5.0 * A[2] + A[3]) / 16.0
    mid[-1] = (5.0 * A[-1] + 15.0 * A[-2] - 5.0 * A[-3] + A[-4]) / 16.0
    return mid


MIDPOINT_RULES = ("cubic", "linear")


def midpoint_values(A: np.ndarray, mid=None) -> np.ndarray:
    """Half-step coefficients: exact samples if given as an array, else interpolated."""
    if mid is None or (isinstance(mid, str) and mid == "cubic"):
        return interp_midpoints(A)
    if isinstance(mid, str):
        if mid != "linear":
            raise ValueError(f"midpoint rule must be one of {MIDPOINT_RULES} or an array, got {mid!r}")
        return 0.5 * (A[:-1] + A[1:])
    mid = np.asarray(mid)
    if mid.shape != (A.shape[0] - 1, *A.shape[1:]):
        raise ValueError(f"midpoint samples must have shape {(A.shape[0] - 1, *A.shape[1:])}")
    return mid


def rk4_propagators(A: np.ndarray, h: float, mid=None) -> np.ndarray:
    """One-step RK4 maps for w' = A(t) w; returns shape (n-1, m, m).

    ``mid`` is "cubic" (default), "linear", or an array of exact half-step samples.
    """
    A0, A1 = A[:-1], A[1:]
    Am = midpoint_values(A, mid)
    eye = np.eye(A.shape[-1], dtype=complex)
    K1 = A0
    K2 = Am @ (eye + 0.5 * h * K1)
    K3 = Am @ (eye + 0.5 * h * K2)
    K4 = A1 @ (eye + h * K3)
    return eye + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def _accumulate(P: np.ndarray, start: np.ndarray) -> np.ndarray:
    out = np.empty((P.shape[0] + 1, *start.shape), dtype=complex)
    out[0] = start
    cur = start
    for k in range(P.shape[0]):
        cur = P[k] @ cur
        out[k + 1] = cur
    return out


@dataclass(frozen=True)
class FundamentalMatrix:
    Y: MatrixGridFunction

    @property
    def grid(self) -> Grid:
        return self.Y.grid

    @property
    def end(self) -> np.ndarray:
        return self.Y.values[-1]

    def det(self) -> np.ndarray:
        Y = self.Y.values
        return Y[:, 0, 0] * Y[:, 1, 1] - Y[:, 0, 1] * Y[:, 1, 0]

    def inverse(self, det_tol: float = 1e-6) -> np.ndarray:
        """Pointwise inverse of a 2x2 fundamental matrix.

        Uses the adjugate with det = 1 (trace-free A); falls back to dividing
        by the computed determinant when that identity is violated.
        """
        Y = self.Y.values
        if Y.shape[1] != 2:
            return np.linalg.inv(Y)
        adj = np.empty_like(Y)
        adj[:, 0, 0] = Y[:, 1, 1]
        adj[:, 1, 1] = Y[:, 0, 0]
        adj[:, 0, 1] = -Y[:, 0, 1]
        adj[:, 1, 0] = -Y[:, 1, 0]
        d = self.det()
        if np.max(np.abs(d - 1.0)) > det_tol:
            adj = adj / d[:, None, None]
        return adj

    def subsample(self, stride: int) -> "FundamentalMatrix":
        return FundamentalMatrix(self.Y.subsample(stride))


def fundamental_matrix(A: MatrixGridFunction, scale: float | None = None,
                       mid=None,
                       points_per_scale: float = POINTS_PER_SCALE) -> FundamentalMatrix:
    """Y' = A Y, Y(a) = I, stored at every node."""
    check_resolution(A.grid, scale, points_per_scale)
    P = rk4_propagators(A.values, A.grid.h, mid)
    Y = _accumulate(P, np.eye(A.m, dtype=complex))
    return FundamentalMatrix(MatrixGridFunction(A.grid, Y))


def solve_inhomogeneous(A: MatrixGridFunction, phi: VectorGridFunction, w_a,
                        scale: float | None = None,
                        mid=None, phi_mid: np.ndarray | None = None,
                        points_per_scale: float = POINTS_PER_SCALE) -> VectorGridFunction:
    """w' = A w + phi, w(a) = w_a.

    Integrated as the homogeneous augmented system for (w, 1), which is
    exactly RK4 applied to the affine problem.
    """
    check_resolution(A.grid, scale, points_per_scale)
    if phi.values.shape[1] != A.m or not phi.grid.same_as(A.grid):
        raise ValueError("phi must match A in grid and dimension")
    m = A.m
    aug = np.zeros((A.grid.n, m + 1, m + 1), dtype=complex)
    aug[:, :m, :m] = A.values
    aug[:, :m, m] = phi.values
    rule = mid if isinstance(mid, str) or mid is None else "cubic"
    aug_mid = midpoint_values(aug, rule).copy()
    if mid is not None and not isinstance(mid, str):
        aug_mid[:, :m, :m] = midpoint_values(A.values, mid)
    if phi_mid is not None:
        aug_mid[:, :m, m] = phi_mid
    P = rk4_propagators(aug, A.grid.h, aug_mid)
    # propagate the state vector only
    state = np.empty((A.grid.n, m + 1), dtype=complex)
    state[0, :m] = np.asarray(w_a, dtype=complex)
    state[0, m] = 1.0
    cur = state[0]
    for k in range(P.shape[0]):
        cur = P[k] @ cur
        state[k + 1] = cur
    return VectorGridFunction(A.grid, state[:, :m])


def split_midpoints(M: MatrixGridFunction) -> tuple[MatrixGridFunction, np.ndarray]:
    """Split samples on a 2x-refined grid into node values and exact midpoint values."""
    if (M.grid.n - 1) % 2:
        raise ValueError("need an even number of cells")
    return M.subsample(2), M.values[1::2]


def cauchy_distance_to_identity(R: MatrixGridFunction, scale: float | None = None,
                                points_per_scale: float = POINTS_PER_SCALE, mid=None) -> float:
    """max_t max_ij |Z(t) - I|_ij for Z' = R Z, Z(a) = I."""
    Z = fundamental_matrix(R, scale=scale, mid=mid, points_per_scale=points_per_scale).Y.values
    return float(np.max(np.abs(Z - np.eye(R.m))))
