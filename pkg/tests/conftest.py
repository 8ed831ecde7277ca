import numpy as np
import pytest

from slresolvent.gridfn import Grid
from slresolvent.potential import boundary_preset

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


def random_smooth(rng: np.random.Generator, amp: float = 1.0, modes: int = 4):
    """Random complex trigonometric polynomial in t, bounded by ~amp * 2."""
    c = (rng.normal(size=modes) + 1j * rng.normal(size=modes)) * amp / np.arange(1, modes + 1)
    phase = rng.uniform(0, 2 * np.pi, modes)

    def fn(t):
        t = np.asarray(t, dtype=float)
        return sum(c[k] * np.cos((k + 1) * np.pi * t + phase[k]) for k in range(modes))

    return fn


@pytest.fixture
def unit_grid():
    return Grid(0.0, 1.0, 201)


@pytest.fixture
def dirichlet():
    return boundary_preset("dirichlet").at(0.0)


def shooting_solution(qf, ff, mu, alpha, beta, t: np.ndarray) -> np.ndarray:
    """Independent (y, D1 y) by shooting with an adaptive high-order integrator.

    Solves w' = A w + (0, -f) from w(a) = 0 together with the two homogeneous
    columns, then fixes the initial value from the boundary conditions.
    """
    from scipy.integrate import solve_ivp

    def rhs(s, u):
        q = qf(s)
        A = np.array([[q, 1.0], [-q * q - mu, -q]])
        U = u.reshape(2, 3)
        dU = A @ U
        dU[1, 2] -= ff(s)
        return dU.ravel()

    u0 = np.zeros((2, 3), dtype=complex)
    u0[:, :2] = np.eye(2)
    sol = solve_ivp(rhs, (t[0], t[-1]), u0.ravel(), method="DOP853", t_eval=t, rtol=1e-13, atol=1e-14)
    U = sol.y.T.reshape(-1, 2, 3)
    Y, wp = U[:, :, :2], U[:, :, 2]
    alpha, beta = np.asarray(alpha, complex), np.asarray(beta, complex)
    c = np.linalg.solve(alpha + beta @ Y[-1], -beta @ wp[-1])
    return np.einsum("nij,j->ni", Y, c) + wp
