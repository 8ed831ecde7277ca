"""Resolvent kernels as integral operators, kernel distances and eps-sweeps."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .conditions import (ConditionVerdict, Thresholds, all_verdicts, condition_metrics,
                         eps_grid, validate_ladder)
from .gridfn import Grid, GridFunction
from .green import GreenKernel, SingularBoundaryProblem, green_matrix
from .potential import BoundaryPair, PotentialFamily
from .quasi_system import system_matrix

COLUMNS = ("eps", "grid_n", "q_l2", "cond2", "cond3", "r_l1", "rrv_l1", "rvr_l1",
           "comm_l1", "z_dist", "gamma_dist", "opnorm_bound", "opnorm_est")


def apply_resolvent(K: GreenKernel, f: GridFunction) -> GridFunction:
    """y(t) = int Gamma(t, s) f(s) ds by trapezoid quadrature in s."""
    if not f.grid.same_as(K.grid):
        raise ValueError("f must live on the kernel grid")
    return GridFunction(K.grid, K.gamma @ (K.grid.weights() * f.values))


def resample_kernel(values: np.ndarray, src: Grid, dst: Grid) -> np.ndarray:
    """Bilinear interpolation of an (n, n) kernel onto ``dst`` x ``dst``."""
    if src.same_as(dst):
        return values
    interp = RegularGridInterpolator((src.nodes, src.nodes), values)
    T, S = np.meshgrid(dst.nodes, dst.nodes, indexing="ij")
    return interp(np.stack([T, S], axis=-1))


def _on_common_grid(K1: GreenKernel, K0: GreenKernel) -> tuple[np.ndarray, np.ndarray, Grid]:
    if K1.grid.same_as(K0.grid):
        return K1.gamma, K0.gamma, K1.grid
    fine = K1.grid if K1.grid.n >= K0.grid.n else K0.grid
    return (resample_kernel(K1.gamma, K1.grid, fine),
            resample_kernel(K0.gamma, K0.grid, fine), fine)


def kernel_sup_distance(K_eps: GreenKernel, K_0: GreenKernel) -> float:
    """max |Gamma_eps - Gamma_0| over off-diagonal nodes."""
    g1, g0, _ = _on_common_grid(K_eps, K_0)
    d = np.abs(g1 - g0)
    np.fill_diagonal(d, 0.0)
    return float(d.max())


def operator_norm_bound(K_eps: GreenKernel, K_0: GreenKernel) -> float:
    """(b - a) * sup |Gamma_eps - Gamma_0|, an upper bound for the L2 operator norm."""
    return K_eps.grid.length * kernel_sup_distance(K_eps, K_0)


def operator_norm_estimate(K_eps: GreenKernel, K_0: GreenKernel) -> float:
    """Largest singular value of W^1/2 (Gamma_eps - Gamma_0) W^1/2, W = trapezoid weights."""
    g1, g0, grid = _on_common_grid(K_eps, K_0)
    sw = np.sqrt(grid.weights())
    return float(np.linalg.norm(sw[:, None] * (g1 - g0) * sw[None, :], 2))


@dataclass(frozen=True)
class RateFit:
    rate: float | None
    residual: float | None
    n_points: int
    exact: bool = False


def estimate_rate(report_or_eps, distances: Sequence[float] | None = None) -> RateFit:
    """Least-squares slope of log(distance) against log(eps).

    Only the smaller-eps half of the ladder is used (at least three points).
    Zero distances are dropped; if all are zero the limit is reached exactly
    and no rate is reported.
    """
    if distances is None:
        report = report_or_eps
        eps = [r.eps for r in report.records]
        distances = [r.gamma_dist for r in report.records]
    else:
        eps = report_or_eps
    pairs = [(float(e), float(d)) for e, d in zip(eps, distances) if math.isfinite(d)]
    pairs.sort(key=lambda p: -p[0])
    if pairs and all(d == 0 for _, d in pairs):
        return RateFit(None, None, 0, exact=True)
    pos = [p for p in pairs if p[1] > 0]
    if len(pos) < 3:
        raise ValueError("rate fit needs at least three positive distances")
    keep = pos[-max(3, math.ceil(len(pos) / 2)):]
    x = np.log([e for e, _ in keep])
    y = np.log([d for _, d in keep])
    slope, icept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icept)) ** 2)))
    return RateFit(float(slope), resid, len(keep))


@dataclass
class EpsRecord:
    eps: float
    grid_n: int
    q_l2: float
    cond2: float
    cond3: float
    r_l1: float
    rrv_l1: float
    rvr_l1: float
    comm_l1: float
    z_dist: float
    gamma_dist: float = math.nan
    opnorm_bound: float = math.nan
    opnorm_est: float = math.nan
    delta_cond: float = math.nan
    status: str = "ok"
    metrics: dict = field(default_factory=dict, repr=False)

    def row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in COLUMNS]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    return x


@dataclass
class ConvergenceReport:
    eps_ladder: tuple[float, ...]
    records: list[EpsRecord]
    rate: RateFit | None = None
    verdicts: list[ConditionVerdict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for w in self.warnings:
            buf.write(f"# warning: {w}\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(COLUMNS)
        for r in self.records:
            wr.writerow(r.row())
        return buf.getvalue()

    def to_dict(self) -> dict:
        recs = []
        for r in self.records:
            d = asdict(r)
            d.pop("metrics")
            recs.append(d)
        return _jsonable({
            "meta": self.meta,
            "warnings": list(self.warnings),
            "eps_ladder": list(self.eps_ladder),
            "columns": list(COLUMNS),
            "records": recs,
            "rate": asdict(self.rate) if self.rate else None,
            "verdicts": [asdict(v) for v in self.verdicts],
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def limit_kernel(family: PotentialFamily, boundary: BoundaryPair, mu: complex, base: Grid,
                 stride: int, **kw) -> GreenKernel:
    grid = base.refine(stride)
    alpha, beta = boundary.at(0.0)
    return green_matrix(system_matrix(family.limit(grid), mu).A, alpha, beta, stride=stride,
                        mid=family.midpoint_rule, **kw)


def _record(family, boundary, mu, base, eps, K0, points_per_scale, singular_cond) -> EpsRecord:
    m = condition_metrics(family, eps, base, boundary, points_per_scale)
    rec = EpsRecord(eps=eps, grid_n=m["grid_n"], q_l2=m["q_l2"], cond2=m["cond2"], cond3=m["cond3"],
                    r_l1=m["r_l1"], rrv_l1=m["rrv_l1"], rvr_l1=m["rvr_l1"], comm_l1=m["comm_l1"],
                    z_dist=m["z_dist"], metrics=m)
    grid, stride = eps_grid(family, eps, base, points_per_scale)
    alpha, beta = boundary.at(eps)
    try:
        K = green_matrix(system_matrix(family(eps, grid), mu).A, alpha, beta, stride=stride,
                         mid=family.midpoint_rule,
                         scale=family.oscillation_scale(eps), singular_cond=singular_cond)
    except SingularBoundaryProblem as exc:
        rec.status = "singular"
        rec.delta_cond = exc.cond
        return rec
    rec.delta_cond = K.delta_cond
    rec.gamma_dist = kernel_sup_distance(K, K0)
    rec.opnorm_bound = operator_norm_bound(K, K0)
    rec.opnorm_est = operator_norm_estimate(K, K0)
    return rec


def convergence_sweep(family: PotentialFamily, boundary: BoundaryPair, mu: complex,
                      eps_ladder: Sequence[float], base: Grid,
                      thresholds: Thresholds = Thresholds(), points_per_scale: float = 10.0,
                      singular_cond: float = 1e8, jobs: int = 1) -> ConvergenceReport:
    """Kernel distances and condition metrics for every eps on the ladder.

    Kernels are compared on the nodes of ``base``; each q_eps is integrated on
    a refinement of it resolving its oscillation scale. The eps = 0 kernel is
    built once, on the finest of those refinements. A singular limit problem
    raises SingularBoundaryProblem; singular problems at eps > 0 are recorded.
    """
    eps = validate_ladder(eps_ladder)
    strides = [eps_grid(family, e, base, points_per_scale)[1] for e in eps]
    K0 = limit_kernel(family, boundary, mu, base, max(strides), singular_cond=singular_cond)

    def work(e):
        return _record(family, boundary, mu, base, e, K0, points_per_scale, singular_cond)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(work, eps))
    else:
        records = [work(e) for e in eps]

    warnings = []
    if family.needs_resample(base):
        warnings.append(f"tabulated potential resampled from n={family.native_grid.n} "
                        f"to the experiment grid by linear interpolation")
    for r in records:
        if r.status != "ok":
            warnings.append(f"eps={r.eps:.17g}: boundary problem singular (cond={r.delta_cond:.3e})")

    try:
        rate = estimate_rate(eps, [r.gamma_dist for r in records])
    except ValueError:
        rate = None
    verdicts = all_verdicts(family, boundary, eps, base, thresholds, points_per_scale,
                            metrics=[r.metrics for r in records])
    meta = {"family": family.kind, "boundary": boundary.name, "mu": [complex(mu).real, complex(mu).imag],
            "interval": [base.a, base.b], "grid_n": base.n, "limit_delta_cond": K0.delta_cond}
    return ConvergenceReport(eps, records, rate, verdicts, warnings, meta)
