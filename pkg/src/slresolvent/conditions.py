"""Empirical checkers for the convergence hypotheses on an eps-ladder.

A limit cannot be decided from finitely many eps, so every checker reports
the raw metric sequence together with a classification obtained from
explicit thresholds:

* decay ("-> 0"): the sequence is decreasing up to at most one inversion
  of relative size <= ``inversion_tol`` and its last value is below
  ``max(decay_rel * first, decay_floor)``. A sequence that loses less than
  ``inversion_tol`` of its first value over the ladder fails.
* boundedness ("O(1)"): fails when max > ``bound`` or the sequence is
  increasing (same inversion allowance) with last/first >= ``divergence_ratio``.

Condition 3) of the main theorem is not additive in q, so it is always
evaluated on q_eps**2 - q_0**2 directly, never assembled from parts.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .gridfn import (Grid, antiderivative, norm_l1_matrix, norm_l2, norm_sup,
                     row_sum_norm)
from .odeint import cauchy_distance_to_identity
from .potential import BoundaryPair, PotentialFamily
from .quasi_system import perturbation_matrix

HOLDS = "holds-empirically"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Thresholds:
    decay_rel: float = 1e-2
    decay_floor: float = 1e-8
    bound: float = 1e3
    divergence_ratio: float = 10.0
    inversion_tol: float = 0.1


@dataclass(frozen=True)
class ConditionVerdict:
    name: str
    eps: tuple[float, ...]
    values: tuple[float, ...]
    classification: str
    thresholds: dict
    extra: dict = field(default_factory=dict)

    def rows(self):
        for e, v in zip(self.eps, self.values):
            yield self.name, e, v, self.classification


def validate_ladder(eps_ladder: Sequence[float]) -> tuple[float, ...]:
    eps = tuple(float(e) for e in eps_ladder)
    if not eps:
        raise ValueError("eps ladder is empty")
    if any(not (e > 0 and math.isfinite(e)) for e in eps):
        raise ValueError("eps ladder values must be positive and finite")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps ladder must be strictly decreasing")
    return eps


def _monotone(values: np.ndarray, th: Thresholds, increasing: bool = False) -> bool:
    """Decreasing (or increasing) up to one inversion of relative size <= inversion_tol."""
    v = values[::-1] if increasing else values
    inversions = 0
    for prev, cur in zip(v, v[1:]):
        if cur <= prev + th.decay_floor:
            continue
        inversions += 1
        if inversions > 1 or cur > (1 + th.inversion_tol) * prev + th.decay_floor:
            return False
    return True


def classify_decay(values: Sequence[float], th: Thresholds = Thresholds()) -> str:
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return INCONCLUSIVE
    if np.all(v <= th.decay_floor):
        return HOLDS
    if len(v) < 2:
        return INCONCLUSIVE
    if v[-1] >= (1 - th.inversion_tol) * v[0]:
        return FAILS
    if _monotone(v, th) and v[-1] <= max(th.decay_rel * v[0], th.decay_floor):
        return HOLDS
    return INCONCLUSIVE


def classify_bounded(values: Sequence[float], th: Thresholds = Thresholds()) -> str:
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)) or v.max() > th.bound:
        return FAILS
    if len(v) >= 2 and v[0] > 0 and v[-1] / v[0] >= th.divergence_ratio and _monotone(v, th, increasing=True):
        return FAILS
    return HOLDS


def eps_grid(family: PotentialFamily, eps: float, base: Grid,
             points_per_scale: float = 10.0) -> tuple[Grid, int]:
    """Grid resolving q_eps, and its stride back to ``base``."""
    stride = base.refinement_for(family.oscillation_scale(eps), points_per_scale)
    return base.refine(stride), stride


def condition_metrics(family: PotentialFamily, eps: float, base: Grid,
                      boundary: BoundaryPair | None = None,
                      points_per_scale: float = 10.0, with_cauchy: bool = True) -> dict:
    """Every per-eps metric used by the checkers and the sweep report."""
    grid, _ = eps_grid(family, eps, base, points_per_scale)
    q, q0 = family(eps, grid), family.limit(grid)
    dq = q - q0
    R = perturbation_matrix(q, q0)
    Rv = antiderivative(R)
    RRv = R @ Rv
    RvR = Rv @ R
    out = {
        "grid_n": grid.n,
        "q_l2": norm_l2(q),
        "dq_l2": norm_l2(dq),
        "qsum_l2": norm_l2(q + q0),
        "cond2": norm_sup(antiderivative(dq)),
        "cond3": norm_sup(antiderivative(q * q - q0 * q0)),
        "r_l1": norm_l1_matrix(R),
        "rv_sup": norm_sup(Rv),
        "rrv_l1": norm_l1_matrix(RRv),
        "rvr_l1": norm_l1_matrix(RvR),
        "comm_l1": norm_l1_matrix(RRv - RvR),
    }
    if boundary is not None:
        a_e, b_e = boundary.at(eps)
        a_0, b_0 = boundary.at(0.0)
        out["cond4"] = float(row_sum_norm(a_e - a_0) + row_sum_norm(b_e - b_0))
    if with_cauchy:
        out["z_dist"] = cauchy_distance_to_identity(R, scale=family.oscillation_scale(eps),
                                                    mid=family.midpoint_rule,
                                                    points_per_scale=points_per_scale)
    return out


def _collect(family, eps_ladder, base, key, **kw) -> tuple[tuple[float, ...], tuple[float, ...]]:
    eps = validate_ladder(eps_ladder)
    vals = tuple(float(condition_metrics(family, e, base, **kw)[key]) for e in eps)
    return eps, vals


def _verdict(name, eps, vals, rule, th, **extra) -> ConditionVerdict:
    return ConditionVerdict(name, eps, vals, rule(vals, th), asdict(th), extra)


def check_theorem1(family: PotentialFamily, eps_ladder, base: Grid,
                   th: Thresholds = Thresholds(), points_per_scale: float = 10.0) -> ConditionVerdict:
    """||q_eps - q_0||_2 -> 0."""
    eps, vals = _collect(family, eps_ladder, base, "dq_l2", with_cauchy=False,
                         points_per_scale=points_per_scale)
    return _verdict("theorem1_l2", eps, vals, classify_decay, th)


def check_theorem2(family: PotentialFamily, boundary: BoundaryPair, eps_ladder, base: Grid,
                   th: Thresholds = Thresholds(),
                   points_per_scale: float = 10.0) -> list[ConditionVerdict]:
    """Conditions 1)-4): ||q_eps||_2 bounded; sup-norms of the antiderivatives
    of q_eps - q_0 and q_eps**2 - q_0**2 decay; boundary matrices converge."""
    eps = validate_ladder(eps_ladder)
    ms = [condition_metrics(family, e, base, boundary, points_per_scale, with_cauchy=False) for e in eps]
    col = lambda k: tuple(float(m[k]) for m in ms)
    return [
        _verdict("cond1", eps, col("q_l2"), classify_bounded, th),
        _verdict("cond2", eps, col("cond2"), classify_decay, th),
        _verdict("cond3", eps, col("cond3"), classify_decay, th),
        _verdict("cond4", eps, col("cond4"), classify_decay, th),
    ]


def check_theorem4(family: PotentialFamily, eps_ladder, mu: complex, base: Grid,
                   th: Thresholds = Thresholds(),
                   points_per_scale: float = 10.0) -> list[ConditionVerdict]:
    """L1 norms of R R^v, R^v R and their commutator decay.

    ``mu`` is accepted for symmetry; R does not depend on it.
    """
    eps = validate_ladder(eps_ladder)
    ms = [condition_metrics(family, e, base, None, points_per_scale, with_cauchy=False) for e in eps]
    col = lambda k: tuple(float(m[k]) for m in ms)
    return [
        _verdict("thm4_I", eps, col("rrv_l1"), classify_decay, th),
        _verdict("thm4_II", eps, col("rvr_l1"), classify_decay, th),
        _verdict("thm4_III", eps, col("comm_l1"), classify_decay, th),
    ]


def check_levin(family: PotentialFamily, eps_ladder, mu: complex, base: Grid,
                th: Thresholds = Thresholds(), points_per_scale: float = 10.0) -> ConditionVerdict:
    """||R||_1 = O(1) together with ||R^v||_C -> 0."""
    eps = validate_ladder(eps_ladder)
    ms = [condition_metrics(family, e, base, None, points_per_scale, with_cauchy=False) for e in eps]
    return _levin(eps, tuple(float(m["r_l1"]) for m in ms), tuple(float(m["rv_sup"]) for m in ms), th)


def _levin(eps, r_l1, rv, th) -> ConditionVerdict:
    parts = (classify_bounded(r_l1, th), classify_decay(rv, th))
    if FAILS in parts:
        cls = FAILS
    elif parts == (HOLDS, HOLDS):
        cls = HOLDS
    else:
        cls = INCONCLUSIVE
    return ConditionVerdict("levin", eps, rv, cls, asdict(th),
                            {"r_l1": r_l1, "r_l1_verdict": parts[0], "rv_sup_verdict": parts[1]})


def check_m_class(family: PotentialFamily, eps_ladder, mu: complex, base: Grid,
                  th: Thresholds = Thresholds(), points_per_scale: float = 10.0) -> ConditionVerdict:
    """Direct test: Z' = R Z, Z(a) = I stays uniformly close to I."""
    eps, vals = _collect(family, eps_ladder, base, "z_dist", points_per_scale=points_per_scale)
    return _verdict("m_class", eps, vals, classify_decay, th)


def all_verdicts(family: PotentialFamily, boundary: BoundaryPair, eps_ladder, base: Grid,
                 th: Thresholds = Thresholds(), points_per_scale: float = 10.0,
                 metrics: Sequence[dict] | None = None) -> list[ConditionVerdict]:
    """Every checker at once, reusing precomputed per-eps metrics if given."""
    eps = validate_ladder(eps_ladder)
    if metrics is None:
        metrics = [condition_metrics(family, e, base, boundary, points_per_scale) for e in eps]
    col = lambda k: tuple(float(m[k]) for m in metrics)
    out = [
        _verdict("theorem1_l2", eps, col("dq_l2"), classify_decay, th),
        _verdict("cond1", eps, col("q_l2"), classify_bounded, th),
        _verdict("cond2", eps, col("cond2"), classify_decay, th),
        _verdict("cond3", eps, col("cond3"), classify_decay, th),
        _verdict("cond4", eps, col("cond4"), classify_decay, th),
        _verdict("thm4_I", eps, col("rrv_l1"), classify_decay, th),
        _verdict("thm4_II", eps, col("rvr_l1"), classify_decay, th),
        _verdict("thm4_III", eps, col("comm_l1"), classify_decay, th),
    ]
    out.append(_levin(eps, col("r_l1"), col("rv_sup"), th))
    out.append(_verdict("m_class", eps, col("z_dist"), classify_decay, th))
    return out
