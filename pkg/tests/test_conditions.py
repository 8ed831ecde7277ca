import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slresolvent.conditions import (FAILS, HOLDS, INCONCLUSIVE, Thresholds, all_verdicts,
                                    check_levin, check_m_class, check_theorem1, check_theorem2,
                                    check_theorem4, classify_bounded, classify_decay,
                                    condition_metrics, validate_ladder)
from slresolvent.gridfn import Grid
from slresolvent.potential import (affine_boundary, boundary_preset, family_constant,
                                   family_exp_osc, family_l2_perturb, family_scaled_exp_osc)

BASE = Grid(0.0, 1.0, 201)
LADDER1 = [2.0**-k for k in range(3, 11)]
LADDER2 = [1e-2, 1e-3, 1e-4]
LONG = [2.0**-k for k in range(1, 17)]


def by_name(verdicts):
    return {v.name: v for v in verdicts}


def test_decay_rule():
    assert classify_decay([1.0, 0.1, 0.005]) == HOLDS
    assert classify_decay([0.0, 0.0]) == HOLDS
    assert classify_decay([1.0, 1.0, 1.0]) == FAILS
    assert classify_decay([1.0, 0.5, 0.2]) == INCONCLUSIVE
    assert classify_decay([1.0, 0.1, 0.105, 0.001]) == HOLDS
    assert classify_decay([1.0, 0.1, 0.2, 0.001]) == INCONCLUSIVE
    assert classify_decay([1.0]) == INCONCLUSIVE
    assert classify_decay([1.0, 0.5, 0.2], Thresholds(decay_rel=0.5)) == HOLDS


def test_bounded_rule():
    assert classify_bounded([1.0, 1.0, 1.0]) == HOLDS
    assert classify_bounded([1.0, 2e3]) == FAILS
    assert classify_bounded([1.0, 3.0, 12.0]) == FAILS
    assert classify_bounded([1.0, 3.0, 9.0]) == HOLDS
    assert classify_bounded([1.0, math.inf]) == FAILS


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=12))
def test_classification_is_pure(vals):
    assert classify_decay(vals) == classify_decay(list(vals))
    assert classify_bounded(vals) in (HOLDS, FAILS)
    assert classify_decay(vals) in (HOLDS, FAILS, INCONCLUSIVE)


def test_ladder_validation():
    assert validate_ladder([0.1, 0.01]) == (0.1, 0.01)
    for bad in ([], [0.1, 0.0], [0.01, 0.1], [0.1, 0.1], [-1.0]):
        with pytest.raises(ValueError):
            validate_ladder(bad)


def test_exp_osc_verdicts():
    v = by_name(all_verdicts(family_exp_osc(), boundary_preset("dirichlet"), LADDER1, BASE))
    assert v["theorem1_l2"].classification == FAILS
    np.testing.assert_allclose(v["theorem1_l2"].values, 1.0, atol=1e-8)
    for name in ("cond1", "cond2", "cond3", "cond4", "thm4_I", "thm4_II", "thm4_III", "levin", "m_class"):
        assert v[name].classification == HOLDS, name
    for e, m2, m3 in zip(LADDER1, v["cond2"].values, v["cond3"].values):
        assert m2 <= 2 * e and m3 <= e
    assert max(v["levin"].extra["r_l1"]) <= 3.0 + 1e-9


def test_theorem1_l2_perturb_holds():
    fam = family_l2_perturb(BASE, np.cos, lambda t: np.sin(t) + 0.5j * t)
    ladder = [2.0**-k for k in range(1, 9)]
    v = check_theorem1(fam, ladder, BASE)
    assert v.classification == HOLDS
    ratios = np.array(v.values) / np.array(ladder)
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)


def test_constant_family_everything_zero():
    fam = family_constant(np.cos)
    for v in all_verdicts(fam, boundary_preset("dirichlet"), [0.5, 0.1], BASE):
        assert v.classification == HOLDS, v.name
        if v.name != "cond1":
            assert all(x == 0 for x in v.values), v.name


def test_scaled_quarter_power_fails_boundedness():
    fam = family_scaled_exp_osc(theta=0.25)
    v = by_name(check_theorem2(fam, boundary_preset("dirichlet"), LONG, BASE))
    assert v["cond1"].classification == FAILS
    lev = check_levin(fam, LONG, 0.0, BASE)
    assert lev.classification == FAILS
    assert lev.extra["r_l1_verdict"] == FAILS


def test_scaled_fifth_power_trends():
    fam = family_scaled_exp_osc(theta=0.2)
    q = by_name(check_theorem2(fam, boundary_preset("dirichlet"), LADDER2, BASE))["cond1"].values
    assert q[0] < q[1] < q[2]
    for v in check_theorem4(fam, LADDER2, 0.0, BASE):
        assert v.values[0] > v.values[1] > v.values[2], v.name
    z = check_m_class(fam, LADDER2, 0.0, BASE).values
    assert z[0] > z[1] > z[2]


def test_cond4_affine_boundary():
    bp = affine_boundary(*boundary_preset("dirichlet").at(0.0), alpha1=[[0, 1], [0, 0]])
    v = by_name(check_theorem2(family_constant(0.0), bp, [1.0, 0.1, 0.001], BASE))["cond4"]
    np.testing.assert_allclose(v.values, [1.0, 0.1, 0.001])
    assert v.classification == HOLDS


@pytest.mark.parametrize("fam", [
    family_exp_osc(),
    family_scaled_exp_osc(theta=0.2),
    family_l2_perturb(BASE, np.cos, lambda t: np.exp(2j * t)),
])
def test_commutator_triangle(fam):
    for e in (0.1, 0.01):
        m = condition_metrics(fam, e, BASE, with_cauchy=False)
        assert m["comm_l1"] <= m["rrv_l1"] + m["rvr_l1"] + 1e-12


@pytest.mark.parametrize("eps", [1.0, 0.3, 0.05, 0.001])
def test_inequality_chain(eps):
    fam = family_l2_perturb(BASE, lambda t: np.cos(3 * t), lambda t: np.sin(7 * t) - 2j * t**2)
    m = condition_metrics(fam, eps, BASE, with_cauchy=False)
    assert m["cond2"] <= math.sqrt(BASE.length) * m["dq_l2"] + 1e-8
    assert m["cond3"] <= m["dq_l2"] * m["qsum_l2"] + 1e-8


def test_m_class_independent_of_mu():
    fam = family_exp_osc()
    assert check_m_class(fam, [0.1, 0.01], 0.0, BASE).values == check_m_class(fam, [0.1, 0.01], 7j, BASE).values


def test_verdict_rows():
    v = check_theorem1(family_exp_osc(), [0.1, 0.01], BASE)
    rows = list(v.rows())
    assert len(rows) == 2
