import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqfromsamples.core import GroundSet, Instance, eval_F
from seqfromsamples.functions import (FacilityLocationFunction, ModularFunction, ScaledFunction,
                                      WeightedCoverageFunction, make_coverage_instance,
                                      make_facility_instance, make_modular_instance)
from seqfromsamples.oracle import (TooLargeError, brute_force_optimal, check_random_set_gain,
                                   check_avoidance_gain, exact_delta, exact_delta_marginal_form,
                                   exact_expected_F, measure_curvature, telescoped_F,
                                   virtual_union_F)
from tests.conftest import CappedCardinality


def test_brute_force_examples(modular321):
    res = brute_force_optimal(modular321)
    assert res.optimum_sequence == (0, 1) and res.optimum_value == 8
    single = make_modular_instance(1, 1, {"weights": [4]})
    assert brute_force_optimal(single).optimum_sequence == (0,)
    flat = make_modular_instance(4, 2, {"weights": [1, 1, 1, 1]})
    res = brute_force_optimal(flat)
    assert res.optimum_sequence == (0, 1)
    assert all(eval_F(flat, p) == res.optimum_value for p in itertools.permutations(range(4), 2))


def test_guard():
    with pytest.raises(TooLargeError):
        brute_force_optimal(make_modular_instance(12, 7, seed=0))


def test_exact_delta_modular(modular321):
    assert exact_delta(modular321, 0, 0) == 6
    assert exact_delta(modular321, 0, 1) == 3
    inst = make_modular_instance(5, 3, {"weights": [5, 4, 3, 2, 1]})
    for i, w in enumerate([5, 4, 3, 2, 1]):
        assert exact_delta(inst, i, 2) == pytest.approx(w, abs=1e-12)
        for t in range(3):
            assert exact_delta(inst, i, t) == pytest.approx((3 - t) * w, abs=1e-12)
            assert exact_delta_marginal_form(inst, i, t) == pytest.approx((3 - t) * w, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["coverage", "facility", "modular"]))
def test_delta_paths_agree(seed, family):
    inst = {"coverage": lambda: make_coverage_instance(5, 3, 6, 0.4, seed),
            "facility": lambda: make_facility_instance(5, 3, 4, seed),
            "modular": lambda: make_modular_instance(5, 3, seed=seed)}[family]()
    for i in range(5):
        for t in range(3):
            a = exact_delta(inst, i, t)
            b = exact_delta_marginal_form(inst, i, t)
            assert abs(a - b) <= 1e-12
            assert a >= -1e-12


def test_expected_F_examples(modular321):
    # (8 + 7 + 7 + 5 + 5 + 4) / 6 by enumerating all six ordered pairs
    assert exact_expected_F(modular321) == pytest.approx(6.0, abs=1e-12)
    pool_exact = exact_expected_F(modular321, restrict_to=[0, 2])
    assert pool_exact == pytest.approx((eval_F(modular321, (0, 2)) + eval_F(modular321, (2, 0))) / 2)
    single = make_modular_instance(3, 1, {"weights": [1, 2, 3]})
    assert exact_expected_F(single, restrict_to=[1]) == 2
    with pytest.raises(ValueError):
        exact_expected_F(modular321, restrict_to=[0])


def test_curvature_examples():
    assert measure_curvature(ModularFunction([0.3, 0.2, 0.9])) == 0.0
    nested = WeightedCoverageFunction([1.0, 1.0], [[0], [0, 1]])
    assert measure_curvature(nested) == 1.0
    assert measure_curvature(CappedCardinality(2, 1)) == 1.0
    with pytest.raises(TooLargeError):
        measure_curvature(ModularFunction(np.ones(11)))


def test_curvature_partial():
    # f(0 | {1}) = 1 of f({0}) = 2, so c = 1/2
    f = WeightedCoverageFunction([1.0, 1.0, 1.0], [[0, 1], [1, 2]])
    assert measure_curvature(f) == pytest.approx(0.5)


@pytest.mark.parametrize("q", [0.25, 2.0])
def test_curvature_scaling(q):
    g = make_coverage_instance(6, 1, 8, 0.3, 3).functions[0]
    assert measure_curvature(ScaledFunction(g, q)) == pytest.approx(measure_curvature(g), abs=1e-12)


def test_random_set_gain_modular_equality():
    f = ModularFunction([3, 1, 4, 1, 5])
    res = check_random_set_gain(f, {0, 2}, 2)
    assert res.holds and res.slack == 0.0


def test_random_set_gain_empty_base():
    f = make_facility_instance(5, 1, 3, 2).functions[0]
    # with S empty both sides average f(R); only the (1 - c) factor separates them
    res = check_random_set_gain(f, set(), 3, c=0.0)
    assert res.holds and res.lhs == pytest.approx(res.rhs, abs=1e-12)
    res = check_random_set_gain(f, set(), 3)
    assert res.holds and res.rhs == pytest.approx((1 - measure_curvature(f)) * res.lhs)


def test_random_set_gain_random_coverage():
    rng = np.random.default_rng(0)
    for trial in range(100):
        f = make_coverage_instance(6, 1, 8, 0.3, trial).functions[0]
        S = set(rng.choice(6, size=rng.integers(0, 3), replace=False).tolist())
        t = int(rng.integers(0, min(2, 6 - len(S)) + 1))
        assert check_random_set_gain(f, S, t).holds


def test_avoidance_gain_modular():
    inst = make_modular_instance(6, 2, seed=3)
    res = check_avoidance_gain(inst)
    assert res.holds and not res.skipped
    assert res.lhs >= res.rhs


def test_avoidance_gain_equal_weights_exact_values():
    # w = 1 everywhere, k = 2: sum_t Delta(e*_{t+1}, t) = 2 + 1 and
    # F(P + pi*) - F(P) = (1 + 2) each time, scaled by alpha = 4/6 * 3/5
    inst = make_modular_instance(6, 2, {"weights": [1] * 6})
    res = check_avoidance_gain(inst)
    assert res.lhs == pytest.approx(3.0, abs=1e-12)
    assert res.rhs == pytest.approx(0.4 * 3.0, abs=1e-12)
    assert res.holds


def test_avoidance_gain_skips_small_ground_set(modular321):
    res = check_avoidance_gain(modular321)
    assert res.skipped and res.holds is None


def test_virtual_union():
    inst = make_modular_instance(4, 2, {"weights": [1, 2, 3, 4]})
    # t=1: {0} u {2}; t=2: {0, 1} u {2, 3}
    assert virtual_union_F(inst, (0, 1), (2, 3)) == 4 + 10


@pytest.mark.parametrize("seed", range(3))
def test_telescoping_identity(seed):
    inst = make_coverage_instance(6, 3, 7, 0.4, seed)
    for pi in itertools.permutations(range(6), 3):
        assert telescoped_F(inst, pi) == pytest.approx(eval_F(inst, pi), abs=1e-12)
