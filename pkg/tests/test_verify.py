# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quakebend.covering import OrientedCurve, axis, exponential_coordinates, foot_on_geodesic
from quakebend.deform import WeightedMulticurve
from quakebend.errors import PreconditionError
from quakebend.minkowski import random_isometry
from quakebend.representation import Representation
from quakebend.verify import (
    SUITE_ORDER,
    THRESHOLDS,
    SuiteOptions,
    bent_fixture,
    check_basepoint,
    check_cocycle_first_order,
    check_commutativity,
    check_crossing_oracle,
    check_distinct,
    check_flow,
    check_homomorphism,
    check_side_separation,
    run_suite,
)

from .conftest import word

TWIST = WeightedMulticurve.single("a1", translation=0.5)


def _failed(results):
    return [(r.name, r.residual) for r in results if not r.passed]


def test_thresholds_cover_the_suite():
    assert set(THRESHOLDS) == set(SUITE_ORDER)


def test_suite_passes_on_a_fuchsian_twist(fuchsian, ref):
    results = run_suite(fuchsian, TWIST, ref)
    assert _failed(results) == []
    assert "quake_bend" not in {r.name for r in results}


def test_suite_passes_on_a_bend(bent3, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3, angle=0.4)
    results = run_suite(bent3, mc, ref)
    assert _failed(results) == []
    assert "quake_bend" in {r.name for r in results}


@pytest.mark.slow
def test_suite_passes_in_dimension_four(bent4, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3, angle=0.4, selector=(0.0, 0.0, 0.0, 1.0, 0.0))
    assert _failed(run_suite(bent4, mc, ref)) == []


def test_suite_subset(fuchsian, ref):
    results = run_suite(fuchsian, TWIST, ref, SuiteOptions(checks=("side_separation", "homomorphism")))
    assert [r.name for r in results] == ["homomorphism", "side_separation"]


def test_unknown_check(fuchsian, ref):
    with pytest.raises(PreconditionError):
        run_suite(fuchsian, TWIST, ref, SuiteOptions(checks=("homomorphism", "vibes")))


def test_corrupted_generator_fails(fuchsian, rng):
    images = list(fuchsian.images)
    images[2] = images[2] @ random_isometry(2, 1e-3, rng)
    result = check_homomorphism(Representation(fuchsian.presentation, tuple(images)))
    assert not result.passed
    assert result.residual > 1e-6
    assert len(result.witness["matrices"]) == 4
    assert set(result.to_dict()) == {"name", "residual", "threshold", "passed", "witness", "details"}


def test_non_commuting_rotation_planes(bent4, ref):
    first = WeightedMulticurve.single("a1", angle=0.4, selector=(0.0, 0.0, 0.0, 1.0, 0.0))
    second = WeightedMulticurve.single("a1", angle=0.3, selector=(0.0, 0.0, 1.0, 0.0, 0.0))
    with pytest.raises(PreconditionError):
        check_commutativity(bent4, first, second, ref)


def test_commutativity_of_disjoint_twists(fuchsian, ref):
    second = WeightedMulticurve.single("a2", translation=-0.7)
    assert check_commutativity(fuchsian, TWIST, second, ref).passed


def test_commutativity_needs_disjoint_curves(fuchsian, ref):
    with pytest.raises(PreconditionError):
        check_commutativity(fuchsian, TWIST, WeightedMulticurve.single("b1", translation=0.2), ref)


def test_distinct(fuchsian, ref):
    result = check_distinct(fuchsian, TWIST, WeightedMulticurve.single("a2", translation=0.5), 1.0, ref)
    assert result.passed
    assert result.details["distance"] > 1e-3
    with pytest.raises(PreconditionError):
        check_distinct(fuchsian, TWIST, WeightedMulticurve.single("b1", translation=0.5), 1.0, ref)


BASEPOINT_OFFSETS = [(1e-3, 0.0), (-2e-3, 1e-3), (0.05, -0.04)] + [
    tuple(v) for v in np.random.default_rng(2024).uniform(-0.4, 0.4, size=(17, 2))
]


@pytest.mark.parametrize("offset", BASEPOINT_OFFSETS)
def test_basepoint(fuchsian, ref, offset):
    assert check_basepoint(fuchsian, TWIST, 1.0, offset, ref).passed


def test_basepoint_across_a_lift(fuchsian, ref):
    base = exponential_coordinates(ref.basepoint)
    foot = exponential_coordinates(foot_on_geodesic(ref.basepoint, *axis(word("a1"), ref)))
    result = check_basepoint(fuchsian, TWIST, 1.0, tuple(1.5 * (foot - base)), ref)
    assert result.passed
    assert not result.details["conjugator_is_identity"]


def test_sabotaged_oracle_comparison_fails(ref):
    curves = [OrientedCurve(word("a1"))]
    result = check_crossing_oracle([word("b1")], curves, ref, oracle_radius=4, search_radius=0.0)
    assert not result.passed
    assert result.witness["mismatches"]
    assert check_crossing_oracle([word("b1")], curves, ref, oracle_radius=4).passed


def test_first_order_halving(bent3, ref):
    mc = WeightedMulticurve.single("a1", translation=0.5, angle=0.3)
    result = check_cocycle_first_order(bent3, mc, word("b1 a2 b1"), ref, h=1e-4)
    assert result.passed
    assert result.details["ratio"] == pytest.approx(2.0, rel=0.2)


def test_side_separation(fuchsian, ref):
    assert check_side_separation(TWIST, ref.presentation.generator_words, ref).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bent_fixture(ref, n):
    rho = bent_fixture(n, 0.2, seed=3, ref=ref)
    assert rho.dimension == n
    assert rho.relator_residual() < 1e-8
    if n == 2:
        return
    flat = bent_fixture(n, 0.0, seed=3, ref=ref)
    assert rho.distance(flat).value > 1e-3


FLOW_TIMES = [-0.5, 0.3, 1.1]


@pytest.mark.parametrize("s", FLOW_TIMES)
@pytest.mark.parametrize("t", FLOW_TIMES)
def test_flow_grid(fuchsian, bent3, ref, s, t):
    assert check_flow(fuchsian, TWIST, s, t, ref).passed
    bend = WeightedMulticurve.single("a1", translation=0.3, angle=0.4)
    assert check_flow(bent3, bend, s, t, ref).passed


@pytest.mark.slow
@settings(max_examples=50, deadline=None)
@given(
    st.floats(-1.0, 1.0),
    st.floats(-1.0, 1.0),
    st.floats(-1.0, 1.0),
    st.sampled_from([("a1", "a2"), ("b1", "b2"), ("a1", "b2")]),
)
def test_commutativity_sweep(fuchsian, bent3, ref, first_translation, second_translation, angle, cores):
    first = WeightedMulticurve.single(cores[0], translation=first_translation)
    second = WeightedMulticurve.single(cores[1], translation=second_translation)
    assert check_commutativity(fuchsian, first, second, ref).passed
    bent_first = WeightedMulticurve.single(cores[0], translation=first_translation, angle=angle)
    assert check_commutativity(bent3, bent_first, second, ref).passed


def test_empty_multicurve_skips_curve_checks(bent3, ref):
    options = SuiteOptions(checks=("homomorphism", "quake_bend", "distinct"))
    results = run_suite(bent3, WeightedMulticurve(()), ref, options)
    assert [r.name for r in results] == ["homomorphism"]
    assert _failed(results) == []


@pytest.mark.parametrize("seed", range(20))
def test_bent_fixture_seeds(ref, seed):
    for n in (3, 4):
        rho = bent_fixture(n, 0.2, seed=seed, ref=ref)
        assert rho.validate() is rho
