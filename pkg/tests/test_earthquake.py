# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quakebend.covering import OrientedCurve, reference_translation
from quakebend.deform import CentralizerParameter, WeightedMulticurve, deform
from quakebend.earthquake import (
    LaminationApproximation,
    Verdict,
    _verdict,
    build_sequence,
    dehn_twist_word,
    earthquake_limit,
    sequence_distance,
    weight_lipschitz,
)
from quakebend.errors import PreconditionError
from quakebend.surface_group import Word

from .conftest import word

letter_lists = st.lists(st.tuples(st.integers(0, 3), st.sampled_from([1, -1])), max_size=10)


def test_dehn_twist_images(ref):
    assert dehn_twist_word(word("b1"), word("a1"), 2, ref) == word("b1 a1 a1")
    assert dehn_twist_word(word("a1"), word("b1"), -1, ref) == word("a1 B1")
    assert dehn_twist_word(word("a2 b2"), word("a1"), 3, ref) == word("a2 b2")
    assert dehn_twist_word(word("b1 a2"), word("a1"), 0, ref) == word("b1 a2")


@pytest.mark.parametrize("twisting", ["a1", "b1", "a2", "b2"])
@pytest.mark.parametrize("k", [-2, 1, 3])
def test_dehn_twist_fixes_the_relator(ref, twisting, k):
    relator = ref.presentation.relator
    assert dehn_twist_word(relator, word(twisting), k, ref) == relator


@given(letter_lists, st.integers(-3, 3), st.integers(-3, 3))
def test_dehn_twists_compose(ref, letters, j, k):
    w = Word.reduce(letters)
    a1 = word("a1")
    twisted = dehn_twist_word(dehn_twist_word(w, a1, k, ref), a1, j, ref)
    assert twisted == dehn_twist_word(w, a1, j + k, ref)


def test_dehn_twist_needs_a_generator_curve(ref):
    with pytest.raises(PreconditionError):
        dehn_twist_word(word("b1"), word("a1 b1"), 1, ref)
    assert dehn_twist_word(word("b1"), OrientedCurve(word("a1")), 1, ref) == word("b1 a1")


def test_recipe_sequence(ref):
    la = LaminationApproximation.recipe(word("b1"), word("a1"), 4, CentralizerParameter(translation=1e-3))
    sequence = build_sequence(la, ref)
    assert len(sequence) == 4
    cores = [mc.curves[0].core for mc in sequence]
    assert cores[0] == word("b1 a1")
    lengths = [reference_translation(core, ref) for core in cores]
    assert lengths == sorted(lengths)
    weights = [mc.curves[0].weight for mc in sequence]
    assert weights == sorted(weights, reverse=True)
    assert weights[0] * lengths[0] == pytest.approx(1.0)


def test_long_recipe_sequence(ref):
    la = LaminationApproximation.recipe(word("b1"), word("a1"), 8, CentralizerParameter(translation=1e-3))
    sequence = build_sequence(la, ref)
    assert [len(mc.curves[0].core) for mc in sequence] == list(range(2, 10))
    weights = [mc.curves[0].weight for mc in sequence]
    assert weights == sorted(weights, reverse=True)


def test_negative_recipe_count():
    with pytest.raises(PreconditionError):
        LaminationApproximation.recipe(word("b1"), word("a1"), -1)


def test_empty_sequence_rejected(fuchsian, ref):
    with pytest.raises(PreconditionError):
        earthquake_limit(fuchsian, LaminationApproximation(), 1e-6, ref)


def test_constant_sequence_converges(fuchsian, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3)
    report = earthquake_limit(fuchsian, LaminationApproximation(sequence=(mc,) * 4), 1e-6, ref)
    assert report.verdict is Verdict.CONVERGED
    assert report.steps == 4
    assert [d.distance for d in report.distances] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)
    assert report.side_violations == 0
    assert report.final.distance(deform(fuchsian, mc, 1.0, ref)).value < 1e-12
    assert list(report.to_frame().columns) == ["step", "distance", "fallback"]


def test_weight_sequence_approaches_its_limit(fuchsian, ref):
    base = WeightedMulticurve.single("a1", translation=1e-4)
    sequence = tuple(base.with_weights([1.0 + 1.0 / k]) for k in range(1, 7))
    report = earthquake_limit(fuchsian, LaminationApproximation(sequence=sequence), 1e-4, ref)
    distances = [d.distance for d in report.distances]
    assert all(b < a for a, b in zip(distances, distances[1:]))
    assert report.verdict is Verdict.CONVERGED
    assert report.final.distance(deform(fuchsian, base, 1.0, ref)).value < 1e-3


def test_growing_weights_diverge(fuchsian, ref):
    base = WeightedMulticurve.single("a1", translation=1e-4)
    sequence = tuple(base.with_weights([w]) for w in (1.0, 10.0, 100.0, 1000.0))
    report = earthquake_limit(fuchsian, LaminationApproximation(sequence=sequence), 1e-8, ref)
    assert report.verdict is Verdict.DIVERGING


def test_truncation_exhausts_the_budget(fuchsian, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3)
    report = earthquake_limit(fuchsian, LaminationApproximation(sequence=(mc,) * 4), 1e-6, ref, max_steps=2)
    assert report.truncated == "max_steps"
    assert report.steps == 2
    assert report.verdict is Verdict.BUDGET_EXHAUSTED



def test_wall_clock_cap_keeps_the_first_step(fuchsian, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3)
    report = earthquake_limit(fuchsian, LaminationApproximation(sequence=(mc,) * 3), 1e-6, ref, max_seconds=1e-9)
    assert report.steps == 1
    assert report.truncated == "max_seconds"
    assert report.verdict is Verdict.BUDGET_EXHAUSTED
    assert report.final.distance(deform(fuchsian, mc, 1.0, ref)).value == 0.0


@pytest.mark.parametrize(
    "distances, truncated, expected",
    [
        ([], False, Verdict.BUDGET_EXHAUSTED),
        ([1e-3, 1e-4, 1e-7], False, Verdict.CONVERGED),
        ([1e-3, 1e-4, 1e-7], True, Verdict.BUDGET_EXHAUSTED),
        ([1e-3, 1e-7, 1e-6], False, Verdict.BUDGET_EXHAUSTED),
        ([1e-3, 1e-2, 1e-2], False, Verdict.DIVERGING),
        ([1e-1, 1e-2, 1e-3], False, Verdict.BUDGET_EXHAUSTED),
    ],
)
def test_verdict(distances, truncated, expected):
    assert _verdict(distances, 1e-6, truncated) is expected


@pytest.mark.slow
def test_dehn_twist_recipe_converges(fuchsian, ref):
    la = LaminationApproximation.recipe(word("b1"), word("a1"), 8, CentralizerParameter(translation=1e-3))
    report = earthquake_limit(fuchsian, la, 1e-4, ref)
    tail = [d.distance for d in report.distances[-3:]]
    assert all(b <= a for a, b in zip(tail, tail[1:]))
    assert report.verdict is Verdict.CONVERGED
    assert report.side_violations == 0


def test_weight_lipschitz(fuchsian, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3)
    report = weight_lipschitz(fuchsian, mc, 1e-3, ref)
    assert report.passed
    assert report.ratio == pytest.approx(2.0, rel=0.05)
    assert report.constant > 0


@pytest.mark.parametrize("delta", [1e-2, 1e-3, 1e-4])
def test_weight_lipschitz_bent(bent3, ref, delta):
    mc = WeightedMulticurve.single("a1", translation=0.2, angle=0.3) + WeightedMulticurve.single("a2", angle=0.1)
    report = weight_lipschitz(bent3, mc, delta, ref)
    assert 1.0 <= report.ratio <= 4.0


def test_weight_lipschitz_rejects_bad_step(fuchsian, ref):
    with pytest.raises(PreconditionError):
        weight_lipschitz(fuchsian, WeightedMulticurve.single("a1", translation=0.3), 0.0, ref)


def test_sequence_distance(fuchsian, ref):
    mc = WeightedMulticurve.single("a1", translation=0.3)
    report = earthquake_limit(fuchsian, LaminationApproximation(sequence=(mc, mc)), 1e-6, ref)
    assert sequence_distance(report, report) == 0.0
    again = earthquake_limit(fuchsian, LaminationApproximation(sequence=(mc, mc)), 1e-6, ref)
    assert sequence_distance(report, again) == 0.0


LIPSCHITZ_CONFIGURATIONS = [
    (cores, tuple(values))
    for cores, values in zip(
        [("a1",), ("b1",), ("a1", "a2"), ("b1", "b2"), ("a1", "b2")] * 2,
        np.random.default_rng(99).uniform(0.1, 1.0, size=(10, 3)),
    )
]


@pytest.mark.parametrize("cores, values", LIPSCHITZ_CONFIGURATIONS)
def test_weight_lipschitz_configurations(bent3, ref, cores, values):
    translation, angle, weight = values
    mc = WeightedMulticurve(())
    for core in cores:
        mc = mc + WeightedMulticurve.single(core, weight=weight, translation=translation, angle=angle)
    report = weight_lipschitz(bent3, mc, 1e-3, ref)
    assert report.passed
    assert report.ratio == pytest.approx(2.0, rel=0.1)
