from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from ca.errors import ParameterError
from ca.params import RuleParams
from ca.tape import Tape, random_tape, single_one, step_tape, tape_from_ones
from correspondence.safety import ca_safe
from export.netpbm import orient, ppm_p3
from fractal.doubling import double_bits, run_doubling, undouble
from fractal.scaling import (
    iterate_scaling,
    limit_triangle,
    rescaled_cells,
    rescaled_leg,
    rescaled_vertex,
    scale_triangle,
    theorem2_verify,
)
from fractal.stars import (
    StarRecord,
    birth_check,
    birth_initial,
    closed_form_cell,
    closed_form_limit,
    closed_form_point,
    descendant_cell,
    find_stars,
    fit_closed_form,
    search_cell,
    star_copy_check,
    star_limit_check,
)
from fractal.superpose import superpose
from game.geometry import Triangle

DOUBLING_PAIRS = [(0, 1), (1, 1), (1, 2)]


def test_double_bits_examples(layered_row):
    assert double_bits(tape_from_ones([0, 2])).ones() == [0, 1, 4, 5]
    assert double_bits(layered_row).ones() == [0, 1, *range(10, 20), 22, 23]
    assert double_bits(step_tape(1)) == step_tape(2)
    assert double_bits(step_tape(0)) == step_tape(0)


def test_undouble_recovers_the_previous_row(layered_row):
    for tape in (layered_row, random_tape(17, seed=4, origin=-5), step_tape(3)):
        doubled = double_bits(tape)
        assert undouble(doubled, 0) == tape
        assert undouble(doubled, 1) == tape
    with pytest.raises(ParameterError):
        undouble(layered_row, 2)


def test_run_doubling_levels():
    run = run_doubling(step_tape(1), 0, 1, n_max=3, steps=4)
    assert [run.params_at(n) for n in range(4)] == [RuleParams(2, 0, 2**n, 0) for n in range(4)]
    assert [level.steps for level in run.levels] == [4, 8, 16, 32]
    assert run.initial_at(3) == step_tape(8)

    with pytest.raises(ParameterError):
        run_doubling(step_tape(1), 0, 1, n_max=1, steps=2, gamma=3)
    with pytest.raises(ParameterError):
        run_doubling(step_tape(1), 0, 1, n_max=1, steps=2, block=1)


def test_all_zero_initial_stays_zero_at_every_level():
    run = run_doubling(Tape.constant(0), 1, 1, n_max=2, steps=3)
    assert all(row == Tape.constant(0) for level in run.levels for row in level.rows)
    report = theorem2_verify(run, 0, -4, 4, 2, 2)
    assert report.ok
    # Terminal triangles are safe; above an all-zero row every base window holds delta zeros.
    assert ca_safe(Triangle.at(0, 0, 2), run.levels[0])
    assert not ca_safe(Triangle.at(0, 1, 2), run.levels[0])


def test_scale_triangle_examples():
    assert scale_triangle(Triangle.at(3, 0, 2)) == Triangle.at(6, 0, 3)
    assert scale_triangle(Triangle.at(3, 2, 2)) == Triangle.at(6, 3, 4)
    assert scale_triangle(Triangle.at(-4, 1, 1)) == Triangle.at(-8, 1, 2)
    with pytest.raises(ParameterError):
        scale_triangle(Triangle.at(0, 1, 1), RuleParams(3, 0, 0, 0))


def test_theorem2_on_step_initial():
    run = run_doubling(step_tape(1), 0, 1, n_max=1, steps=12)
    report = theorem2_verify(run, 0, 0, 24, 8, 4)
    assert report.ok, report.to_dict()
    assert report.positions_checked == 25 * 9 * 4


@pytest.mark.parametrize("left,right", DOUBLING_PAIRS)
def test_theorem2_on_step_and_random_initials(left, right):
    initials = [step_tape(1)] + [random_tape(12, seed=seed) for seed in (1, 2, 3)]
    for initial in initials:
        run = run_doubling(initial, left, right, n_max=3, steps=8)
        for n in range(3):
            factor = 2**n
            report = theorem2_verify(run, n, -4 * factor, 17 * factor - 1, 6, 3)
            assert report.ok, report.to_dict()


def test_theorem2_on_layered_initial(layered_row):
    run = run_doubling(layered_row, 1, 1, n_max=2, steps=8)
    for n in range(2):
        assert theorem2_verify(run, n, -4 * 2**n, 16 * 2**n, 6, 3).ok
    split = theorem2_verify(run, 1, -8, 32, 6, 3, jobs=2)
    assert split.to_dict() == theorem2_verify(run, 1, -8, 32, 6, 3).to_dict()
    assert split.positions_checked == 7 * 3 * 41
    with pytest.raises(ParameterError):
        theorem2_verify(run, 2, 0, 1, 1, 1)


def test_find_stars():
    row = tape_from_ones([0, 1, 3, 4])
    run = run_doubling(row, 0, 0, n_max=0, steps=0)
    assert [(s.x, s.t) for s in find_stars(run.levels[0], 0)] == [(2, 0)]

    flat = run_doubling(Tape.constant(1), 0, 0, n_max=0, steps=0)
    assert find_stars(flat.levels[0], 0) == []


@pytest.mark.parametrize("left,right", [(0, 1), (1, 1), (2, 2)])
@pytest.mark.parametrize("alpha", [0, 3])
def test_star_births_above_exact_runs(left, right, alpha):
    result = birth_check(left, right, alpha)
    assert result.holds, result.to_dict()
    assert result.expected == (2 * alpha + 2 * left + 3, 1)
    assert result.stated == (2 * alpha + 2 * left + 4, 1)
    assert result.stars_short == []


def test_star_copies_halve_their_distance():
    for left, right in [(0, 1), (1, 1), (2, 2)]:
        run = run_doubling(birth_initial(left, right, 0), left, right, n_max=3, steps=1)
        seed = StarRecord(n=1, x=2 * left + 3, t=1)
        assert seed in find_stars(run.levels[1], 1, n=1)

        report = star_copy_check(run, seed)
        assert report.lost_at is None
        assert report.halves_exactly
        assert report.limit == (Fraction(left + 2), Fraction(1))
        assert [(s.x, s.t) for s in report.stars] == [
            (2 * left + 3, 1),
            descendant_cell(2 * left + 3, 1),
            descendant_cell(*descendant_cell(2 * left + 3, 1)),
        ]


def test_closed_form_fit_passes_through_the_seed():
    seed = StarRecord(n=2, x=23, t=9)
    alpha, y = fit_closed_form(seed, left=1)
    assert closed_form_cell(alpha, 1, y, 2) == (23, 9)
    assert closed_form_point(alpha, 1, y, 2) == seed.position
    assert search_cell(23, 9) == closed_form_cell(alpha, 1, y, 3)


def test_newborn_star_lineage_on_layered_row(layered_row):
    run = run_doubling(layered_row, 1, 1, n_max=3, steps=8)
    seed = StarRecord(n=0, x=16, t=7)
    assert seed in find_stars(run.levels[0], 7)

    report = star_limit_check(run, seed)
    assert (report.alpha, report.y) == (12, 7)
    assert report.lost_at is None
    assert [(s.x, s.t) for s in report.stars] == [(16, 7), (31, 11), (61, 19), (121, 35)]
    assert [s.predicted for s in report.steps] == [(16, 7), (30, 11), (58, 19), (114, 35)]
    assert [s.offset for s in report.steps] == [(0, 0), (1, 0), (3, 0), (7, 0)]
    assert [s.agrees_with_closed_form for s in report.steps] == [True, False, False, False]

    assert report.limit == (Fraction(14), Fraction(4))
    assert report.observed_limit == (Fraction(15), Fraction(4))
    assert report.halves_toward_observed
    assert [s.distance for s in report.steps] == [3, Fraction(3, 2), Fraction(5, 4), Fraction(9, 8)]

    pinned = star_limit_check(run, seed, alpha=12, y=7)
    assert pinned.to_dict() == report.to_dict()


@pytest.mark.parametrize("left,right", [(0, 1), (1, 1), (2, 2)])
def test_star_lineages_follow_the_closed_form_search(layered_row, left, right):
    run = run_doubling(layered_row, left, right, n_max=3, steps=8)
    seeds = [s for row in range(1, 9) for s in find_stars(run.levels[0], row)]
    assert seeds

    for seed in seeds:
        report = star_limit_check(run, seed)
        first = report.steps[0]
        assert first.star == seed
        assert first.agrees_with_closed_form
        assert report.limit == closed_form_limit(report.alpha, left, report.y)

        for step in report.steps[1:]:
            if step.star is None:
                continue
            assert step.star in find_stars(run.levels[step.n], step.star.t, n=step.n)
            assert max(abs(step.star.x - step.searched[0]), abs(step.star.t - step.searched[1])) <= 1

        if report.lost_at is None:
            assert len(report.steps) == run.n_max + 1
        else:
            assert report.steps[-1].star is None
            assert report.steps[-1].n == report.lost_at
            assert report.lost_reason in ("missing", "ambiguous")
            assert (report.lost_reason == "missing") == (report.steps[-1].candidates == 0)


def test_star_tracking_rejects_levels_outside_the_run(layered_row):
    run = run_doubling(layered_row, 1, 1, n_max=1, steps=4)
    with pytest.raises(ParameterError):
        star_limit_check(run, StarRecord(n=4, x=0, t=0))
    with pytest.raises(ParameterError):
        star_copy_check(run, StarRecord(n=2, x=0, t=0))


def test_closed_form_sequence():
    y = Fraction(5)
    assert closed_form_point(0, 1, y, 1) == (Fraction(3), y - Fraction(3, 2))
    assert closed_form_point(0, 1, y, 2) == (Fraction(5, 2), y - Fraction(9, 4))
    limit = closed_form_limit(0, 1, y)
    assert limit == (Fraction(2), y - 3)

    distances = [max(abs(p - q) for p, q in zip(closed_form_point(0, 1, y, n), limit)) for n in range(1, 6)]
    assert all(b / a == Fraction(1, 2) for a, b in zip(distances, distances[1:]))


def test_limit_triangle_and_rescaled_shapes():
    t = Triangle.at(4, 3, 1)
    limit = limit_triangle(t)
    assert limit.vertex == (Fraction(4), Fraction(2))
    assert limit.leg == 2

    legs = [rescaled_leg(2, n) for n in range(6)]
    assert legs[:3] == [Fraction(2), Fraction(5, 2), Fraction(11, 4)]
    assert all(a < b < 3 for a, b in zip(legs, legs[1:]))

    for n in range(5):
        assert rescaled_vertex(t, n) == (Fraction(4), Fraction(2) + Fraction(1, 2**n))
    assert limit_triangle(scale_triangle(t)).vertex == (Fraction(8), Fraction(4))
    assert iterate_scaling(t, 2) == scale_triangle(scale_triangle(t))


def test_rescaled_footprints_nest():
    params = RuleParams(2, 0, 0, 0)
    for t in [Triangle.at(3, 2, 2), Triangle.at(0, 1, 1), Triangle.at(-2, 4, 3)]:
        for n in range(3):
            inner = rescaled_cells(iterate_scaling(t, n), n, params)
            outer = rescaled_cells(iterate_scaling(t, n + 1), n + 1, params)
            assert inner <= outer


def test_superpose_matches_golden(golden_dir):
    run = run_doubling(single_one(0), 0, 0, n_max=1, steps=2)
    image = superpose(run, [0, 1], 0, 1, 1)
    assert image.scale == 2
    payload = ppm_p3(orient(image.rgb(), "t0-top"), ["layers 0,1"])
    assert payload == (golden_dir / "superpose_single_one_levels_0_1.ppm").read_bytes()


def test_single_layer_is_the_plain_diagram(layered_row):
    run = run_doubling(layered_row, 1, 1, n_max=1, steps=8)
    image = superpose(run, [0], -4, 20, 8)
    assert np.array_equal(image.pixels, run.levels[0].window(-4, 20))

    with pytest.raises(ParameterError):
        superpose(run, [], -4, 20, 8)
    with pytest.raises(ParameterError):
        superpose(run, [2], -4, 20, 8)
