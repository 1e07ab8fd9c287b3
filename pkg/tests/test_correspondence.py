from __future__ import annotations

import numpy as np
import pytest

from ca.diagram import evolve
from ca.errors import DiagramRangeError
from ca.params import RuleParams
from ca.tape import single_one, step_tape, tape_from_ones
from correspondence.safety import ca_safe, lemma1_check, lemma1_witness
from correspondence.verify import (
    lemma1_sweep,
    render_report_markdown,
    serialize_report_json,
    theorem1_verify,
)
from game.board import Board
from game.geometry import Triangle, WindowMode, base_span
from game.solver import BlockingSolver, Outcome


def test_safe_triangle_tops_on_rule60(rule60_diagram):
    assert lemma1_witness(1, 2, rule60_diagram) == 1
    assert lemma1_check(1, 2, rule60_diagram)
    assert ca_safe(Triangle.at(1, 2, 1), rule60_diagram)

    # (0, 2) is a 1-cell: nothing topped there can be safe.
    assert rule60_diagram.cell(0, 2) == 1
    assert lemma1_witness(0, 2, rule60_diagram) is None
    assert lemma1_check(0, 2, rule60_diagram)


def test_tall_triangle_is_the_only_safe_one_beside_an_obstacle(rule60):
    diagram = evolve(single_one(0), rule60, 4)
    assert diagram.cell(-1, 1) == 0
    assert not ca_safe(Triangle.at(-1, 1, 1), diagram)
    assert ca_safe(Triangle.at(-1, 0, 2), diagram)
    assert lemma1_witness(-1, 1, diagram) == 2


def test_ca_safe_needs_computed_rows(rule60):
    diagram = evolve(single_one(0), rule60, 2)
    with pytest.raises(DiagramRangeError):
        ca_safe(Triangle.at(0, 2, 2), diagram)


def test_theorem1_on_single_obstacle_board(rule60):
    report = theorem1_verify(Board(rule60, single_one(0)), -6, 6, 5, 3)
    assert report.ok
    assert report.positions_checked == 13 * 5 * 3
    assert report.minimal_counterexample is None


def test_theorem1_on_semi_infinite_obstacle_field():
    for params in [RuleParams(2, 0, 0, 0), RuleParams(2, 1, 2, 0), RuleParams(3, 1, 0, 0)]:
        report = theorem1_verify(Board(params, step_tape(1)), -10, 9, 4, 3)
        assert report.ok, report.to_dict()


def test_theorem1_on_random_zero_block_boards(zero_block_boards):
    for board in zero_block_boards:
        report = theorem1_verify(board, -10, 10, 8, 4)
        assert report.ok, report.to_dict()
        assert report.positions_checked == 21 * 8 * 4


def test_lemma1_on_random_zero_block_boards(zero_block_boards):
    for board in zero_block_boards:
        diagram = evolve(board.level0, board.params, 8)
        report = lemma1_sweep(diagram, -10, 10, 8, board_digest=board.digest())
        assert report.ok, report.to_dict()
        assert report.positions_checked == 21 * 8


def test_good_cells_reproduce_the_automaton_on_zero_block_boards(zero_block_boards):
    for board in zero_block_boards[:40]:
        grid = BlockingSolver(board).good_grid(-10, 10, 6)
        diagram = evolve(board.level0, board.params, 6)
        assert np.array_equal(grid, diagram.window(-10, 10))


def test_sliding_windows_satisfy_the_equivalence_too(zero_block_boards):
    for board in zero_block_boards[:20]:
        report = theorem1_verify(board, -8, 8, 5, 3, window_mode=WindowMode.ANY_CONTIGUOUS)
        assert report.ok
        assert report.window_mode == "any-contiguous"


def test_marking_terminal_cells_never_makes_a_triangle_safe(zero_block_boards):
    rng = np.random.default_rng(13)
    for board in zero_block_boards[:50]:
        params = board.params
        diagram = evolve(board.level0, params, 4)
        for _ in range(10):
            t = Triangle.at(int(rng.integers(-8, 9)), 0, int(rng.integers(1, 4)))
            if ca_safe(t, diagram):
                continue
            lo, hi = base_span(t, params)
            ones = set(board.level0.ones()) | {int(rng.integers(lo, hi + 1))}
            marked = evolve(tape_from_ones(ones), params, 4)
            assert not ca_safe(t, marked)


def test_blocking_number_one_breaks_the_correspondence(blocking_counterexample):
    board = blocking_counterexample
    diagram = evolve(board.level0, board.params, 6)
    assert diagram.cell(2, 2) == 0
    assert lemma1_witness(2, 2, diagram) is None
    assert not lemma1_check(2, 2, diagram)

    t = Triangle.at(2, 3, 1)
    assert BlockingSolver(board).outcome(t) is Outcome.P
    assert not ca_safe(t, diagram)

    report = theorem1_verify(board, -4, 4, 4, 2, cap=100)
    assert not report.ok
    assert "T(2,3,1)" in [m.subject for m in report.mismatches]
    assert report.minimal_counterexample.key == min(m.key for m in report.mismatches)


def test_worker_count_does_not_change_the_report(blocking_counterexample, zero_block_boards):
    for board in (blocking_counterexample, zero_block_boards[0]):
        single = theorem1_verify(board, -6, 6, 4, 2, cap=100)
        split = theorem1_verify(board, -6, 6, 4, 2, cap=100, jobs=2)
        assert single.to_dict() == split.to_dict()


def test_mismatch_stream_stops_at_cap(blocking_counterexample):
    report = theorem1_verify(blocking_counterexample, -4, 4, 4, 2, cap=1)
    assert report.truncated
    assert len(report.mismatches) == 1
    y, h, x = report.mismatches[0].key
    assert report.positions_checked == ((y - 1) * 2 + (h - 1)) * 9 + (x + 4) + 1

    diagram = evolve(blocking_counterexample.level0, blocking_counterexample.params, 6)
    lemma = lemma1_sweep(diagram, -4, 4, 6, cap=1)
    assert lemma.truncated and len(lemma.mismatches) == 1
    t, x = lemma.mismatches[0].key
    assert lemma.positions_checked == (t - 1) * 9 + (x + 4) + 1


def test_lemma_sweep_worker_count_does_not_change_the_report(blocking_counterexample):
    diagram = evolve(blocking_counterexample.level0, blocking_counterexample.params, 6)
    for cap in (1, 3, 100):
        single = lemma1_sweep(diagram, -6, 6, 6, cap=cap)
        split = lemma1_sweep(diagram, -6, 6, 6, cap=cap, jobs=3)
        assert single.to_dict() == split.to_dict()


def test_report_rendering(rule60):
    report = theorem1_verify(Board(rule60, single_one(0)), -2, 2, 2, 2)
    text = render_report_markdown(report)
    assert "# theorem1 report" in text
    assert "Mismatches: **0**" in text
    assert "- None detected." in text
    assert '"mismatch_count": 0' in serialize_report_json(report)

    empty = theorem1_verify(Board(rule60, single_one(0)), 3, 2, 2, 2)
    assert empty.ok and empty.positions_checked == 0
