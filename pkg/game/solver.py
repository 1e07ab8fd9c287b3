from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np

from ca.errors import IllegalPositionError
from game.board import Board
from game.geometry import Triangle, Window, WindowMode, base_span, tops_at, windows_for

logger = logging.getLogger(__name__)


class Outcome(str, Enum):
    N = "N"
    P = "P"


Oracle = Callable[[Triangle], Outcome]


@dataclass(frozen=True)
class SolveResult:
    triangle: Triangle
    outcome: Outcome
    witness: Window | None
    good_cells: tuple[int, ...] | None

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "witness_window": [self.witness.lo, self.witness.hi] if self.witness else None,
            "good_cells": list(self.good_cells) if self.good_cells is not None else None,
        }


def is_legal(t: Triangle, board: Board) -> bool:
    """Obstacles live on level 0, so only triangles whose base sits there can hit one."""
    if t.y > 0:
        return True
    lo, hi = base_span(t, board.params)
    return board.obstacles_in(lo, hi) == 0


def has_p_placement(column: int, level: int, board: Board, oracle: Oracle) -> bool:
    return any(is_legal(t, board) and oracle(t) is Outcome.P for t in tops_at(column, level))


def good_cells(window: Window, board: Board, oracle: Oracle) -> list[int]:
    """Columns of the window where the mover can top a legal P-triangle."""
    return [c for c in window.columns() if has_p_placement(c, window.level, board, oracle)]


def terminal_window_win(window: Window, board: Board) -> bool:
    if window.level != 0:
        raise IllegalPositionError(f"terminal criterion applies to level 0 windows, got level {window.level}")
    return board.obstacles_in(window.lo, window.hi) + board.params.block < window.width


class BlockingSolver:
    """Exact outcomes for one board.

    The blocker removes good cells first, so a window wins for the mover exactly
    when it holds more than ``block`` good cells. Outcomes are memoized per
    triangle and the good-cell predicate per (column, level).
    """

    def __init__(self, board: Board, window_mode: WindowMode = WindowMode.ANCHORED) -> None:
        board.require_obstacles()
        self.board = board
        self.params = board.params
        self.window_mode = WindowMode(window_mode)
        self._outcomes: dict[Triangle, Outcome] = {}
        self._good: dict[tuple[int, int], bool] = {}

    def outcome(self, t: Triangle) -> Outcome:
        if not is_legal(t, self.board):
            raise IllegalPositionError(f"{t} overlaps an obstacle")
        return self._outcome(t)

    def _outcome(self, t: Triangle) -> Outcome:
        cached = self._outcomes.get(t)
        if cached is None:
            cached = Outcome.P if self._winning_window(t) is None else Outcome.N
            self._outcomes[t] = cached
        return cached

    def _winning_window(self, t: Triangle) -> Window | None:
        for window in windows_for(t, self.params, self.window_mode):
            count = sum(1 for c in window.columns() if self.is_good(c, window.level))
            if count > self.params.block:
                return window
        return None

    def is_good(self, column: int, level: int) -> bool:
        key = (column, level)
        cached = self._good.get(key)
        if cached is None:
            cached = has_p_placement(column, level, self.board, self._outcome)
            self._good[key] = cached
        return cached

    def good_cells(self, window: Window) -> list[int]:
        return [c for c in window.columns() if self.is_good(c, window.level)]

    def solve(self, t: Triangle) -> SolveResult:
        outcome = self.outcome(t)
        witness = self._winning_window(t) if outcome is Outcome.N else None
        cells = tuple(self.good_cells(witness)) if witness is not None else None
        return SolveResult(triangle=t, outcome=outcome, witness=witness, good_cells=cells)

    def good_grid(self, lo: int, hi: int, t_max: int) -> np.ndarray:
        """0 where a legal P-triangle tops the cell, else 1; array row i is level i."""
        grid = np.ones((t_max + 1, hi - lo + 1), dtype=np.uint8)
        for level in range(t_max + 1):
            for column in range(lo, hi + 1):
                if self.is_good(column, level):
                    grid[level, column - lo] = 0
        logger.debug("good grid %d..%d x 0..%d, memo sizes %d/%d", lo, hi, t_max, len(self._outcomes), len(self._good))
        return grid

    @property
    def memo_size(self) -> int:
        return len(self._outcomes)


@lru_cache(maxsize=32)
def solver_for(board: Board, window_mode: WindowMode = WindowMode.ANCHORED) -> BlockingSolver:
    return BlockingSolver(board, window_mode)


def outcome(t: Triangle, board: Board, window_mode: WindowMode = WindowMode.ANCHORED) -> Outcome:
    return solver_for(board, WindowMode(window_mode)).outcome(t)
