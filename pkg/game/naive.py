from __future__ import annotations

from itertools import combinations

from ca.errors import GuardError, IllegalPositionError
from game.board import Board
from game.geometry import Triangle, Window, WindowMode, tops_at, windows_for
from game.solver import Outcome, is_legal

NAIVE_MAX_BLOCK = 6
NAIVE_MAX_DELTA = 10


class NaiveOracle:
    """Plays the window-block-place protocol literally, enumerating every block set.

    Independent of the counting shortcut in :class:`game.solver.BlockingSolver`;
    used to cross-check it on small parameters.
    """

    def __init__(self, board: Board, window_mode: WindowMode = WindowMode.ANCHORED) -> None:
        params = board.params
        if params.block > NAIVE_MAX_BLOCK or params.delta > NAIVE_MAX_DELTA:
            raise GuardError(
                f"naive oracle needs block <= {NAIVE_MAX_BLOCK} and delta <= {NAIVE_MAX_DELTA}, "
                f"got {params.label()}"
            )
        board.require_obstacles()
        self.board = board
        self.window_mode = WindowMode(window_mode)
        self._memo: dict[Triangle, Outcome] = {}

    def outcome(self, t: Triangle) -> Outcome:
        if not is_legal(t, self.board):
            raise IllegalPositionError(f"{t} overlaps an obstacle")
        return self._outcome(t)

    def _outcome(self, t: Triangle) -> Outcome:
        if t not in self._memo:
            windows = windows_for(t, self.board.params, self.window_mode)
            mover_wins = any(self._survives_every_block(w) for w in windows)
            self._memo[t] = Outcome.N if mover_wins else Outcome.P
        return self._memo[t]

    def _placements(self, column: int, level: int) -> list[Triangle]:
        return [t for t in tops_at(column, level) if is_legal(t, self.board)]

    def _survives_every_block(self, window: Window) -> bool:
        columns = list(window.columns())
        moves = {c: self._placements(c, window.level) for c in columns}
        for size in range(self.board.params.block + 1):
            for blocked in combinations(columns, size):
                open_columns = [c for c in columns if c not in blocked]
                if not any(self._outcome(t) is Outcome.P for c in open_columns for t in moves[c]):
                    return False
        return True


def outcome_naive(t: Triangle, board: Board, window_mode: WindowMode = WindowMode.ANCHORED) -> Outcome:
    return NaiveOracle(board, window_mode).outcome(t)
