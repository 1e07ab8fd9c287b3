from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ca.errors import IllegalPositionError
from ca.params import RuleParams

Cell = tuple[int, int]


class WindowMode(str, Enum):
    ANCHORED = "anchored"
    ANY_CONTIGUOUS = "any-contiguous"


@dataclass(frozen=True, order=True)
class Triangle:
    """Play-triangle with lower-right cell (x, y) and height h.

    Field order is (y, h, x) so that sorting triangles is the lexicographic
    order used for reporting minimal counterexamples.
    """

    y: int
    h: int
    x: int

    def __post_init__(self) -> None:
        if self.y < 0:
            raise IllegalPositionError(f"triangle base below the board: y={self.y}")
        if self.h < 1:
            raise IllegalPositionError(f"triangle height must be >= 1, got {self.h}")

    @classmethod
    def at(cls, x: int, y: int, h: int) -> Triangle:
        return cls(y=y, h=h, x=x)

    @property
    def top(self) -> Cell:
        return self.x, self.y + self.h - 1

    def shifted(self, k: int) -> Triangle:
        return Triangle(y=self.y, h=self.h, x=self.x + k)

    def __str__(self) -> str:
        return f"T({self.x},{self.y},{self.h})"


@dataclass(frozen=True)
class Window:
    level: int
    lo: int
    hi: int
    anchor: int

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    def columns(self) -> range:
        return range(self.lo, self.hi + 1)


def triangle_rows(t: Triangle, params: RuleParams) -> list[tuple[int, int, int]]:
    """(level, lo, hi) for every row of the triangle, top row first."""
    step = params.gamma - 1
    return [(t.y + t.h - i, t.x - (i - 1) * step, t.x) for i in range(1, t.h + 1)]


def triangle_cells(t: Triangle, params: RuleParams) -> frozenset[Cell]:
    return frozenset(
        (column, level) for level, lo, hi in triangle_rows(t, params) for column in range(lo, hi + 1)
    )


def top(t: Triangle) -> Cell:
    return t.top


def base_span(t: Triangle, params: RuleParams) -> tuple[int, int]:
    return t.x - (t.h - 1) * (params.gamma - 1), t.x


def base(t: Triangle, params: RuleParams) -> frozenset[Cell]:
    lo, hi = base_span(t, params)
    return frozenset((column, t.y) for column in range(lo, hi + 1))


def support_span(t: Triangle, params: RuleParams) -> tuple[int, int]:
    return t.x - t.h * (params.gamma - 1) - params.left, t.x + params.right


def support(t: Triangle, params: RuleParams) -> frozenset[Cell]:
    lo, hi = support_span(t, params)
    return frozenset((column, t.y - 1) for column in range(lo, hi + 1))


def window_anchors(t: Triangle, params: RuleParams) -> list[Window]:
    """One delta-window per base cell c: [c-(gamma-1)-left, c+right] one level below."""
    if t.y == 0:
        return []
    lo, hi = base_span(t, params)
    return [
        Window(level=t.y - 1, lo=c - params.reach_left, hi=c + params.right, anchor=c)
        for c in range(lo, hi + 1)
    ]


def contiguous_windows(t: Triangle, params: RuleParams) -> list[Window]:
    """Every delta-window lying inside the support row, slid left to right."""
    if t.y == 0:
        return []
    lo, hi = support_span(t, params)
    return [
        Window(level=t.y - 1, lo=start, hi=start + params.delta - 1, anchor=start + params.reach_left)
        for start in range(lo, hi - params.delta + 2)
    ]


def windows_for(t: Triangle, params: RuleParams, mode: WindowMode = WindowMode.ANCHORED) -> list[Window]:
    if WindowMode(mode) is WindowMode.ANY_CONTIGUOUS:
        return contiguous_windows(t, params)
    return window_anchors(t, params)


def tops_at(column: int, level: int) -> list[Triangle]:
    """Every triangle with top (column, level) that stays on the board, shortest first."""
    return [Triangle(y=level - h + 1, h=h, x=column) for h in range(1, level + 2)]
