from __future__ import annotations

from ca.diagram import Diagram
from ca.errors import DiagramRangeError
from ca.kernel import zero_counts
from game.geometry import Triangle, base_span, triangle_rows


def ca_safe(t: Triangle, diagram: Diagram) -> bool:
    """Every cell of t reads 0, and every base cell's full window one row down has at most B zeros.

    The window condition is vacuous for a base on row 0.
    """
    params = diagram.params
    top_level = t.y + t.h - 1
    if top_level > diagram.steps:
        raise DiagramRangeError(f"{t} reaches row {top_level}, diagram has rows 0..{diagram.steps}")

    for level, lo, hi in triangle_rows(t, params):
        if diagram.rows[level].read(lo, hi).any():
            return False

    if t.y >= 1:
        lo, hi = base_span(t, params)
        _, zeros_full = zero_counts(diagram.rows[t.y - 1], lo, hi, params)
        if (zeros_full > params.block).any():
            return False
    return True


def lemma1_witness(u: int, v: int, diagram: Diagram) -> int | None:
    """Smallest h with T(u, v-h+1, h) CA-safe, or None.

    Triangles sharing a top share their rows, so once a row holds a 1 no taller
    triangle can be safe and the search stops.
    """
    if v > diagram.steps:
        raise DiagramRangeError(f"row {v} outside computed rows 0..{diagram.steps}")
    step = diagram.params.gamma - 1
    for h in range(1, v + 2):
        y = v - h + 1
        if diagram.rows[y].read(u - (h - 1) * step, u).any():
            return None
        if ca_safe(Triangle(y=y, h=h, x=u), diagram):
            return h
    return None


def lemma1_check(u: int, v: int, diagram: Diagram) -> bool:
    """CA(u, v) = 0 iff some triangle topped at (u, v) is CA-safe."""
    return (diagram.cell(u, v) == 0) == (lemma1_witness(u, v, diagram) is not None)
