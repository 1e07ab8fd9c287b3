from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from ca.diagram import Diagram
from ca.errors import ParameterError
from ca.params import RuleParams
from correspondence.safety import ca_safe
from correspondence.verify import DEFAULT_MISMATCH_CAP, EquivalenceReport, Mismatch, close_report, scan_columns
from fractal.doubling import DoublingRun
from game.geometry import Triangle, triangle_rows

logger = logging.getLogger(__name__)

RationalPoint = tuple[Fraction, Fraction]


def scale_triangle(t: Triangle, params: RuleParams | None = None) -> Triangle:
    """The triangle of the doubled diagram matching t: T(2u, 0, 2h-1) on row 0, else T(2u, 2v-1, 2h)."""
    if params is not None and params.gamma != 2:
        raise ParameterError(f"triangle scaling needs gamma=2, got {params.gamma}")
    if t.y == 0:
        return Triangle(y=0, h=2 * t.h - 1, x=2 * t.x)
    return Triangle(y=2 * t.y - 1, h=2 * t.h, x=2 * t.x)


def _theorem2_scan(
    xmin: int, xmax: int, lower: Diagram, upper: Diagram, y_max: int, h_max: int, cap: int
) -> list[Mismatch]:
    found: list[Mismatch] = []
    for y in range(0, y_max + 1):
        for h in range(1, h_max + 1):
            for x in range(xmin, xmax + 1):
                t = Triangle(y=y, h=h, x=x)
                scaled = scale_triangle(t)
                safe_lower = ca_safe(t, lower)
                safe_upper = ca_safe(scaled, upper)
                if safe_lower != safe_upper:
                    found.append(
                        Mismatch(
                            key=(y, h, x),
                            subject=f"{t}->{scaled}",
                            verdicts={"safe_level_n": safe_lower, "safe_level_n1": safe_upper},
                        )
                    )
                    if len(found) >= cap:
                        return found
    return found


def theorem2_verify(
    run: DoublingRun,
    n: int,
    xmin: int,
    xmax: int,
    y_max: int,
    h_max: int,
    cap: int = DEFAULT_MISMATCH_CAP,
    jobs: int = 1,
) -> EquivalenceReport:
    """CA-safety of T on level n against CA-safety of its scaled image on level n+1, 0 <= y <= y_max."""
    if not 0 <= n < run.n_max:
        raise ParameterError(f"levels {n} and {n + 1} are not both in the run (n_max={run.n_max})")
    lower, upper = run.levels[n], run.levels[n + 1]
    report = EquivalenceReport(
        check="theorem2",
        params=f"{lower.params.label()}->{upper.params.label()}",
        board_digest=None,
        window_mode=None,
        region={"n": n, "xmin": xmin, "xmax": xmax, "ymax": y_max, "hmax": h_max},
        cap=cap,
    )
    width = xmax - xmin + 1
    if width <= 0 or y_max < 0 or h_max < 1:
        return report
    found = scan_columns(_theorem2_scan, xmin, xmax, jobs, cap, lower, upper, y_max, h_max)
    close_report(
        report,
        found,
        (y_max + 1) * h_max * width,
        lambda key: (key[0] * h_max + (key[1] - 1)) * width + (key[2] - xmin),
    )
    return report


def iterate_scaling(t: Triangle, times: int) -> Triangle:
    for _ in range(times):
        t = scale_triangle(t)
    return t


def rescaled_cells(t: Triangle, n: int, params: RuleParams) -> frozenset[RationalPoint]:
    """Cells of t drawn in a level-n diagram, as points of the level-0 plane."""
    scale = 2**n
    return frozenset(
        (Fraction(column, scale), Fraction(level, scale))
        for level, lo, hi in triangle_rows(t, params)
        for column in range(lo, hi + 1)
    )


@dataclass(frozen=True)
class LimitTriangle:
    vertex: RationalPoint
    leg: Fraction

    def to_dict(self) -> dict[str, object]:
        return {"vertex": [str(self.vertex[0]), str(self.vertex[1])], "leg": str(self.leg)}


def limit_triangle(t: Triangle) -> LimitTriangle:
    """Real right triangle with legs h+1 and its right angle at (x, y-1)."""
    return LimitTriangle(vertex=(Fraction(t.x), Fraction(t.y - 1)), leg=Fraction(t.h + 1))


def rescaled_leg(h: int, n: int) -> Fraction:
    return Fraction(2**n * (h + 1) - 1, 2**n)


def rescaled_vertex(t: Triangle, n: int) -> RationalPoint:
    """Lower-right cell of the n-times scaled triangle, in level-0 coordinates."""
    scaled = iterate_scaling(t, n)
    return Fraction(scaled.x, 2**n), Fraction(scaled.y, 2**n)
