from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ca.diagram import Diagram
from ca.errors import ParameterError
from ca.tape import Tape
from fractal.doubling import DoublingRun, run_doubling
from fractal.scaling import RationalPoint

logger = logging.getLogger(__name__)


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class StarRecord:
    n: int
    x: int
    t: int

    @property
    def position(self) -> RationalPoint:
        scale = 2**self.n
        return Fraction(self.x, scale), Fraction(self.t, scale)

    def to_dict(self) -> dict[str, object]:
        px, py = self.position
        return {"n": self.n, "raw": [self.x, self.t], "position": [fraction_text(px), fraction_text(py)]}


def find_stars(diagram: Diagram, row: int, n: int = 0) -> list[StarRecord]:
    """0-cells whose left and right neighbours on the same row are both 1."""
    tape = diagram.row(row)
    if tape.is_constant():
        return []
    lo, hi = tape.origin - 1, tape.end
    cells = tape.read(lo - 1, hi + 1)
    mask = (cells[1:-1] == 0) & (cells[:-2] == 1) & (cells[2:] == 1)
    return [StarRecord(n=n, x=lo + int(i), t=row) for i in np.flatnonzero(mask)]


def birth_initial(left: int, right: int, alpha: int, run_length: int | None = None) -> Tape:
    """Zeros everywhere except 1s on [alpha+1, alpha+run_length]; default length L+R+1."""
    length = left + right + 1 if run_length is None else run_length
    bits = np.zeros(length + 2, dtype=np.uint8)
    bits[1 : length + 1] = 1
    return Tape.from_bits(alpha, bits)


def birth_star_cell(alpha: int, left: int, mu: int) -> tuple[int, int]:
    """Where the doubled diagram grows its single 0 above a run of exactly L+R+1 ones at level mu-2."""
    return 2 * alpha + 2 * left + 3, 2 * mu - 3


def stated_birth_cell(alpha: int, left: int, mu: int) -> tuple[int, int]:
    return 2 * alpha + 2 * left + 4, 2 * mu - 3


@dataclass
class BirthResult:
    left: int
    right: int
    alpha: int
    expected: tuple[int, int]
    stated: tuple[int, int]
    stars_exact: list[StarRecord]
    stars_short: list[StarRecord]

    @property
    def holds(self) -> bool:
        return [(s.x, s.t) for s in self.stars_exact] == [self.expected] and not self.stars_short

    def to_dict(self) -> dict[str, object]:
        return {
            "L": self.left,
            "R": self.right,
            "alpha": self.alpha,
            "expected_cell": list(self.expected),
            "stated_cell": list(self.stated),
            "stars_exact_run": [s.to_dict() for s in self.stars_exact],
            "stars_short_run": [s.to_dict() for s in self.stars_short],
            "holds": self.holds,
        }


def birth_check(left: int, right: int, alpha: int = 0) -> BirthResult:
    """Put the run on row 0 (mu = 2) and look for stars one row up in the doubled diagram."""
    mu = 2
    exact = run_doubling(birth_initial(left, right, alpha), left, right, n_max=1, steps=1)
    short = run_doubling(birth_initial(left, right, alpha, left + right), left, right, n_max=1, steps=1)
    star_row = 2 * mu - 3
    return BirthResult(
        left=left,
        right=right,
        alpha=alpha,
        expected=birth_star_cell(alpha, left, mu),
        stated=stated_birth_cell(alpha, left, mu),
        stars_exact=find_stars(exact.levels[1], star_row, n=1),
        stars_short=find_stars(short.levels[1], star_row, n=1),
    )


def descendant_cell(x: int, t: int) -> tuple[int, int]:
    """Raw cell of a star's copy one doubling later."""
    return 2 * x + 1, 2 * t + 1


def closed_form_point(alpha: Fraction | int, left: int, y: Fraction | int, n: int) -> RationalPoint:
    return Fraction(alpha) + 2 * left + Fraction(2, 2**n), Fraction(y) - Fraction(3 * 2**n - 3, 2**n)


def closed_form_limit(alpha: Fraction | int, left: int, y: Fraction | int) -> RationalPoint:
    return Fraction(alpha) + 2 * left, Fraction(y) - 3


def closed_form_cell(alpha: Fraction | int, left: int, y: Fraction | int, n: int) -> tuple[Fraction, Fraction]:
    """The closed-form point in level-n raw coordinates."""
    px, py = closed_form_point(alpha, left, y, n)
    return px * 2**n, py * 2**n


def fit_closed_form(seed: StarRecord, left: int) -> tuple[Fraction, Fraction]:
    """alpha and y that put the closed-form sequence through ``seed`` at its own level."""
    scale = 2**seed.n
    alpha = Fraction(seed.x - 2, scale) - 2 * left
    y = Fraction(seed.t + 3 * scale - 3, scale)
    return alpha, y


def search_cell(x: int, t: int) -> tuple[int, int]:
    """Where the closed-form recurrence puts the next star: x -> 2x-2, t -> 2t-3."""
    return 2 * x - 2, 2 * t - 3


def _distance(a: RationalPoint, b: RationalPoint) -> Fraction:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _ratios(distances: list[Fraction]) -> list[Fraction | None]:
    return [b / a if a else None for a, b in zip(distances, distances[1:])]


def _cell_gap(star: StarRecord, cell: tuple[int, int]) -> int:
    return max(abs(star.x - cell[0]), abs(star.t - cell[1]))


def stars_near(diagram: Diagram, cell: tuple[int, int], n: int, radius: int = 1) -> list[StarRecord]:
    """Stars within ``radius`` of ``cell`` on both axes, nearest first."""
    cx, ct = cell
    found = [
        s
        for row in range(max(ct - radius, 0), min(ct + radius, diagram.steps) + 1)
        for s in find_stars(diagram, row, n=n)
        if abs(s.x - cx) <= radius
    ]
    return sorted(found, key=lambda s: (_cell_gap(s, cell), s.t, s.x))


@dataclass
class LineageStep:
    n: int
    star: StarRecord | None
    searched: tuple[int, int] | None
    predicted: tuple[Fraction, Fraction]
    distance: Fraction | None
    candidates: int = 1

    @property
    def agrees_with_closed_form(self) -> bool | None:
        if self.star is None:
            return None
        return (self.star.x, self.star.t) == self.predicted

    @property
    def offset(self) -> tuple[Fraction, Fraction] | None:
        """Detected minus predicted raw cell."""
        if self.star is None:
            return None
        return self.star.x - self.predicted[0], self.star.t - self.predicted[1]

    def to_dict(self) -> dict[str, object]:
        return {
            "n": self.n,
            "star": self.star.to_dict() if self.star else None,
            "searched_cell": list(self.searched) if self.searched else None,
            "predicted_cell": [fraction_text(v) for v in self.predicted],
            "offset": [fraction_text(v) for v in self.offset] if self.offset else None,
            "agrees_with_closed_form": self.agrees_with_closed_form,
            "distance_to_limit": fraction_text(self.distance) if self.distance is not None else None,
            "candidates": self.candidates,
        }


@dataclass
class ConvergenceReport:
    seed: StarRecord
    alpha: Fraction
    y: Fraction
    limit: RationalPoint
    steps: list[LineageStep] = field(default_factory=list)
    lost_at: int | None = None
    lost_reason: str | None = None

    @property
    def stars(self) -> list[StarRecord]:
        return [s.star for s in self.steps if s.star is not None]

    @property
    def ratios(self) -> list[Fraction | None]:
        return _ratios([s.distance for s in self.steps if s.distance is not None])

    @property
    def observed_limit(self) -> RationalPoint | None:
        """Extrapolated from the first two stars, assuming each step halves the last."""
        if len(self.stars) < 2:
            return None
        (x0, t0), (x1, t1) = self.stars[0].position, self.stars[1].position
        return 2 * x1 - x0, 2 * t1 - t0

    @property
    def halves_toward_observed(self) -> bool:
        target = self.observed_limit
        if target is None:
            return False
        ratios = _ratios([_distance(s.position, target) for s in self.stars])
        return all(r == Fraction(1, 2) for r in ratios)

    def to_dict(self) -> dict[str, object]:
        observed = self.observed_limit
        return {
            "seed": self.seed.to_dict(),
            "alpha": fraction_text(self.alpha),
            "y": fraction_text(self.y),
            "closed_form_limit": [fraction_text(v) for v in self.limit],
            "observed_limit": [fraction_text(v) for v in observed] if observed else None,
            "halves_toward_observed": self.halves_toward_observed,
            "ratios": [fraction_text(r) if r is not None else None for r in self.ratios],
            "lost_at": self.lost_at,
            "lost_reason": self.lost_reason,
            "steps": [s.to_dict() for s in self.steps],
        }


def star_limit_check(
    run: DoublingRun,
    seed: StarRecord,
    alpha: Fraction | int | None = None,
    y: Fraction | int | None = None,
    radius: int = 1,
) -> ConvergenceReport:
    """Follow newborn stars along the closed-form sequence and measure convergence to its limit.

    alpha and y are fitted to the seed unless both are given. At each level the
    next star is searched within ``radius`` of the recurrence cell of the previous
    detected one; no candidate or a tie for nearest ends the lineage.
    """
    if not 0 <= seed.n <= run.n_max:
        raise ParameterError(f"seed level {seed.n} is not in the run (n_max={run.n_max})")
    if alpha is None or y is None:
        alpha, y = fit_closed_form(seed, run.left)
    alpha, y = Fraction(alpha), Fraction(y)
    limit = closed_form_limit(alpha, run.left, y)
    report = ConvergenceReport(seed=seed, alpha=alpha, y=y, limit=limit)
    report.steps.append(
        LineageStep(
            n=seed.n,
            star=seed,
            searched=None,
            predicted=closed_form_cell(alpha, run.left, y, seed.n),
            distance=_distance(seed.position, limit),
        )
    )

    current = seed
    for n in range(seed.n + 1, run.n_max + 1):
        cell = search_cell(current.x, current.t)
        found = stars_near(run.levels[n], cell, n, radius)
        predicted = closed_form_cell(alpha, run.left, y, n)
        nearest = [s for s in found if _cell_gap(s, cell) == _cell_gap(found[0], cell)]
        if len(nearest) != 1:
            report.lost_at = n
            report.lost_reason = "missing" if not found else "ambiguous"
            logger.warning(
                "star lineage from %s %s at level %d (%d candidates)", seed, report.lost_reason, n, len(found)
            )
            report.steps.append(
                LineageStep(n=n, star=None, searched=cell, predicted=predicted, distance=None, candidates=len(found))
            )
            break
        current = nearest[0]
        report.steps.append(
            LineageStep(
                n=n,
                star=current,
                searched=cell,
                predicted=predicted,
                distance=_distance(current.position, limit),
                candidates=len(found),
            )
        )
    return report


@dataclass
class CopyReport:
    """Persistent copies of one star under (x, t) -> (2x+1, 2t+1)."""

    seed: StarRecord
    limit: RationalPoint
    stars: list[StarRecord] = field(default_factory=list)
    lost_at: int | None = None

    @property
    def halves_exactly(self) -> bool:
        ratios = _ratios([_distance(s.position, self.limit) for s in self.stars])
        return bool(ratios) and all(r == Fraction(1, 2) for r in ratios)

    def to_dict(self) -> dict[str, object]:
        return {
            "seed": self.seed.to_dict(),
            "limit": [fraction_text(v) for v in self.limit],
            "stars": [s.to_dict() for s in self.stars],
            "lost_at": self.lost_at,
            "halves_exactly": self.halves_exactly,
        }


def star_copy_check(run: DoublingRun, seed: StarRecord) -> CopyReport:
    """Each copy moves by 2^-(n+1) on both axes, so the limit is the seed plus 2^-n0 on both."""
    if not 0 <= seed.n <= run.n_max:
        raise ParameterError(f"seed level {seed.n} is not in the run (n_max={run.n_max})")
    offset = Fraction(1, 2**seed.n)
    seed_x, seed_t = seed.position
    report = CopyReport(seed=seed, limit=(seed_x + offset, seed_t + offset), stars=[seed])
    current = seed
    for n in range(seed.n + 1, run.n_max + 1):
        copy = StarRecord(n, *descendant_cell(current.x, current.t))
        if copy.t > run.levels[n].steps or copy not in find_stars(run.levels[n], copy.t, n=n):
            report.lost_at = n
            logger.warning("copy of %s missing at level %d", seed, n)
            break
        report.stars.append(copy)
        current = copy
    return report
