from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ca.errors import DiagramRangeError, ParameterError
from ca.kernel import step
from ca.params import RuleParams
from ca.tape import Tape

logger = logging.getLogger(__name__)

Kernel = Callable[[Tape, RuleParams], Tape]


@dataclass(frozen=True)
class Diagram:
    params: RuleParams
    rows: tuple[Tape, ...]

    @property
    def steps(self) -> int:
        return len(self.rows) - 1

    def row(self, t: int) -> Tape:
        if not 0 <= t <= self.steps:
            raise DiagramRangeError(f"row {t} outside computed rows 0..{self.steps}")
        return self.rows[t]

    def cell(self, x: int, t: int) -> int:
        return self.row(t).get(x)

    def window(self, lo: int, hi: int, t_max: int | None = None) -> np.ndarray:
        """Cells over [lo, hi] for rows 0..t_max; array row i is time t=i."""
        last = self.steps if t_max is None else t_max
        if last > self.steps:
            raise DiagramRangeError(f"row {last} outside computed rows 0..{self.steps}")
        return np.vstack([self.rows[t].read(lo, hi) for t in range(last + 1)])


def evolve(init: Tape, params: RuleParams, steps: int, kernel: Kernel = step) -> Diagram:
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}")
    rows = [init]
    for t in range(1, steps + 1):
        rows.append(kernel(rows[-1], params))
        if t % 1024 == 0:
            logger.debug("evolved %s to t=%d, core width %d", params.label(), t, rows[-1].length)
    return Diagram(params=params, rows=tuple(rows))


def dependency_cone(params: RuleParams, lo: int, hi: int, t: int) -> tuple[int, int]:
    """Initial cells that determine the cells [lo, hi] at time t."""
    return lo - t * params.reach_left, hi + t * params.right


def density_series(diagram: Diagram, lo: int, hi: int) -> list[float]:
    """Fraction of 1-cells per row over [lo, hi]."""
    width = hi - lo + 1
    if width <= 0:
        raise ParameterError(f"empty x-range [{lo}, {hi}]")
    return [float(row.read(lo, hi).sum()) / width for row in diagram.rows]
