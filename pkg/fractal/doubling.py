from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ca.diagram import Diagram, evolve
from ca.errors import ParameterError
from ca.params import RuleParams
from ca.tape import Tape, tape_from_ones

logger = logging.getLogger(__name__)

LAYERED_ONES = (0, 5, 6, 7, 8, 9, 11)


def double_bits(tape: Tape) -> Tape:
    """I'(2x) = I'(2x+1) = I(x)."""
    return Tape.from_bits(2 * tape.origin, np.repeat(tape.core_bits(), 2), tape.left_fill, tape.right_fill)


def undouble(tape: Tape, parity: int = 0) -> Tape:
    """Read cells 2x+parity back into cell x."""
    if parity not in (0, 1):
        raise ParameterError(f"parity must be 0 or 1, got {parity}")
    lo = (tape.origin - parity) // 2 - 1
    hi = (tape.end - parity) // 2 + 1
    cells = tape.read(2 * lo + parity, 2 * hi + parity)[::2]
    return Tape.from_bits(lo, cells, tape.left_fill, tape.right_fill)


def layered_initial() -> Tape:
    return tape_from_ones(LAYERED_ONES)


@dataclass(frozen=True)
class DoublingRun:
    left: int
    right: int
    initial: Tape
    levels: tuple[Diagram, ...]

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    def params_at(self, n: int) -> RuleParams:
        return self.levels[n].params

    def initial_at(self, n: int) -> Tape:
        return self.levels[n].rows[0]


def run_doubling(
    initial: Tape,
    left: int,
    right: int,
    n_max: int,
    steps: int,
    steps_fn: Callable[[int], int] | None = None,
    gamma: int = 2,
    block: int = 0,
) -> DoublingRun:
    """Level n evolves I^n under (2, 2^n L, 2^n R, 0) for steps * 2^n rows by default."""
    if gamma != 2 or block != 0:
        raise ParameterError(f"the doubling construction needs gamma=2 and block=0, got gamma={gamma} block={block}")
    if n_max < 0:
        raise ParameterError(f"n_max must be >= 0, got {n_max}")
    rows_for = steps_fn or (lambda n: steps * 2**n)

    levels: list[Diagram] = []
    current = initial
    for n in range(n_max + 1):
        params = RuleParams(2, left * 2**n, right * 2**n, 0)
        levels.append(evolve(current, params, rows_for(n)))
        logger.debug("doubling level %d with %s, %d rows", n, params.label(), rows_for(n))
        current = double_bits(current)
    return DoublingRun(left=left, right=right, initial=initial, levels=tuple(levels))
