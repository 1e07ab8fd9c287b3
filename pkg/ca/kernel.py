from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ca.errors import ParameterError
from ca.params import RuleParams
from ca.tape import Tape


@dataclass(frozen=True)
class WindowCounts:
    zeros_inner: int
    zeros_full: int

    def __post_init__(self) -> None:
        if not 0 <= self.zeros_inner <= self.zeros_full:
            raise ParameterError(f"inconsistent window counts {self.zeros_inner}/{self.zeros_full}")


def window_counts(tape: Tape, x: int, params: RuleParams) -> WindowCounts:
    """Zeros in w0 = [x-gamma+1, x] and w1 = [x-gamma+1-left, x+right]."""
    full = tape.read(x - params.reach_left, x + params.right)
    inner = full[params.left : params.left + params.gamma]
    return WindowCounts(
        zeros_inner=int(params.gamma - inner.sum()),
        zeros_full=int(params.delta - full.sum()),
    )


def rule_output(zeros_inner: int, zeros_full: int, params: RuleParams) -> int:
    if zeros_inner == params.gamma or zeros_full <= params.block:
        return 0
    return 1


def update_cell(tape: Tape, x: int, params: RuleParams) -> int:
    counts = window_counts(tape, x, params)
    return rule_output(counts.zeros_inner, counts.zeros_full, params)


def zero_counts(tape: Tape, lo: int, hi: int, params: RuleParams) -> tuple[np.ndarray, np.ndarray]:
    """Window zero counts for every x in [lo, hi] from one pass of running sums.

    Each count is a difference of two prefix sums, so the work per cell is constant
    whatever the window widths are.
    """
    if hi < lo:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    cells = tape.read(lo - params.reach_left, hi + params.right)
    prefix = np.zeros(cells.size + 1, dtype=np.int64)
    np.cumsum(1 - cells.astype(np.int64), out=prefix[1:])

    width = hi - lo + 1
    idx = np.arange(width)
    zeros_full = prefix[idx + params.delta] - prefix[idx]
    inner_lo = idx + params.left
    zeros_inner = prefix[inner_lo + params.gamma] - prefix[inner_lo]
    return zeros_inner, zeros_full


def _active_range(tape: Tape, params: RuleParams) -> tuple[int, int]:
    # Outside this range the full window lies in a single fill, which always maps to 0.
    return tape.origin - params.right, tape.end + params.reach_left - 1


def step(tape: Tape, params: RuleParams) -> Tape:
    """Next row, computed over the packed row with vectorized window sums."""
    if tape.is_constant():
        return Tape.constant(0)
    lo, hi = _active_range(tape, params)
    zeros_inner, zeros_full = zero_counts(tape, lo, hi, params)
    out = ~((zeros_inner == params.gamma) | (zeros_full <= params.block))
    return Tape.from_bits(lo, out.astype(np.uint8))


def step_naive(tape: Tape, params: RuleParams) -> Tape:
    """Cell-by-cell reference kernel; same contract as :func:`step`."""
    if tape.is_constant():
        return Tape.constant(0)
    lo, hi = _active_range(tape, params)
    bits = [update_cell(tape, x, params) for x in range(lo, hi + 1)]
    return Tape.from_bits(lo, bits)
