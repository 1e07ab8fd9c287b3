from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ca.errors import ParameterError
from ca.params import RuleParams

TRUTH_TABLE_MAX_DELTA = 20
WOLFRAM_TARGET = 110


def truth_table(params: RuleParams) -> tuple[int, ...]:
    """Update output for every w1 pattern.

    Entry ``p`` is the output for the pattern whose binary digits, most significant
    first, are the w1 cells read left to right (Wolfram's neighbourhood order).
    """
    if params.delta > TRUTH_TABLE_MAX_DELTA:
        raise ParameterError(f"truth table limited to delta <= {TRUTH_TABLE_MAX_DELTA}, got {params.delta}")
    patterns = np.arange(1 << params.delta, dtype=np.uint32)
    inner_mask = np.uint32(((1 << params.gamma) - 1) << params.right)
    zeros_full = params.delta - np.bitwise_count(patterns).astype(np.int64)
    zeros_inner = params.gamma - np.bitwise_count(patterns & inner_mask).astype(np.int64)
    out = ~((zeros_inner == params.gamma) | (zeros_full <= params.block))
    return tuple(int(bit) for bit in out)


def rule_number(table: tuple[int, ...]) -> int:
    return sum(bit << index for index, bit in enumerate(table))


def wolfram_table(rule: int) -> tuple[int, ...]:
    return tuple((rule >> index) & 1 for index in range(8))


def _mirror(table: tuple[int, ...]) -> tuple[int, ...]:
    def flip(p: int) -> int:
        return ((p & 1) << 2) | (p & 2) | ((p >> 2) & 1)

    return tuple(table[flip(p)] for p in range(8))


def _complement(table: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(1 - table[7 - p] for p in range(8))


@dataclass
class RuleComparison:
    params: RuleParams
    table: tuple[int, ...]
    target: int = WOLFRAM_TARGET
    variants: dict[str, int] = field(default_factory=dict)

    @property
    def matches(self) -> list[str]:
        return [name for name, number in self.variants.items() if number == self.target]

    def to_dict(self) -> dict:
        return {
            "params": self.params.label(),
            "table": "".join(str(bit) for bit in self.table),
            "target_rule": self.target,
            "target_table": "".join(str(bit) for bit in wolfram_table(self.target)),
            "variants": self.variants,
            "matches": self.matches,
        }


def compare_with_wolfram(params: RuleParams, target: int = WOLFRAM_TARGET) -> RuleComparison:
    """Compare a three-cell parametrization with an elementary rule under the usual symmetries."""
    if params.delta != 3:
        raise ParameterError(f"elementary rule comparison needs delta = 3, got {params.delta}")
    table = truth_table(params)
    variants = {
        "direct": rule_number(table),
        "mirror": rule_number(_mirror(table)),
        "complement": rule_number(_complement(table)),
        "mirror_complement": rule_number(_mirror(_complement(table))),
    }
    return RuleComparison(params=params, table=table, target=target, variants=variants)
