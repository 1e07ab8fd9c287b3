from __future__ import annotations

import re
from dataclasses import dataclass

from ca.errors import ParameterError

_FIELD_RE = re.compile(r"(gamma|left|right|block)=(-?\d+)")


@dataclass(frozen=True)
class RuleParams:
    """The quadruple (gamma, left, right, block), shared by the automaton and the game.

    The game reads the same numbers as (γ, ℓ, r, b); ``delta`` is derived and never stored.
    """

    gamma: int
    left: int
    right: int
    block: int

    def __post_init__(self) -> None:
        if self.gamma < 2:
            raise ParameterError(f"gamma must be >= 2, got {self.gamma}")
        if self.left < 0 or self.right < 0 or self.block < 0:
            raise ParameterError(
                f"left, right and block must be >= 0, got ({self.left}, {self.right}, {self.block})"
            )
        if self.delta <= self.block:
            raise ParameterError(
                f"delta = gamma+left+right = {self.delta} must exceed block = {self.block}"
            )

    @property
    def delta(self) -> int:
        return self.gamma + self.left + self.right

    @property
    def reach_left(self) -> int:
        """Cells to the left of x read by the full window w1."""
        return self.gamma - 1 + self.left

    def label(self) -> str:
        return f"({self.gamma},{self.left},{self.right},{self.block})"

    def header(self) -> str:
        return f"gamma={self.gamma} left={self.left} right={self.right} block={self.block}"

    @classmethod
    def parse(cls, text: str) -> RuleParams:
        found = dict(_FIELD_RE.findall(text))
        missing = {"gamma", "left", "right", "block"} - set(found)
        if missing:
            raise ParameterError(f"params line is missing {sorted(missing)}: {text!r}")
        return cls(
            gamma=int(found["gamma"]),
            left=int(found["left"]),
            right=int(found["right"]),
            block=int(found["block"]),
        )
