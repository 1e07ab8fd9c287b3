from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ca.errors import IllegalPositionError, TapeFormatError
from ca.params import RuleParams
from ca.tape import Tape


@dataclass(frozen=True)
class Board:
    """Game parameters plus the terminal row, whose 1-cells are the obstacles."""

    params: RuleParams
    level0: Tape

    def obstacles_in(self, lo: int, hi: int) -> int:
        return int(self.level0.read(lo, hi).sum())

    def has_obstacles(self) -> bool:
        return self.level0.length > 0 or self.level0.left_fill == 1 or self.level0.right_fill == 1

    def require_obstacles(self) -> None:
        if not self.has_obstacles():
            raise IllegalPositionError("the terminal level needs at least one obstacle")

    def shifted(self, k: int) -> Board:
        return Board(self.params, self.level0.shifted(k))

    def to_text(self) -> str:
        return f"{self.params.header()}\n{self.level0.to_text()}\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def parse(cls, text: str) -> Board:
        lines = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
        if len(lines) != 2:
            raise TapeFormatError(f"board file needs a params line and a tape line, got {len(lines)} lines")
        return cls(params=RuleParams.parse(lines[0]), level0=Tape.parse(lines[1]))

    @classmethod
    def load(cls, path: Path | str) -> Board:
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Path | str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.to_text(), encoding="utf-8")
        return target


def random_board(params: RuleParams, rng: np.random.Generator, max_width: int = 12, origin: int = -6) -> Board:
    """Board with a random obstacle core of width 1..max_width holding at least one obstacle."""
    width = int(rng.integers(1, max_width + 1))
    bits = rng.integers(0, 2, size=width, dtype=np.uint8)
    bits[int(rng.integers(0, width))] = 1
    return Board(params, Tape.from_bits(origin, bits))
