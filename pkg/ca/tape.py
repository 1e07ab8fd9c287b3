from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ca.errors import TapeFormatError

SEED = 7

_TAPE_RE = re.compile(
    r"^\s*origin=(?P<origin>-?\d+)\s+left=(?P<left>[01])\s+right=(?P<right>[01])\s+core=(?P<core>[01]*)\s*$"
)


@dataclass(frozen=True)
class Tape:
    """An eventually-constant bi-infinite bit row.

    Cells left of ``origin`` read ``left_fill``, cells at or right of ``origin + length``
    read ``right_fill``. The core is stored packed, eight cells per byte, most
    significant bit first. Build instances with :meth:`from_bits`, which normalizes.
    """

    origin: int
    core: bytes
    length: int
    left_fill: int
    right_fill: int

    def __post_init__(self) -> None:
        if self.left_fill not in (0, 1) or self.right_fill not in (0, 1):
            raise TapeFormatError(f"fills must be bits, got {self.left_fill}/{self.right_fill}")
        if self.length < 0 or len(self.core) != (self.length + 7) // 8:
            raise TapeFormatError(f"packed core of {len(self.core)} bytes cannot hold {self.length} bits")
        if self.length:
            if self._core_bit(0) == self.left_fill or self._core_bit(self.length - 1) == self.right_fill:
                raise TapeFormatError("tape core is not in normal form")
        elif self.left_fill == self.right_fill and self.origin != 0:
            raise TapeFormatError("a constant tape has origin 0")

    @classmethod
    def from_bits(
        cls,
        origin: int,
        bits: Iterable[int] | np.ndarray,
        left_fill: int = 0,
        right_fill: int = 0,
    ) -> Tape:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            arr = arr.reshape(-1)
        if arr.size and arr.max() > 1:
            raise TapeFormatError("tape cells must be 0 or 1")

        if left_fill == right_fill:
            marks = np.flatnonzero(arr != left_fill)
            start = int(marks[0]) if marks.size else arr.size
            stop = int(marks[-1]) + 1 if marks.size else arr.size
        else:
            left_marks = np.flatnonzero(arr != left_fill)
            right_marks = np.flatnonzero(arr != right_fill)
            start = int(left_marks[0]) if left_marks.size else arr.size
            stop = int(right_marks[-1]) + 1 if right_marks.size else 0

        if start >= stop:
            if left_fill == right_fill:
                return cls(0, b"", 0, left_fill, right_fill)
            return cls(origin + start, b"", 0, left_fill, right_fill)

        core = arr[start:stop]
        return cls(origin + start, np.packbits(core).tobytes(), int(core.size), left_fill, right_fill)

    @classmethod
    def constant(cls, fill: int) -> Tape:
        return cls(0, b"", 0, fill, fill)

    @property
    def end(self) -> int:
        return self.origin + self.length

    def _core_bit(self, index: int) -> int:
        return (self.core[index >> 3] >> (7 - (index & 7))) & 1

    def get(self, x: int) -> int:
        if x < self.origin:
            return self.left_fill
        if x >= self.end:
            return self.right_fill
        return self._core_bit(x - self.origin)

    def core_bits(self) -> np.ndarray:
        return np.unpackbits(np.frombuffer(self.core, dtype=np.uint8), count=self.length)

    def read(self, lo: int, hi: int) -> np.ndarray:
        """Cells over the inclusive range [lo, hi] as a uint8 array."""
        if hi < lo:
            return np.zeros(0, dtype=np.uint8)
        out = np.full(hi - lo + 1, self.left_fill, dtype=np.uint8)
        if self.end <= hi:
            out[max(self.end, lo) - lo :] = self.right_fill
        a, b = max(lo, self.origin), min(hi + 1, self.end)
        if a < b:
            first, last = a - self.origin, b - self.origin
            packed = np.frombuffer(self.core, dtype=np.uint8)[first >> 3 : ((last - 1) >> 3) + 1]
            unpacked = np.unpackbits(packed)
            skip = first & 7
            out[a - lo : b - lo] = unpacked[skip : skip + (b - a)]
        return out

    def ones(self) -> list[int]:
        """Positions of 1-cells inside the core (fills are reported by the fill bits)."""
        return [self.origin + int(i) for i in np.flatnonzero(self.core_bits())]

    def popcount(self) -> int:
        return int(np.bitwise_count(np.frombuffer(self.core, dtype=np.uint8)).sum())

    def is_constant(self) -> bool:
        return self.length == 0 and self.left_fill == self.right_fill

    def shifted(self, k: int) -> Tape:
        if self.is_constant():
            return self
        return Tape(self.origin + k, self.core, self.length, self.left_fill, self.right_fill)

    def core_string(self) -> str:
        return "".join("1" if bit else "0" for bit in self.core_bits())

    def to_text(self) -> str:
        return f"origin={self.origin} left={self.left_fill} right={self.right_fill} core={self.core_string()}"

    @classmethod
    def parse(cls, line: str) -> Tape:
        match = _TAPE_RE.match(line)
        if match is None:
            raise TapeFormatError(f"not a tape line: {line!r}")
        core = [int(ch) for ch in match["core"]]
        return cls.from_bits(int(match["origin"]), core, int(match["left"]), int(match["right"]))


def tape_get(tape: Tape, x: int) -> int:
    return tape.get(x)


def tape_from_ones(ones: Iterable[int]) -> Tape:
    positions = sorted(set(int(x) for x in ones))
    if not positions:
        return Tape.constant(0)
    lo = positions[0]
    bits = np.zeros(positions[-1] - lo + 1, dtype=np.uint8)
    bits[[x - lo for x in positions]] = 1
    return Tape.from_bits(lo, bits)


def single_one(x: int = 0) -> Tape:
    return tape_from_ones([x])


def step_tape(threshold: int = 1) -> Tape:
    """1 iff x >= threshold."""
    return Tape(threshold, b"", 0, 0, 1)


def random_tape(width: int, seed: int = SEED, origin: int = 0) -> Tape:
    """Uniform random core of ``width`` cells from numpy's PCG64 ``default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=width, dtype=np.uint8)
    return Tape.from_bits(origin, bits)
