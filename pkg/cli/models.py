from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from ca.errors import ParameterError
from ca.params import RuleParams
from ca.tape import SEED, Tape, random_tape, single_one, step_tape
from fractal.doubling import layered_initial
from game.geometry import Triangle, WindowMode

InitKind = Literal["single1", "step", "random", "file", "layered"]
OutputFormat = Literal["pbm", "p4", "csv", "json", "ppm", "pgm"]
Orientation = Literal["t0-bottom", "t0-top"]


def read_tape_file(path: Path | str) -> Tape:
    """First non-comment line of a tape file."""
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            return Tape.parse(line)
    raise ParameterError(f"no tape line in {path}")


class RunConfig(BaseModel):
    """Everything that determines a run's output bytes; echoed into every header."""

    command: str
    gamma: int = Field(default=2, ge=2)
    left: int = Field(default=0, ge=0)
    right: int = Field(default=1, ge=0)
    block: int = Field(default=0, ge=0)
    init: InitKind = "single1"
    init_path: str | None = None
    seed: int = SEED
    width: int = Field(default=64, ge=1)
    step_at: int = 1
    steps: int = Field(default=64, ge=0)
    xmin: int | None = None
    xmax: int | None = None
    n_max: int = Field(default=0, ge=0)
    levels: list[int] = Field(default_factory=list)
    fmt: OutputFormat = "pbm"
    window_mode: WindowMode = WindowMode.ANCHORED
    orientation: Orientation = "t0-bottom"

    @field_validator("levels")
    @classmethod
    def validate_levels(cls, v: list[int]) -> list[int]:
        if any(n < 0 for n in v):
            raise ValueError(f"levels must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def validate_run(self) -> RunConfig:
        self.rule_params()
        if self.init == "file" and not self.init_path:
            raise ValueError("init=file needs init_path")
        if (self.xmin is None) != (self.xmax is None):
            raise ValueError("give both xmin and xmax or neither")
        if self.xmin is not None and self.xmax is not None and self.xmax < self.xmin:
            raise ValueError(f"empty x-range [{self.xmin}, {self.xmax}]")
        return self

    def rule_params(self) -> RuleParams:
        return RuleParams(self.gamma, self.left, self.right, self.block)

    def initial(self) -> Tape:
        if self.init == "single1":
            return single_one(0)
        if self.init == "step":
            return step_tape(self.step_at)
        if self.init == "random":
            return random_tape(self.width, self.seed)
        if self.init == "layered":
            return layered_initial()
        return read_tape_file(self.init_path or "")

    def x_range(self, tape: Tape) -> tuple[int, int]:
        """Explicit range, or the light cone of the initial core over ``steps`` rows."""
        if self.xmin is not None and self.xmax is not None:
            return self.xmin, self.xmax
        params = self.rule_params()
        lo = tape.origin - self.steps * params.right
        hi = max(tape.end - 1, tape.origin) + self.steps * params.reach_left
        return lo, hi

    def header(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_header(cls, text: str) -> RunConfig:
        return cls.model_validate_json(text)


class TriangleModel(BaseModel):
    x: int
    y: int = Field(..., ge=0)
    h: int = Field(..., ge=1)

    def to_triangle(self) -> Triangle:
        return Triangle(y=self.y, h=self.h, x=self.x)


class SolveRequest(BaseModel):
    board_path: str = Field(..., min_length=1)
    triangle: TriangleModel
    window_mode: WindowMode = WindowMode.ANCHORED


class SolveResponse(BaseModel):
    params: str
    board_digest: str
    window_mode: WindowMode
    triangle: TriangleModel
    outcome: Literal["N", "P"]
    witness_window: list[int] | None = None
    good_cells: list[int] | None = None
    memo_size: int = Field(default=0, ge=0)
