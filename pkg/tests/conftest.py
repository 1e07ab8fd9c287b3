from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from ca.diagram import Diagram, evolve
from ca.params import RuleParams
from ca.tape import SEED, Tape, single_one
from fractal.doubling import layered_initial
from game.board import Board, random_board

ROOT = Path(__file__).resolve().parents[1]
GOLDEN_DIR = ROOT / "tests" / "golden"

RANDOM_BOARD_COUNT = 200


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture(scope="session")
def params_3212() -> RuleParams:
    return RuleParams(3, 2, 1, 2)


@pytest.fixture(scope="session")
def rule60() -> RuleParams:
    return RuleParams(2, 0, 0, 0)


@pytest.fixture(scope="session")
def rule60_diagram(rule60: RuleParams) -> Diagram:
    return evolve(single_one(0), rule60, 63)


@pytest.fixture(scope="session")
def zero_block_boards() -> list[Board]:
    """Seeded boards with block 0, gamma in {2, 3} and left, right <= 2."""
    rng = np.random.default_rng(SEED)
    boards = []
    for _ in range(RANDOM_BOARD_COUNT):
        params = RuleParams(
            gamma=int(rng.integers(2, 4)),
            left=int(rng.integers(0, 3)),
            right=int(rng.integers(0, 3)),
            block=0,
        )
        boards.append(random_board(params, rng))
    return boards


@pytest.fixture(scope="session")
def blocking_counterexample() -> Board:
    return Board(RuleParams(2, 0, 0, 1), single_one(0))


@pytest.fixture(scope="session")
def layered_row() -> Tape:
    return layered_initial()


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--update-golden", action="store_true", default=False, help="rewrite tests/golden from current output")


@pytest.fixture()
def check_golden(request: pytest.FixtureRequest, golden_dir: Path):
    """Compare bytes with a committed golden file, or record it under --update-golden."""
    update = request.config.getoption("--update-golden")

    def check(name: str, payload: bytes) -> None:
        path = golden_dir / name
        if update:
            path.write_bytes(payload)
            return
        if not path.exists():
            pytest.skip(f"golden {name} not recorded yet, run pytest --update-golden")
        assert payload == path.read_bytes(), f"output differs from {path.name}"

    return check
