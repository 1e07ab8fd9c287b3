from __future__ import annotations

import numpy as np
import pytest

from ca.diagram import evolve
from ca.errors import ParameterError, TapeFormatError
from ca.params import RuleParams
from ca.tape import Tape, random_tape, single_one
from cli.models import RunConfig
from export.netpbm import orient, parse_netpbm, pbm_p1, pbm_p4, pgm_p2, write_bytes
from export.tables import (
    density_frame,
    density_summary,
    diagram_frame,
    read_diagram_csv,
    read_header,
    write_diagram_csv,
    write_json,
)


def test_rule60_p1_matches_golden(rule60_diagram, golden_dir):
    grid = orient(rule60_diagram.window(0, 3, 3), "t0-top")
    payload = pbm_p1(grid, ["params gamma=2 left=0 right=0 block=0 orientation t0-top"])
    assert payload == (golden_dir / "rule60_x0-3_t0-3.pbm").read_bytes()


def test_bottom_orientation_is_the_vertical_mirror(rule60_diagram):
    grid = rule60_diagram.window(-4, 12, 10)
    top = orient(grid, "t0-top")
    bottom = orient(grid, "t0-bottom")
    assert np.array_equal(bottom, top[::-1])
    assert np.array_equal(bottom[-1], grid[0])
    with pytest.raises(ParameterError):
        orient(grid, "sideways")


def test_netpbm_payloads_parse_back():
    bits = evolve(random_tape(30, seed=2), RuleParams(2, 1, 1, 1), 9).window(-5, 40)
    for writer, magic in ((pbm_p1, "P1"), (pbm_p4, "P4")):
        parsed_magic, comments, parsed = parse_netpbm(writer(bits, ["hello"]))
        assert parsed_magic == magic
        assert comments == ["hello"]
        assert np.array_equal(parsed, bits)

    grey = np.array([[0, 128], [255, 7]], dtype=np.uint8)
    _, _, parsed = parse_netpbm(pgm_p2(grey))
    assert np.array_equal(parsed, grey)

    with pytest.raises(TapeFormatError):
        parse_netpbm(b"P9\n1 1\n0\n")


def test_p1_rows_wrap_for_plain_readers():
    bits = np.ones((2, 150), dtype=np.uint8)
    text = pbm_p1(bits).decode("ascii")
    body = text.splitlines()[2:]
    assert all(len(line) <= 70 for line in body)
    assert "".join(body) == "1" * 300


def test_empty_payload_is_refused(tmp_path):
    with pytest.raises(ParameterError):
        write_bytes(b"", tmp_path / "empty.pbm")


def test_diagram_csv_round_trip(tmp_path):
    config = RunConfig(command="evolve", gamma=2, left=0, right=1, block=1, steps=6, fmt="csv")
    diagram = evolve(single_one(0), config.rule_params(), config.steps)
    path = write_diagram_csv(diagram, tmp_path / "out" / "diagram.csv", -6, 6, config.header())

    assert path.read_text(encoding="utf-8").startswith("# config {")
    assert RunConfig.from_header(read_header(path)) == config

    frame = read_diagram_csv(path)
    assert list(frame.columns) == ["t", "x", "value"]
    assert len(frame) == 7 * 13
    assert frame.equals(diagram_frame(diagram, -6, 6))
    assert frame[(frame["t"] == 0) & (frame["value"] == 1)]["x"].tolist() == [0]


def test_density_table_and_json(tmp_path):
    diagram = evolve(Tape.constant(1), RuleParams(2, 4, 4, 5), 3)
    frame = density_frame(diagram, -3, 3)
    assert frame["density"].tolist() == [1.0, 0.0, 0.0, 0.0]
    summary = density_summary(frame)
    assert summary == {"rows": 4, "mean_density": 0.25, "max_density": 1.0, "final_density": 0.0}

    target = write_json({"summary": summary}, tmp_path / "density.json")
    assert '"mean_density": 0.25' in target.read_text(encoding="utf-8")
