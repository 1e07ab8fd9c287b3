from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from ca.diagram import Diagram, evolve
from correspondence.safety import ca_safe, lemma1_witness
from game.board import Board
from game.geometry import Triangle, WindowMode
from game.solver import BlockingSolver, Outcome

logger = logging.getLogger(__name__)

DEFAULT_MISMATCH_CAP = 16


@dataclass(frozen=True)
class Mismatch:
    key: tuple[int, ...]
    subject: str
    verdicts: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"subject": self.subject, **self.verdicts}


@dataclass
class EquivalenceReport:
    check: str
    params: str
    board_digest: str | None
    window_mode: str | None
    region: dict[str, int]
    positions_checked: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)
    truncated: bool = False
    cap: int = DEFAULT_MISMATCH_CAP

    @property
    def ok(self) -> bool:
        return not self.mismatches

    @property
    def minimal_counterexample(self) -> Mismatch | None:
        return min(self.mismatches, key=lambda m: m.key) if self.mismatches else None

    def to_dict(self) -> dict[str, Any]:
        minimal = self.minimal_counterexample
        return {
            "check": self.check,
            "params": self.params,
            "board_digest": self.board_digest,
            "window_mode": self.window_mode,
            "region": self.region,
            "positions_checked": self.positions_checked,
            "mismatch_count": len(self.mismatches),
            "truncated": self.truncated,
            "minimal_counterexample": minimal.to_dict() if minimal else None,
            "mismatches": [m.to_dict() for m in self.mismatches],
        }


def serialize_report_json(report: EquivalenceReport) -> str:
    return json.dumps(report.to_dict(), indent=2)


def render_report_markdown(report: EquivalenceReport) -> str:
    lines = [
        f"# {report.check} report",
        "",
        f"- Params: {report.params}",
        f"- Board digest: {report.board_digest or 'n/a'}",
        f"- Window mode: {report.window_mode or 'n/a'}",
        f"- Region: {', '.join(f'{k}={v}' for k, v in report.region.items())}",
        f"- Positions checked: **{report.positions_checked}**",
        f"- Mismatches: **{len(report.mismatches)}**{' (stream truncated at cap)' if report.truncated else ''}",
        "",
        "## Mismatches",
    ]
    if not report.mismatches:
        lines.append("- None detected.")
    for mismatch in sorted(report.mismatches, key=lambda m: m.key):
        details = ", ".join(f"{k}={v}" for k, v in mismatch.verdicts.items())
        lines.append(f"- {mismatch.subject}: {details}")
    return "\n".join(lines)


def _theorem1_scan(
    xmin: int,
    xmax: int,
    board: Board,
    y_max: int,
    h_max: int,
    window_mode: WindowMode,
    cap: int,
) -> list[Mismatch]:
    diagram = evolve(board.level0, board.params, y_max + h_max - 1)
    solver = BlockingSolver(board, window_mode)
    found: list[Mismatch] = []
    for y in range(1, y_max + 1):
        for h in range(1, h_max + 1):
            for x in range(xmin, xmax + 1):
                t = Triangle(y=y, h=h, x=x)
                game = solver.outcome(t)
                safe = ca_safe(t, diagram)
                if (game is Outcome.P) != safe:
                    found.append(
                        Mismatch(
                            key=(y, h, x),
                            subject=str(t),
                            verdicts={"game_outcome": game.value, "ca_safe": safe},
                        )
                    )
                    logger.info("theorem-1 mismatch at %s: game %s, ca_safe %s", t, game.value, safe)
                    if len(found) >= cap:
                        return found
    logger.debug("scanned x=%d..%d, solver memo %d", xmin, xmax, solver.memo_size)
    return found


def _chunks(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    total = hi - lo + 1
    parts = max(1, min(parts, total))
    bounds = [lo + (total * i) // parts for i in range(parts + 1)]
    return [(bounds[i], bounds[i + 1] - 1) for i in range(parts)]


def scan_columns(
    scan: Callable[..., list[Mismatch]],
    xmin: int,
    xmax: int,
    jobs: int,
    cap: int,
    *args: Any,
) -> list[Mismatch]:
    """Run ``scan(lo, hi, *args, cap)`` over x-chunks and keep the first ``cap`` mismatches by key.

    Keys must end in x, so each chunk's stream is the serial stream restricted to
    its columns and the merge does not depend on ``jobs``.
    """
    if jobs <= 1:
        found = scan(xmin, xmax, *args, cap)
    else:
        chunks = _chunks(xmin, xmax, jobs)
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [pool.submit(scan, lo, hi, *args, cap) for lo, hi in chunks]
            found = [m for future in futures for m in future.result()]
    return sorted(found, key=lambda m: m.key)[:cap]


def close_report(
    report: EquivalenceReport,
    found: list[Mismatch],
    total: int,
    position: Callable[[tuple[int, ...]], int],
) -> None:
    """Store merged mismatches; a capped stream counts positions up to its last mismatch."""
    report.mismatches = found
    if len(found) >= report.cap:
        report.truncated = True
        report.positions_checked = position(found[-1].key) + 1
        logger.warning("%s mismatch stream truncated at cap %d", report.check, report.cap)
    else:
        report.positions_checked = total


def theorem1_verify(
    board: Board,
    xmin: int,
    xmax: int,
    y_max: int,
    h_max: int,
    window_mode: WindowMode = WindowMode.ANCHORED,
    cap: int = DEFAULT_MISMATCH_CAP,
    jobs: int = 1,
) -> EquivalenceReport:
    """Game outcome P against CA-safety for every T(x, y, h) in the region, 1 <= y <= y_max."""
    mode = WindowMode(window_mode)
    report = EquivalenceReport(
        check="theorem1",
        params=board.params.label(),
        board_digest=board.digest(),
        window_mode=mode.value,
        region={"xmin": xmin, "xmax": xmax, "ymax": y_max, "hmax": h_max},
        cap=cap,
    )
    width = xmax - xmin + 1
    if width <= 0 or y_max < 1 or h_max < 1:
        return report

    # Each worker keeps its own solver memo.
    found = scan_columns(_theorem1_scan, xmin, xmax, jobs, cap, board, y_max, h_max, mode)
    close_report(
        report,
        found,
        y_max * h_max * width,
        lambda key: ((key[0] - 1) * h_max + (key[1] - 1)) * width + (key[2] - xmin),
    )
    logger.info(
        "theorem-1 %s on %s: %d positions, %d mismatches",
        board.params.label(),
        board.digest(),
        report.positions_checked,
        len(found),
    )
    return report


def _lemma1_scan(xmin: int, xmax: int, diagram: Diagram, t_min: int, t_max: int, cap: int) -> list[Mismatch]:
    found: list[Mismatch] = []
    for t in range(t_min, t_max + 1):
        for x in range(xmin, xmax + 1):
            value = diagram.cell(x, t)
            witness = lemma1_witness(x, t, diagram)
            if (value == 0) != (witness is not None):
                found.append(Mismatch(key=(t, x), subject=f"({x},{t})", verdicts={"ca": value, "safe_height": witness}))
                if len(found) >= cap:
                    return found
    return found


def lemma1_sweep(
    diagram: Diagram,
    xmin: int,
    xmax: int,
    t_max: int,
    t_min: int = 1,
    cap: int = DEFAULT_MISMATCH_CAP,
    board_digest: str | None = None,
    jobs: int = 1,
) -> EquivalenceReport:
    report = EquivalenceReport(
        check="lemma1",
        params=diagram.params.label(),
        board_digest=board_digest,
        window_mode=None,
        region={"xmin": xmin, "xmax": xmax, "tmin": t_min, "tmax": t_max},
        cap=cap,
    )
    width = xmax - xmin + 1
    if width <= 0 or t_max < t_min:
        return report
    found = scan_columns(_lemma1_scan, xmin, xmax, jobs, cap, diagram, t_min, t_max)
    close_report(report, found, (t_max - t_min + 1) * width, lambda key: (key[0] - t_min) * width + (key[1] - xmin))
    return report
