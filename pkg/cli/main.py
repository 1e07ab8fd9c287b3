from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import ValidationError

from ca.diagram import density_series, evolve
from ca.errors import BlockingCAError, ParameterError
from ca.params import RuleParams
from ca.rules import compare_with_wolfram, rule_number, truth_table
from ca.tape import SEED, random_tape, single_one, step_tape
from cli.models import RunConfig, SolveRequest, SolveResponse, TriangleModel
from correspondence.verify import (
    DEFAULT_MISMATCH_CAP,
    EquivalenceReport,
    lemma1_sweep,
    render_report_markdown,
    theorem1_verify,
)
from export.netpbm import orient, pbm_p1, pbm_p4, pgm_p2, ppm_p3, write_bytes
from export.tables import (
    density_frame,
    density_summary,
    diagram_frame,
    read_diagram_csv,
    read_header,
    write_diagram_csv,
    write_frame_csv,
    write_json,
)
from fractal.doubling import run_doubling
from fractal.scaling import theorem2_verify
from fractal.stars import birth_check, find_stars, star_copy_check, star_limit_check
from fractal.superpose import layer_color, superpose
from game.board import Board
from game.geometry import WindowMode
from game.solver import BlockingSolver

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2

GALLERY_RULES = (
    ("ca_2_0_1_1", RuleParams(2, 0, 1, 1), "single1"),
    ("ca_2_1_1_1", RuleParams(2, 1, 1, 1), "single1"),
    ("ca_2_3_3_3", RuleParams(2, 3, 3, 3), "random"),
    ("ca_2_4_4_5", RuleParams(2, 4, 4, 5), "random"),
)
GALLERY_DOUBLING = ((0, 1), (1, 2))
GALLERY_LEVELS = 3


class _ArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting so ``main`` can map usage errors to its own exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise BlockingCAError(f"usage: {message}")


def _levels(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"levels must be comma-separated integers: {text!r}") from exc


def _add_rule_args(p: argparse.ArgumentParser, right: int = 1, with_gamma: bool = True) -> None:
    if with_gamma:
        p.add_argument("--gamma", type=int, default=2)
        p.add_argument("--block", type=int, default=0)
    p.add_argument("--left", "--L", dest="left", type=int, default=0)
    p.add_argument("--right", "--R", dest="right", type=int, default=right)


def _add_init_args(p: argparse.ArgumentParser, default: str = "single1") -> None:
    p.add_argument("--init", choices=["single1", "step", "random", "file", "layered"], default=default)
    p.add_argument("--init-path", dest="init_path")
    p.add_argument("--seed", type=int, default=SEED)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--step-at", dest="step_at", type=int, default=1)


def _add_range_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xmin", type=int)
    p.add_argument("--xmax", type=int)


def _add_output_args(p: argparse.ArgumentParser, formats: list[str], default: str) -> None:
    p.add_argument("--format", dest="fmt", choices=formats, default=default)
    p.add_argument("--out")
    p.add_argument("--orientation", choices=["t0-bottom", "t0-top"], default="t0-bottom")


def _config(command: str, args: argparse.Namespace, **overrides: Any) -> RunConfig:
    fields = {
        name: getattr(args, name)
        for name in RunConfig.model_fields
        if name != "command" and getattr(args, name, None) is not None
    }
    fields.update(overrides)
    return RunConfig(command=command, **fields)


def _print_json(payload: Any) -> None:
    print(json.dumps(payload, indent=2))


def _emit(payload: bytes, out: str | None) -> None:
    if out:
        write_bytes(payload, out)
        logger.info("wrote %d bytes to %s", len(payload), out)
        return
    sys.stdout.flush()
    sys.stdout.buffer.write(payload)
    sys.stdout.buffer.flush()


def _sha256(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def _raster(grid: np.ndarray, fmt: str, comments: list[str]) -> bytes:
    return pbm_p4(grid, comments) if fmt == "p4" else pbm_p1(grid, comments)


def cmd_evolve(args: argparse.Namespace) -> int:
    config = _config("evolve", args)
    tape = config.initial()
    diagram = evolve(tape, config.rule_params(), config.steps)
    xmin, xmax = config.x_range(tape)
    header = config.header()
    logger.info("evolved %s for %d steps over x=[%d, %d]", config.rule_params().label(), config.steps, xmin, xmax)

    if config.fmt in ("pbm", "p4"):
        grid = orient(diagram.window(xmin, xmax), config.orientation)
        _emit(_raster(grid, config.fmt, [f"config {header}", f"x-range {xmin}..{xmax}"]), args.out)
    elif config.fmt == "csv":
        if args.out:
            write_diagram_csv(diagram, args.out, xmin, xmax, header)
        else:
            sys.stdout.write(f"# config {header}\n")
            diagram_frame(diagram, xmin, xmax).to_csv(sys.stdout, index=False)
    else:
        frame = density_frame(diagram, xmin, xmax)
        payload = {
            "config": config.model_dump(mode="json"),
            "x_range": [xmin, xmax],
            "summary": density_summary(frame),
            "density": density_series(diagram, xmin, xmax),
        }
        if args.out:
            write_json(payload, args.out)
        else:
            _print_json(payload)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    header = read_header(args.csv)
    comments = []
    if header is not None:
        RunConfig.from_header(header)
        comments.append(f"config {header}")
    frame = read_diagram_csv(args.csv)
    grid = frame.pivot(index="t", columns="x", values="value").sort_index().sort_index(axis=1)
    bits = grid.to_numpy(dtype=np.uint8)
    _emit(_raster(orient(bits, args.orientation), args.fmt, comments), args.out)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    request = SolveRequest(
        board_path=args.board,
        triangle=TriangleModel(x=args.x, y=args.y, h=args.h),
        window_mode=args.window_mode,
    )
    board = Board.load(request.board_path)
    solver = BlockingSolver(board, request.window_mode)
    result = solver.solve(request.triangle.to_triangle())
    details = result.to_dict()
    response = SolveResponse(
        params=board.params.label(),
        board_digest=board.digest(),
        window_mode=request.window_mode,
        triangle=request.triangle,
        outcome=details["outcome"],
        witness_window=details["witness_window"],
        good_cells=details["good_cells"],
        memo_size=solver.memo_size,
    )
    print(response.model_dump_json(indent=2))
    return EXIT_OK


def _finish_reports(reports: list[EquivalenceReport], markdown: str | None, extra: dict[str, Any] | None = None) -> int:
    if markdown:
        target = Path(markdown)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text("\n\n".join(render_report_markdown(r) for r in reports) + "\n", encoding="utf-8")
    if len(reports) == 1 and not extra:
        _print_json(reports[0].to_dict())
    else:
        _print_json({**(extra or {}), "reports": [r.to_dict() for r in reports]})
    return EXIT_OK if all(r.ok for r in reports) else EXIT_MISMATCH


def cmd_verify_thm1(args: argparse.Namespace) -> int:
    board = Board.load(args.board)
    report = theorem1_verify(
        board,
        args.xmin,
        args.xmax,
        args.ymax,
        args.hmax,
        window_mode=args.window_mode,
        cap=args.cap,
        jobs=args.jobs,
    )
    return _finish_reports([report], args.markdown)


def cmd_verify_lemma1(args: argparse.Namespace) -> int:
    if args.board:
        board = Board.load(args.board)
        params, tape, digest = board.params, board.level0, board.digest()
    else:
        config = _config("verify-lemma1", args, xmin=None, xmax=None)
        params, tape, digest = config.rule_params(), config.initial(), None
    diagram = evolve(tape, params, args.tmax)
    report = lemma1_sweep(
        diagram,
        args.xmin,
        args.xmax,
        args.tmax,
        t_min=args.tmin,
        cap=args.cap,
        board_digest=digest,
        jobs=args.jobs,
    )
    return _finish_reports([report], args.markdown)


def cmd_doubling(args: argparse.Namespace) -> int:
    config = _config("doubling", args, gamma=2, block=0)
    tape = config.initial()
    run = run_doubling(tape, config.left, config.right, config.n_max, config.steps)
    xmin, xmax = config.x_range(tape)
    header = config.header()

    levels: list[dict[str, Any]] = []
    for n, level in enumerate(run.levels):
        factor = 2**n
        lo, hi = xmin * factor, (xmax + 1) * factor - 1
        initial = run.initial_at(n)
        grid = orient(level.window(lo, hi), config.orientation)
        payload = pbm_p1(grid, [f"config {header}", f"level {n} params {level.params.label()}"])
        path = Path(f"{args.out_prefix}_n{n}.pbm")
        write_bytes(payload, path)
        levels.append(
            {
                "n": n,
                "params": level.params.label(),
                "rows": level.steps,
                "x_range": [lo, hi],
                "initial_ones": initial.ones() if initial.left_fill == initial.right_fill == 0 else None,
                "path": str(path),
                "sha256": _sha256(payload),
            }
        )
    manifest = {"config": config.model_dump(mode="json"), "levels": levels}
    write_json(manifest, Path(f"{args.out_prefix}_manifest.json"))
    _print_json(manifest)
    return EXIT_OK


def cmd_verify_thm2(args: argparse.Namespace) -> int:
    config = _config("verify-thm2", args, gamma=2, block=0, xmin=None, xmax=None)
    if config.n_max < 1:
        raise ParameterError(f"verify-thm2 compares level n with n+1, so --n must be >= 1, got {config.n_max}")
    tape = config.initial()
    steps = max(config.steps, args.ymax + args.hmax - 1)
    run = run_doubling(tape, config.left, config.right, config.n_max, steps)
    reports = []
    for n in range(config.n_max):
        factor = 2**n
        reports.append(
            theorem2_verify(
                run,
                n,
                args.xmin * factor,
                (args.xmax + 1) * factor - 1,
                args.ymax,
                args.hmax,
                cap=args.cap,
                jobs=args.jobs,
            )
        )
    return _finish_reports(reports, args.markdown, extra={"config": config.model_dump(mode="json")})


def cmd_stars(args: argparse.Namespace) -> int:
    if args.birth:
        result = birth_check(args.left, args.right, args.alpha or 0)
        _print_json(result.to_dict())
        return EXIT_OK if result.holds else EXIT_MISMATCH

    config = _config("stars", args, gamma=2, block=0)
    run = run_doubling(config.initial(), config.left, config.right, config.n_max, config.steps)
    levels = []
    for n, level in enumerate(run.levels):
        stars = [s for row in range(level.steps + 1) for s in find_stars(level, row, n=n)]
        levels.append(
            {
                "n": n,
                "params": level.params.label(),
                "count": len(stars),
                "stars": [s.to_dict() for s in stars[: args.limit]],
            }
        )
    payload: dict[str, Any] = {"config": config.model_dump(mode="json"), "levels": levels}

    if args.track:
        if not 0 <= args.from_level <= run.n_max:
            raise ParameterError(f"--from-level must be in 0..{run.n_max}, got {args.from_level}")
        level = run.levels[args.from_level]
        seeds = [s for row in range(level.steps + 1) for s in find_stars(level, row, n=args.from_level)]
        if seeds:
            payload["lineage"] = star_limit_check(run, seeds[0], alpha=args.alpha, y=args.y).to_dict()
            payload["copies"] = star_copy_check(run, seeds[0]).to_dict()
        else:
            logger.warning("no star at level %d to track", args.from_level)
            payload["lineage"] = payload["copies"] = None
    _print_json(payload)
    return EXIT_OK


def cmd_superpose(args: argparse.Namespace) -> int:
    levels = args.levels or [0, 1]
    config = _config("superpose", args, gamma=2, block=0, levels=levels, n_max=max(levels))
    tape = config.initial()
    run = run_doubling(tape, config.left, config.right, config.n_max, config.steps)
    xmin, xmax = config.x_range(tape)
    t_max = config.steps if args.tmax is None else args.tmax
    image = superpose(run, levels, xmin, xmax, t_max)

    comments = [f"config {config.header()}"]
    if config.fmt == "pgm":
        payload = pgm_p2(orient(image.grey(), config.orientation), comments)
    else:
        palette = ", ".join(f"n={n}:{layer_color(n)}" for n in levels)
        payload = ppm_p3(orient(image.rgb(), config.orientation), comments + [f"palette {palette}"])
    _emit(payload, args.out)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    config = _config("stats", args)
    tape = config.initial()
    diagram = evolve(tape, config.rule_params(), config.steps)
    xmin, xmax = config.x_range(tape)
    frame = density_frame(diagram, xmin, xmax)
    if args.out:
        write_frame_csv(frame, args.out, config.header())
    _print_json(
        {
            "config": config.model_dump(mode="json"),
            "x_range": [xmin, xmax],
            "summary": density_summary(frame),
            "density": [round(v, 6) for v in frame["density"].tolist()],
        }
    )
    return EXIT_OK


def cmd_truth_table(args: argparse.Namespace) -> int:
    params = RuleParams(args.gamma, args.left, args.right, args.block)
    table = truth_table(params)
    payload: dict[str, Any] = {
        "params": params.label(),
        "delta": params.delta,
        "table": "".join(str(bit) for bit in table),
        "rule_number": rule_number(table),
    }
    if params.delta == 3:
        payload["elementary"] = compare_with_wolfram(params).to_dict()
    _print_json(payload)
    return EXIT_OK


def cmd_gallery(args: argparse.Namespace) -> int:
    size = args.size
    out_dir = Path(args.out_dir)
    half = size // 2
    entries: list[dict[str, Any]] = []

    for name, params, init in GALLERY_RULES:
        tape = single_one(0) if init == "single1" else random_tape(size, args.seed)
        lo = -half if init == "single1" else 0
        diagram = evolve(tape, params, size - 1)
        payload = pbm_p4(orient(diagram.window(lo, lo + size - 1), "t0-bottom"), [f"params {params.header()} init {init}"])
        path = write_bytes(payload, out_dir / f"{name}.pbm")
        entries.append({"name": name, "params": params.label(), "init": init, "path": str(path), "sha256": _sha256(payload)})

    for left, right in GALLERY_DOUBLING:
        run = run_doubling(step_tape(1), left, right, GALLERY_LEVELS, size - 1, steps_fn=lambda n: size - 1)
        for n, level in enumerate(run.levels):
            name = f"doubling_{left}_{right}_n{n}"
            grid = orient(level.window(-half, size - half - 1), "t0-bottom")
            payload = pbm_p4(grid, [f"params {level.params.header()} init step"])
            path = write_bytes(payload, out_dir / f"{name}.pbm")
            entries.append({"name": name, "params": level.params.label(), "init": "step", "path": str(path), "sha256": _sha256(payload)})

    manifest = {"size": size, "seed": args.seed, "images": entries}
    write_json(manifest, out_dir / "manifest.json")
    _print_json(manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="blocking-ca", description="Blocking-window automata and the triangle placement game.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("evolve", help="evolve a diagram and write it as PBM, CSV or JSON")
    _add_rule_args(p)
    _add_init_args(p)
    _add_range_args(p)
    p.add_argument("--steps", type=int, default=64)
    _add_output_args(p, ["pbm", "p4", "csv", "json"], "pbm")
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser("render", help="re-render a diagram CSV as PBM")
    p.add_argument("--csv", required=True)
    _add_output_args(p, ["pbm", "p4"], "pbm")
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("solve", help="game outcome of one triangle position")
    p.add_argument("--board", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--window-mode", dest="window_mode", choices=[m.value for m in WindowMode], default="anchored")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify-thm1", help="game outcomes against CA-safety over a region")
    p.add_argument("--board", required=True)
    p.add_argument("--xmin", type=int, default=-8)
    p.add_argument("--xmax", type=int, default=8)
    p.add_argument("--ymax", type=int, default=6)
    p.add_argument("--hmax", type=int, default=3)
    p.add_argument("--window-mode", dest="window_mode", choices=[m.value for m in WindowMode], default="anchored")
    p.add_argument("--cap", type=int, default=DEFAULT_MISMATCH_CAP)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--markdown")
    p.set_defaults(handler=cmd_verify_thm1)

    p = sub.add_parser("verify-lemma1", help="CA cell values against safe triangles topped there")
    p.add_argument("--board")
    _add_rule_args(p)
    _add_init_args(p)
    p.add_argument("--xmin", type=int, default=-8)
    p.add_argument("--xmax", type=int, default=8)
    p.add_argument("--tmin", type=int, default=1)
    p.add_argument("--tmax", type=int, default=8)
    p.add_argument("--cap", type=int, default=DEFAULT_MISMATCH_CAP)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--markdown")
    p.set_defaults(handler=cmd_verify_lemma1)

    p = sub.add_parser("doubling", help="parameter-doubled diagrams, one PBM per level plus a manifest")
    _add_rule_args(p, with_gamma=False)
    _add_init_args(p, default="step")
    _add_range_args(p)
    p.add_argument("--n", dest="n_max", type=int, default=3)
    p.add_argument("--steps", type=int, default=32)
    p.add_argument("--orientation", choices=["t0-bottom", "t0-top"], default="t0-bottom")
    p.add_argument("--out-prefix", dest="out_prefix", required=True)
    p.set_defaults(handler=cmd_doubling)

    p = sub.add_parser("verify-thm2", help="CA-safety of triangles against their scaled images")
    _add_rule_args(p, with_gamma=False)
    _add_init_args(p, default="step")
    p.add_argument("--n", dest="n_max", type=int, default=2)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--xmin", type=int, default=-8)
    p.add_argument("--xmax", type=int, default=16)
    p.add_argument("--ymax", type=int, default=6)
    p.add_argument("--hmax", type=int, default=3)
    p.add_argument("--cap", type=int, default=DEFAULT_MISMATCH_CAP)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--markdown")
    p.set_defaults(handler=cmd_verify_thm2)

    p = sub.add_parser("stars", help="isolated 0-cells per level, births and lineages")
    _add_rule_args(p, with_gamma=False)
    _add_init_args(p, default="layered")
    p.add_argument("--n", dest="n_max", type=int, default=3)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--limit", type=int, default=64)
    p.add_argument("--birth", action="store_true", help="check the star born above a run of L+R+1 ones")
    p.add_argument("--track", action="store_true", help="follow the first star of --from-level upwards")
    p.add_argument("--from-level", dest="from_level", type=int, default=0)
    p.add_argument("--alpha", type=int)
    p.add_argument("--y", type=int)
    p.set_defaults(handler=cmd_stars)

    p = sub.add_parser("superpose", help="several doubling levels on one raster")
    _add_rule_args(p, with_gamma=False)
    _add_init_args(p, default="layered")
    _add_range_args(p)
    p.add_argument("--levels", type=_levels)
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--tmax", type=int)
    _add_output_args(p, ["ppm", "pgm"], "ppm")
    p.set_defaults(handler=cmd_superpose)

    p = sub.add_parser("stats", help="per-row 1-density of a diagram")
    _add_rule_args(p)
    _add_init_args(p)
    _add_range_args(p)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("truth-table", help="update output for every window pattern")
    _add_rule_args(p)
    p.set_defaults(handler=cmd_truth_table)

    p = sub.add_parser("gallery", help="render the reference parameter sets")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--seed", type=int, default=SEED)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(handler=cmd_gallery)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except BlockingCAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_OK if not exc.code else EXIT_USAGE

    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (BlockingCAError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
