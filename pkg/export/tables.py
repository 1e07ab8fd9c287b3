from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pandas as pd

from ca.diagram import Diagram, density_series


def diagram_frame(diagram: Diagram, xmin: int, xmax: int, t_max: int | None = None) -> pd.DataFrame:
    """Long table with one row per cell: t, x, value."""
    grid = diagram.window(xmin, xmax, t_max)
    frame = pd.DataFrame(grid, columns=list(range(xmin, xmax + 1)))
    frame.index.name = "t"
    long = frame.reset_index().melt(id_vars="t", var_name="x", value_name="value")
    long["x"] = long["x"].astype("int64")
    long["value"] = long["value"].astype("int64")
    return long.sort_values(["t", "x"]).reset_index(drop=True)


def write_frame_csv(frame: pd.DataFrame, path: Path | str, header: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as f:
        f.write(f"# config {header}\n")
        frame.to_csv(f, index=False)
    return target


def write_diagram_csv(diagram: Diagram, path: Path | str, xmin: int, xmax: int, header: str) -> Path:
    return write_frame_csv(diagram_frame(diagram, xmin, xmax), path, header)


def read_diagram_csv(path: Path | str) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def read_header(path: Path | str) -> str | None:
    with Path(path).open(encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
    prefix = "# config "
    return first[len(prefix) :] if first.startswith(prefix) else None


def density_frame(diagram: Diagram, xmin: int, xmax: int) -> pd.DataFrame:
    densities = density_series(diagram, xmin, xmax)
    frame = pd.DataFrame({"t": range(len(densities)), "density": densities})
    frame["ones"] = [row.popcount() if row.right_fill == row.left_fill == 0 else None for row in diagram.rows]
    return frame


def density_summary(frame: pd.DataFrame) -> dict[str, Any]:
    return {
        "rows": int(len(frame)),
        "mean_density": round(float(frame["density"].mean()), 6),
        "max_density": round(float(frame["density"].max()), 6),
        "final_density": round(float(frame["density"].iloc[-1]), 6),
    }


def write_json(payload: Any, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return target
