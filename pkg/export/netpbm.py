from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable

import numpy as np

from ca.errors import ParameterError, TapeFormatError

ORIENTATIONS = ("t0-bottom", "t0-top")
P1_LINE_WIDTH = 70


def orient(grid: np.ndarray, orientation: str) -> np.ndarray:
    """Grids are stored with time 0 first; ``t0-bottom`` puts it on the last image row."""
    if orientation not in ORIENTATIONS:
        raise ParameterError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    return grid[::-1] if orientation == "t0-bottom" else grid


def _header(magic: str, comments: Iterable[str], width: int, height: int) -> str:
    lines = [magic]
    lines.extend(f"# {comment}" for comment in comments)
    lines.append(f"{width} {height}")
    return "\n".join(lines) + "\n"


def pbm_p1(bits: np.ndarray, comments: Iterable[str] = ()) -> bytes:
    height, width = bits.shape
    body: list[str] = []
    for row in bits:
        text = "".join("1" if cell else "0" for cell in row)
        body.extend(text[i : i + P1_LINE_WIDTH] for i in range(0, max(len(text), 1), P1_LINE_WIDTH))
    return (_header("P1", comments, width, height) + "\n".join(body) + "\n").encode("ascii")


def pbm_p4(bits: np.ndarray, comments: Iterable[str] = ()) -> bytes:
    height, width = bits.shape
    packed = np.packbits(bits.astype(np.uint8), axis=1)
    return _header("P4", comments, width, height).encode("ascii") + packed.tobytes()


def pgm_p2(grey: np.ndarray, comments: Iterable[str] = ()) -> bytes:
    height, width = grey.shape
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in grey)
    return (_header("P2", comments, width, height) + "255\n" + rows + "\n").encode("ascii")


def ppm_p3(rgb: np.ndarray, comments: Iterable[str] = ()) -> bytes:
    height, width, _ = rgb.shape
    rows = "\n".join(" ".join(str(int(v)) for v in row.reshape(-1)) for row in rgb)
    return (_header("P3", comments, width, height) + "255\n" + rows + "\n").encode("ascii")


def write_bytes(payload: bytes, path: Path | str) -> Path:
    if not payload:
        raise ParameterError("refusing to write an empty payload")
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(payload)
    return target


_TOKEN_RE = re.compile(rb"#[^\n]*|\S+")


def parse_netpbm(data: bytes) -> tuple[str, list[str], np.ndarray]:
    """Magic, comment lines and pixel array for P1, P4, P2 and P3 payloads."""
    comments: list[str] = []
    tokens: list[bytes] = []
    position = 0
    header_tokens = {b"P1": 3, b"P4": 3, b"P2": 4, b"P3": 4}
    needed = None
    for match in _TOKEN_RE.finditer(data):
        token = match.group()
        if token.startswith(b"#"):
            comments.append(token[1:].decode("ascii").strip())
            continue
        tokens.append(token)
        if needed is None:
            needed = header_tokens.get(token)
            if needed is None:
                raise TapeFormatError(f"unsupported netpbm magic {token!r}")
        if len(tokens) == needed:
            position = match.end() + 1
            break

    magic = tokens[0].decode("ascii")
    width, height = int(tokens[1]), int(tokens[2])
    body = data[position:]
    if magic == "P4":
        packed = np.frombuffer(body, dtype=np.uint8).reshape(height, -1)
        return magic, comments, np.unpackbits(packed, axis=1)[:, :width]
    if magic == "P1":
        digits = [ch - 48 for ch in body if ch in (48, 49)]
        return magic, comments, np.array(digits, dtype=np.uint8).reshape(height, width)
    values = np.array([int(v) for v in body.split()], dtype=np.uint8)
    if magic == "P3":
        return magic, comments, values.reshape(height, width, 3)
    return magic, comments, values.reshape(height, width)
