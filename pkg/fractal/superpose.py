from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ca.errors import ParameterError
from fractal.doubling import DoublingRun

BACKGROUND = (255, 255, 255)
# Level 0 yellow, level 1 blue; further levels cycle.
PALETTE = (
    (230, 185, 0),
    (40, 90, 200),
    (200, 60, 60),
    (60, 150, 80),
    (120, 70, 170),
)
GREY_LEVELS = (0, 160, 96, 48, 24)


def layer_color(n: int) -> tuple[int, int, int]:
    return PALETTE[n % len(PALETTE)]


@dataclass(frozen=True)
class LayeredImage:
    """Raster of layer codes: 0 is background, k+1 means the k-th listed level drew a 1 there.

    Array row 0 is level-0 time 0; orientation is applied by the writers.
    """

    layers: tuple[int, ...]
    pixels: np.ndarray
    scale: int
    x_range: tuple[int, int]
    t_max: int

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    def rgb(self) -> np.ndarray:
        table = np.array([BACKGROUND] + [layer_color(n) for n in self.layers], dtype=np.uint8)
        return table[self.pixels]

    def grey(self) -> np.ndarray:
        table = np.array([255] + [GREY_LEVELS[i % len(GREY_LEVELS)] for i in range(len(self.layers))], dtype=np.uint8)
        return table[self.pixels]


def superpose(run: DoublingRun, n_list: list[int], xmin: int, xmax: int, t_max: int) -> LayeredImage:
    """Draw levels of ``run`` on one raster over level-0 columns [xmin, xmax] and rows 0..t_max.

    A level-n cell covers a 2^(m-n) square where m is the deepest listed level;
    later entries of ``n_list`` paint over earlier ones.
    """
    if not n_list:
        raise ParameterError("superpose needs at least one level")
    if xmax < xmin or t_max < 0:
        raise ParameterError(f"empty raster x=[{xmin}, {xmax}], t_max={t_max}")
    for n in n_list:
        if not 0 <= n <= run.n_max:
            raise ParameterError(f"level {n} not in run (n_max={run.n_max})")

    deepest = max(n_list)
    scale = 2**deepest
    height = (t_max + 1) * scale
    width = (xmax - xmin + 1) * scale
    pixels = np.zeros((height, width), dtype=np.uint8)

    for code, n in enumerate(n_list, start=1):
        factor = 2**n
        block = scale // factor
        level = run.levels[n]
        rows = min(level.steps, (t_max + 1) * factor - 1)
        cells = level.window(xmin * factor, (xmax + 1) * factor - 1, rows)
        expanded = np.kron(cells, np.ones((block, block), dtype=np.uint8))
        target = pixels[: expanded.shape[0], :]
        target[expanded == 1] = code
    return LayeredImage(layers=tuple(n_list), pixels=pixels, scale=scale, x_range=(xmin, xmax), t_max=t_max)
