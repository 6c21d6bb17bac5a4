"""Structure segmentation via marker-guided watershed.

Flooding runs on the gradient-magnitude relief (central differences, L2
magnitude) from foreground and background seed groups. The flood order is a
strict total order: lowest relief first, ties by queue insertion order, so
identical inputs always produce identical label maps. Foreground floods to
label 1, background to label 2, and every pixel ends up labeled.

Marker files are plain text, one seed per line: ``fg x y`` or ``bg x y``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .raster import BitMask, LabelMap, Raster, connected_components, distance_transform, otsu_threshold, threshold

FG_LABEL = 1
BG_LABEL = 2


@dataclass(frozen=True)
class MarkerSet:
    """Seed coordinates guiding the watershed; fg and bg must not overlap."""

    foreground_seeds: list[tuple[int, int]]
    background_seeds: list[tuple[int, int]]
    origin: str = "user"

    def validate(self, width: int, height: int) -> None:
        fg, bg = set(self.foreground_seeds), set(self.background_seeds)
        if fg & bg:
            raise ValueError(f"seed lists overlap at {sorted(fg & bg)[:3]}")
        for x, y in list(fg | bg):
            if not (0 <= x < width and 0 <= y < height):
                raise ValueError(f"seed ({x}, {y}) outside {width}x{height} image")


def load_markers(path) -> MarkerSet:
    fg, bg = [], []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("fg", "bg"):
            raise ValueError(f"marker file line {ln}: expected 'fg|bg x y', got {line!r}")
        (fg if parts[0] == "fg" else bg).append((int(parts[1]), int(parts[2])))
    return MarkerSet(fg, bg, origin="user")


def save_markers(path, markers: MarkerSet) -> None:
    lines = [f"fg {x} {y}" for x, y in markers.foreground_seeds]
    lines += [f"bg {x} {y}" for x, y in markers.background_seeds]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def auto_markers(img: Raster, fg_quantile: float = 0.9, bg_quantile: float = 0.2) -> MarkerSet:
    """Derive watershed seeds from the image itself.

    Foreground: local maxima of the distance transform of the Otsu-bright
    mask, gated to pixels at or above the ``fg_quantile`` intensity.
    Background: pixels below the ``bg_quantile`` intensity, sampled on a
    16-pixel grid.
    """
    if not (0.0 < bg_quantile < fg_quantile < 1.0):
        raise ValueError("quantiles inverted: need 0 < bg_quantile < fg_quantile < 1")
    if img.channels != 1:
        raise ValueError("auto_markers expects a grayscale raster")
    t = otsu_threshold(img)
    bright = threshold(img, t, "above")
    dt = distance_transform(bright)
    local_max = ndimage.maximum_filter(dt, size=3, mode="constant", cval=0.0)
    fg_cut = float(np.quantile(img.pixels, fg_quantile))
    bg_cut = float(np.quantile(img.pixels, bg_quantile))
    peaks = (dt > 0) & (dt >= local_max) & (img.pixels >= fg_cut)
    fg = [(int(x), int(y)) for y, x in np.argwhere(peaks).tolist()]
    fg_set = set(fg)
    bg = []
    for y in range(0, img.height, 16):
        for x in range(0, img.width, 16):
            if img.pixels[y, x] < bg_cut and (x, y) not in fg_set:
                bg.append((x, y))
    return MarkerSet(fg, bg, origin="auto")


def gradient_magnitude(img: Raster) -> np.ndarray:
    gy, gx = np.gradient(img.pixels.astype(np.float64))
    return np.hypot(gx, gy)


def guided_watershed(img: Raster, markers: MarkerSet) -> LabelMap:
    """Flood the gradient relief from the seed groups; fg=1, bg=2."""
    if img.channels != 1:
        raise ValueError("guided_watershed expects a grayscale raster")
    if not markers.foreground_seeds or not markers.background_seeds:
        raise ValueError("empty marker group: both fg and bg seeds are required")
    markers.validate(img.width, img.height)
    relief = gradient_magnitude(img)
    h, w = relief.shape
    labels = np.zeros((h, w), dtype=np.int32)
    heap: list[tuple[float, int, int, int]] = []
    counter = 0
    for group, label in ((markers.foreground_seeds, FG_LABEL), (markers.background_seeds, BG_LABEL)):
        for x, y in group:
            labels[y, x] = label
            heapq.heappush(heap, (float(relief[y, x]), counter, y, x))
            counter += 1
    while heap:
        _, _, y, x = heapq.heappop(heap)
        lab = labels[y, x]
        for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w and labels[ny, nx] == 0:
                labels[ny, nx] = lab
                heapq.heappush(heap, (float(relief[ny, nx]), counter, ny, nx))
                counter += 1
    return LabelMap(labels)


def structure_mask(labels: LabelMap, min_area: int = 0) -> BitMask:
    """Foreground-labeled pixels, with 8-connected specks under ``min_area`` removed."""
    fg = BitMask(labels.labels == FG_LABEL)
    if min_area <= 0:
        return fg
    comps = connected_components(fg, connectivity=8)
    if comps.count == 0:
        return fg
    sizes = np.bincount(comps.labels.ravel(), minlength=comps.count + 1)
    keep = sizes >= min_area
    keep[0] = False
    return BitMask(keep[comps.labels])
