"""Skeletonization: two-sub-pass parallel thinning with a cleanup pass.

The core iteration is the classic two-sub-pass scheme: a pixel is marked for
deletion when it has 2..6 set neighbors, exactly one 0 -> 1 transition around
its neighborhood circle, and the sub-pass-specific axial products vanish.
Marks are computed against the state at sub-pass start. Marks are then
applied in raster order, skipping any pixel whose deletion would no longer
preserve local topology at application time; plain parallel application can
annihilate small components outright (an isolated 2x2 square is the classic
case), which would break the homotopy guarantee downstream stages rely on.

A cleanup pass then removes staircase corners and junction blobs: pixels
with at least two set neighbors whose deletion preserves topology are
removed in repeated raster sweeps until none remain. Line interiors and
true junction centers are never such pixels, endpoints are explicitly kept,
so the sweep only eats redundant diagonal steps and blob filler. The result
carries no 2x2 foreground block and re-thinning it is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .neighborhood import (
    OFFSETS,
    POPCOUNT_LUT,
    SIMPLE_LUT,
    ZS_PASS1_LUT,
    ZS_PASS2_LUT,
    code_of,
    component_count,
    neighbor_codes,
)
from .raster import BitMask


@dataclass(frozen=True)
class Skeleton:
    """A mask whose set pixels form one-pixel-wide curves."""

    mask: BitMask

    @property
    def width(self) -> int:
        return self.mask.width

    @property
    def height(self) -> int:
        return self.mask.height

    def is_thin(self) -> bool:
        """True when every pixel with fewer than 3 neighbors has no two
        mutually adjacent neighbors (junction pixels are exempt)."""
        padded = _pad(self.mask.bits)
        codes = neighbor_codes(padded)
        for y, x in np.argwhere(self.mask.bits).tolist():
            c = int(codes[y, x])
            if POPCOUNT_LUT[c] == 2 and component_count(c) == 1:
                return False
        return True


def _pad(bits: np.ndarray) -> np.ndarray:
    padded = np.zeros((bits.shape[0] + 2, bits.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = bits
    return padded


def _apply_marks(padded: np.ndarray, marks: np.ndarray) -> int:
    """Delete marked pixels in raster order; keep any whose removal would
    change local topology in the meantime. Returns the deletion count."""
    deleted = 0
    for y, x in np.argwhere(marks).tolist():
        if SIMPLE_LUT[code_of(padded, y, x)]:
            padded[y + 1, x + 1] = False
            deleted += 1
    return deleted


def _subpass(padded: np.ndarray, lut: np.ndarray) -> int:
    codes = neighbor_codes(padded)
    marks = lut[codes] & padded[1:-1, 1:-1]
    if not marks.any():
        return 0
    return _apply_marks(padded, marks)


def _cleanup(padded: np.ndarray) -> None:
    """Remove staircase corners and blob pixels until none are left."""
    while True:
        changed = 0
        inner = padded[1:-1, 1:-1]
        for y, x in np.argwhere(inner).tolist():
            c = code_of(padded, y, x)
            if POPCOUNT_LUT[c] >= 2 and SIMPLE_LUT[c]:
                padded[y + 1, x + 1] = False
                changed += 1
        if changed == 0:
            return


def _counts(padded: np.ndarray) -> tuple[int, int]:
    from scipy import ndimage

    fg = ndimage.label(padded, structure=np.ones((3, 3), dtype=bool))[1]
    bg = ndimage.label(~padded, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], bool))[1]
    return fg, bg


def _repair_blocks(padded: np.ndarray, source: np.ndarray) -> bool:
    """Break 2x2 blocks that survived cleanup because every block pixel pins
    its own diagonal arm (crossing strokes of even parity converge to this).

    A block pixel p whose only outside neighbor a sits at the outer diagonal
    corner is swapped for a source-mask pixel q axially adjacent to a: the
    arm re-attaches through q to the rest of the block, so the junction
    becomes one pixel wide without changing connectivity. Returns True when
    a swap was applied.
    """
    inner = padded[1:-1, 1:-1]
    blocks = np.argwhere(inner[:-1, :-1] & inner[1:, :-1] & inner[:-1, 1:] & inner[1:, 1:])
    if blocks.size == 0:
        return False
    before = _counts(padded)
    for by, bx in blocks.tolist():
        block = [(by, bx), (by, bx + 1), (by + 1, bx), (by + 1, bx + 1)]
        for py, px in block:
            nbrs = [
                (py + dy, px + dx)
                for dx, dy in OFFSETS
                if padded[py + 1 + dy, px + 1 + dx]
            ]
            outside = [(ny, nx) for ny, nx in nbrs if (ny, nx) not in block]
            if len(outside) != 1:
                continue
            ay, ax = outside[0]
            if abs(ay - py) != 1 or abs(ax - px) != 1:
                continue
            for qy, qx in ((py, ax), (ay, px)):
                if not (0 <= qy < inner.shape[0] and 0 <= qx < inner.shape[1]):
                    continue
                if inner[qy, qx] or not source[qy, qx]:
                    continue
                padded[py + 1, px + 1] = False
                padded[qy + 1, qx + 1] = True
                if _counts(padded) == before:
                    return True
                padded[py + 1, px + 1] = True
                padded[qy + 1, qx + 1] = False
    return False


def thin(mask: BitMask) -> Skeleton:
    """Reduce a mask to a one-pixel-wide skeleton.

    Anti-extensive and idempotent; preserves the number of 8-connected
    foreground components and 4-connected background components; the output
    contains no 2x2 block of set pixels.
    """
    padded = _pad(mask.bits)
    while True:
        n1 = _subpass(padded, ZS_PASS1_LUT)
        n2 = _subpass(padded, ZS_PASS2_LUT)
        if n1 + n2 == 0:
            break
    _cleanup(padded)
    for _ in range(64):  # each repair removes one stuck junction block
        if not _repair_blocks(padded, mask.bits):
            break
        _cleanup(padded)
    return Skeleton(BitMask(padded[1:-1, 1:-1].copy()))
