"""Electrode-artifact masking, training-patch generation, and diffusion fill.

Obstructions (electrode leads, pipettes) show up as near-black regions.
``segment_artifacts`` turns them into a mask; ``build_mask_pool`` and
``extract_ground_truth_patches`` produce augmentation sets from such masks;
``inpaint`` fills masked regions from their surroundings so downstream
segmentation sees a plausible, connected structure.

Pools and patch sets persist as a directory of PNGs plus a ``manifest.txt``
with one record per patch: ``<filename> <origin_x> <origin_y> <tag>``. The
tag is ``rot<deg>`` for mask-pool orientations and ``rot<deg>`` or
``rot<deg>_fliph`` for ground-truth variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .raster import BitMask, Raster, StructuringElement, dilate, read_mask, read_raster, threshold, write_mask, write_raster

MASK_POOL_ANGLES = tuple(range(0, 360, 10))
GT_TAGS = ("rot0", "rot90", "rot180", "rot270", "rot0_fliph", "rot90_fliph", "rot180_fliph", "rot270_fliph")


@dataclass(frozen=True)
class MaskPool:
    """256x256 artifact-mask patches in 36 orientations per source crop."""

    patches: list[BitMask]
    provenance: list[tuple[int, int, int]]  # (origin_x, origin_y, rotation_deg)


@dataclass(frozen=True)
class PatchSet:
    """Clean image patches with their 8 dihedral variants."""

    patches: list[Raster]
    provenance: list[tuple[int, int, str]]  # (origin_x, origin_y, tag)


def segment_artifacts(
    img: Raster,
    dark_threshold: int,
    grow: StructuringElement | None = None,
) -> BitMask:
    """Mask pixels darker than ``dark_threshold``, grown to cover artifact rims.

    The default growth element is a disk of diameter 5.
    """
    if grow is None:
        grow = StructuringElement.disk_of_diameter(5)
    return dilate(threshold(img, dark_threshold, "below"), grow)


def _rotate_mask_nn(bits: np.ndarray, deg: int) -> np.ndarray:
    """Nearest-neighbor rotation about the patch center; off-frame is unset."""
    if deg % 360 == 0:
        return bits.copy()
    n = bits.shape[0]
    c = (n - 1) / 2.0
    th = math.radians(deg)
    cos_t, sin_t = math.cos(th), math.sin(th)
    yy, xx = np.mgrid[0:n, 0:n]
    xs = cos_t * (xx - c) + sin_t * (yy - c) + c
    ys = -sin_t * (xx - c) + cos_t * (yy - c) + c
    xi = np.rint(xs).astype(np.int64)
    yi = np.rint(ys).astype(np.int64)
    ok = (xi >= 0) & (xi < n) & (yi >= 0) & (yi < n)
    out = np.zeros_like(bits)
    out[ok] = bits[yi[ok], xi[ok]]
    return out


def build_mask_pool(
    artifact_mask: BitMask,
    patch_size: int = 256,
    min_coverage: float = 0.25,
    n_crops: int = 64,
    seed: int = 0,
) -> MaskPool:
    """Randomly crop the artifact mask and emit every kept crop in 36 orientations.

    ``n_crops`` origins are drawn uniformly (seeded); crops keeping at least
    ``min_coverage`` of their area set are retained, ordered by raster scan of
    their origins, and rotated through 0, 10, ..., 350 degrees.
    """
    h, w = artifact_mask.height, artifact_mask.width
    if h < patch_size or w < patch_size:
        raise ValueError(f"mask {w}x{h} is smaller than patch size {patch_size}")
    rng = np.random.default_rng(seed)
    origins = []
    for _ in range(n_crops):
        x = int(rng.integers(0, w - patch_size + 1))
        y = int(rng.integers(0, h - patch_size + 1))
        origins.append((x, y))
    kept = []
    for x, y in origins:
        crop = artifact_mask.bits[y : y + patch_size, x : x + patch_size]
        if crop.mean() >= min_coverage:
            kept.append((x, y, crop))
    kept.sort(key=lambda t: (t[1], t[0]))
    patches: list[BitMask] = []
    provenance: list[tuple[int, int, int]] = []
    for x, y, crop in kept:
        for deg in MASK_POOL_ANGLES:
            patches.append(BitMask(_rotate_mask_nn(crop, deg)))
            provenance.append((x, y, deg))
    return MaskPool(patches, provenance)


def _dihedral_variants(pixels: np.ndarray):
    for k, tag in enumerate(GT_TAGS[:4]):
        yield tag, np.rot90(pixels, k)
    for k, tag in enumerate(GT_TAGS[4:]):
        yield tag, np.fliplr(np.rot90(pixels, k))


def extract_ground_truth_patches(
    img: Raster,
    artifact_mask: BitMask,
    patch_size: int = 256,
    stride: int = 256,
) -> PatchSet:
    """Collect artifact-free crops on a stride grid, each in 8 dihedral variants."""
    h, w = img.height, img.width
    if h < patch_size or w < patch_size:
        raise ValueError(f"image {w}x{h} is smaller than patch size {patch_size}")
    if not artifact_mask.same_shape(img):
        raise ValueError("artifact mask dimensions must match the image")
    patches: list[Raster] = []
    provenance: list[tuple[int, int, str]] = []
    for y in range(0, h - patch_size + 1, stride):
        for x in range(0, w - patch_size + 1, stride):
            if artifact_mask.bits[y : y + patch_size, x : x + patch_size].any():
                continue
            crop = img.pixels[y : y + patch_size, x : x + patch_size]
            for tag, variant in _dihedral_variants(crop):
                patches.append(Raster(np.ascontiguousarray(variant)))
                provenance.append((x, y, tag))
    return PatchSet(patches, provenance)


def inpaint(
    img: Raster,
    hole: BitMask,
    max_iters: int = 4000,
    tol: float = 0.05,
    on_iter=None,
) -> Raster:
    """Fill ``hole`` pixels by diffusion from the surrounding image.

    Hole pixels start at the mean intensity of the hole's outer boundary and
    are repeatedly replaced by the mean of their in-image 4-neighbors (all
    values read from the previous sweep), which converges to the discrete
    harmonic extension of the boundary. Iteration stops when the largest
    per-pixel change drops below ``tol`` or after ``max_iters`` sweeps.
    Pixels outside the hole are returned bit-identical.
    """
    if img.channels != 1:
        raise ValueError("inpaint expects a grayscale raster")
    if not hole.same_shape(img):
        raise ValueError("hole dimensions must match the image")
    holes = hole.bits
    if not holes.any():
        return img
    boundary = np.zeros_like(holes)
    boundary[:-1, :] |= holes[1:, :]
    boundary[1:, :] |= holes[:-1, :]
    boundary[:, :-1] |= holes[:, 1:]
    boundary[:, 1:] |= holes[:, :-1]
    boundary &= ~holes
    if not boundary.any():
        raise ValueError("no boundary data")
    f = img.pixels.astype(np.float64)
    f[holes] = f[boundary].mean()
    h, w = f.shape
    ncount = np.zeros((h, w), dtype=np.float64)
    ncount[1:, :] += 1
    ncount[:-1, :] += 1
    ncount[:, 1:] += 1
    ncount[:, :-1] += 1
    for _ in range(max_iters):
        s = np.zeros_like(f)
        s[1:, :] += f[:-1, :]
        s[:-1, :] += f[1:, :]
        s[:, 1:] += f[:, :-1]
        s[:, :-1] += f[:, 1:]
        new_vals = s[holes] / ncount[holes]
        delta = np.abs(new_vals - f[holes]).max()
        f[holes] = new_vals
        if on_iter is not None:
            on_iter(f.copy())
        if delta < tol:
            break
    out = img.pixels.copy()
    out[holes] = np.clip(np.floor(f[holes] + 0.5), 0, 255).astype(np.uint8)
    return Raster(out)


# ---------------------------------------------------------------- persistence


def save_mask_pool(directory, pool: MaskPool) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, (patch, (x, y, deg)) in enumerate(zip(pool.patches, pool.provenance)):
        name = f"mask_{i:05d}.png"
        write_mask(d / name, patch)
        lines.append(f"{name} {x} {y} rot{deg}")
    (d / "manifest.txt").write_text("\n".join(lines) + ("\n" if lines else ""))


def load_mask_pool(directory) -> MaskPool:
    d = Path(directory)
    patches, provenance = [], []
    for line in (d / "manifest.txt").read_text().splitlines():
        if not line.strip():
            continue
        name, x, y, tag = line.split()
        patches.append(read_mask(d / name))
        provenance.append((int(x), int(y), int(tag.removeprefix("rot"))))
    return MaskPool(patches, provenance)


def save_patch_set(directory, pset: PatchSet) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, (patch, (x, y, tag)) in enumerate(zip(pset.patches, pset.provenance)):
        name = f"patch_{i:05d}.png"
        write_raster(d / name, patch)
        lines.append(f"{name} {x} {y} {tag}")
    (d / "manifest.txt").write_text("\n".join(lines) + ("\n" if lines else ""))


def load_patch_set(directory) -> PatchSet:
    d = Path(directory)
    patches, provenance = [], []
    for line in (d / "manifest.txt").read_text().splitlines():
        if not line.strip():
            continue
        name, x, y, tag = line.split()
        patches.append(read_raster(d / name))
        provenance.append((int(x), int(y), tag))
    return PatchSet(patches, provenance)
