"""
Training-data preparation
=========================

Two dataset builders for anyone training their own repair or detection
models on obstructed imagery:

* a mask pool: random crops of the artifact mask that are at least a
  quarter covered, each kept in all 36 ten-degree orientations;
* ground-truth patches: crops that never touch the artifact mask, each in
  its 8 flips/rotations.

Both persist as a PNG directory plus a manifest (filename, origin, tag).

Outputs land in demos/output/06/.
"""

from pathlib import Path

import numpy as np

from neurograph.artifact import (
    build_mask_pool,
    extract_ground_truth_patches,
    load_mask_pool,
    save_mask_pool,
    save_patch_set,
    segment_artifacts,
)
from neurograph.raster import Raster

out = Path(__file__).parent / "output" / "06"
out.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(11)
px = rng.integers(50, 90, size=(420, 420)).astype(np.uint8)
px[:, 60:110] = 0    # wide electrode bars, as seen around array leads
px[:, 240:300] = 0
px[180:225, :] = 0
img = Raster(px)

mask = segment_artifacts(img, dark_threshold=10)
pool = build_mask_pool(mask, patch_size=128, min_coverage=0.25, n_crops=24, seed=4)
save_mask_pool(out / "mask_pool", pool)
print(f"mask pool: {len(pool.patches)} patches from {len(pool.patches) // 36} kept crops")

back = load_mask_pool(out / "mask_pool")
print(f"manifest round-trips: {back.provenance == pool.provenance}")

patches = extract_ground_truth_patches(img, mask, patch_size=96, stride=32)
save_patch_set(out / "patches", patches)
print(f"ground truth: {len(patches.patches)} patches from {len(patches.patches) // 8} clean crops")
