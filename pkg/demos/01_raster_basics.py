"""
Raster basics
=============

Build a small synthetic scene, then walk the classical transforms every
later stage leans on: automatic thresholding, morphology, connected
components, and the exact Euclidean distance transform.

Outputs land in demos/output/01/.
"""

from pathlib import Path

import numpy as np

from neurograph.raster import (
    Raster,
    StructuringElement,
    connected_components,
    dilate,
    distance_transform,
    erode,
    gaussian_blur,
    otsu_threshold,
    threshold,
    write_labels,
    write_mask,
    write_raster,
)

out = Path(__file__).parent / "output" / "01"
out.mkdir(parents=True, exist_ok=True)

# a dim field with two bright blobs and a bright bar
rng = np.random.default_rng(0)
px = rng.integers(20, 60, size=(96, 96)).astype(np.uint8)
yy, xx = np.mgrid[0:96, 0:96]
px[(yy - 30) ** 2 + (xx - 30) ** 2 <= 100] = 210
px[(yy - 70) ** 2 + (xx - 62) ** 2 <= 64] = 190
px[10:14, 50:90] = 200
img = Raster(px)
write_raster(out / "scene.png", img)

# smooth, then let Otsu pick the cut between background and structure
smooth = gaussian_blur(img, sigma=1.5)
t = otsu_threshold(smooth)
print(f"otsu threshold: {t}")
mask = threshold(smooth, t, "above")
write_mask(out / "mask.png", mask)

# morphology: close one-pixel gaps, then peel a layer back off
se = StructuringElement.disk_of_diameter(5)
closed = erode(dilate(mask, se), se)
write_mask(out / "closed.png", closed)
print(f"mask {mask.count()} px, after closing {closed.count()} px")

labels = connected_components(closed, connectivity=8)
print(f"{labels.count} components")
write_labels(out / "labels.png", labels)

dt = distance_transform(closed)
print(f"max inscribed radius: {dt.max():.1f} px")
write_raster(out / "distance.png", Raster(np.clip(dt * 12, 0, 255).astype(np.uint8)))
