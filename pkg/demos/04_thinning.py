"""
Thinning
========

Strokes of any width reduce to one-pixel-wide curves. The demo thins a few
shapes and verifies the properties the rest of the pipeline relies on:
re-thinning changes nothing, connectivity and holes survive, and no 2x2
clump of pixels remains (junctions stay single-pixel crossings).

Outputs land in demos/output/04/.
"""

from pathlib import Path

import numpy as np
from scipy import ndimage

from neurograph.raster import BitMask, write_mask
from neurograph.thinning import thin

out = Path(__file__).parent / "output" / "04"
out.mkdir(parents=True, exist_ok=True)

bits = np.zeros((96, 96), dtype=bool)
bits[20:27, 8:88] = True            # a thick bar
bits[8:88, 44:49] = True            # a thick crossing stroke
yy, xx = np.mgrid[0:96, 0:96]
ring = (yy - 66) ** 2 + (xx - 22) ** 2
bits |= (ring <= 15**2) & (ring >= 9**2)  # a ring: its hole must survive

write_mask(out / "shapes.png", BitMask(bits))
skel = thin(BitMask(bits))
write_mask(out / "skeleton.png", skel.mask)

again = thin(skel.mask)
fg = lambda b: ndimage.label(b, structure=np.ones((3, 3), bool))[1]
print(f"{bits.sum()} px -> {skel.mask.count()} px")
print(f"idempotent: {np.array_equal(again.mask.bits, skel.mask.bits)}")
print(f"components preserved: {fg(bits) == fg(skel.mask.bits)}")
sk = skel.mask.bits
block = (sk[:-1, :-1] & sk[1:, :-1] & sk[:-1, 1:] & sk[1:, 1:]).any()
print(f"2x2 blocks: {block}")
print(f"one-pixel wide everywhere: {skel.is_thin()}")
