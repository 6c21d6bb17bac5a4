"""
The full pipeline
=================

One call from raw image to attributed graph: grayscale, electrode masking,
diffusion fill, watershed segmentation, thinning, node/edge extraction, and
detector-class transfer. The synthetic scene is a bright cross occluded by
a dark bar; the fill bridges the gap, so the graph comes out as one
junction with four arms, and the detector box names the junction a neuron.

Stage dumps (numbered PNGs) land in demos/output/08/.
"""

from pathlib import Path

import numpy as np

from neurograph.pipeline import PipelineConfig, run_pipeline
from neurograph.raster import Raster, write_raster

out = Path(__file__).parent / "output" / "08"
out.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(2024)
px = rng.integers(36, 45, size=(128, 128)).astype(np.uint8)
px[20:109, 61:68] = 220
px[61:68, 20:109] = 220
px[:, 39:42] = 0
write_raster(out / "input.png", Raster(px))
(out / "detections.txt").write_text("0 0.5 0.5 0.2 0.2 0.9\n")

cfg = PipelineConfig(
    image=str(out / "input.png"),
    roi_file=str(out / "detections.txt"),
    out_dir=str(out / "run"),
    dump_intermediates=True,
    artifact_dark_threshold=10,
    min_area=20,
)
result = run_pipeline(cfg)
print(result.diagnostics)
for n in result.graph.nodes.values():
    print(f"  node at ({n.x:.1f}, {n.y:.1f}): {n.kind}, {n.node_class}")
print(f"artifacts in {result.out_dir}")
