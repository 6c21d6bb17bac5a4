"""
Anchor priors from labeled boxes
================================

Detector label files carry normalized boxes; clustering their pixel
dimensions under the 1 - IoU distance yields anchor priors. The demo
samples three size populations (somata, clusters, debris), clusters them,
and prints the priors with the per-iteration cost to show convergence.

Outputs land in demos/output/07/.
"""

from pathlib import Path

import numpy as np

from neurograph.roi import kmeans_anchors

out = Path(__file__).parent / "output" / "07"
out.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(21)
boxes = [(rng.uniform(7, 12), rng.uniform(8, 13)) for _ in range(40)]     # somata
boxes += [(rng.uniform(28, 40), rng.uniform(25, 42)) for _ in range(25)]  # clusters
boxes += [(rng.uniform(70, 100), rng.uniform(65, 95)) for _ in range(12)] # large clumps

costs = []
anchors = kmeans_anchors(boxes, k=6, seed=0, on_iteration=costs.append)
print("cost per iteration:", " -> ".join(f"{c:.2f}" for c in costs))
lines = [f"{w:.1f} {h:.1f}" for w, h in anchors.anchors]
(out / "anchors.txt").write_text("\n".join(lines) + "\n")
print("anchors (w h), area ascending:")
for line in lines:
    print(" ", line)
