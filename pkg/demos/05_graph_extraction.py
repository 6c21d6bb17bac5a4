"""
Skeleton to graph
=================

From a skeleton, the 3x3 filter bank flags line tips, junctions, and
isolated pixels as nodes; the remaining pixels split into segments that are
grown until they bridge two node identities. The result is an attributed
graph: positions, structural kinds, per-edge traced length and thickness.

A figure-eight shows self-loops landing in the graph; the overlay PNG uses
the standard colors (skeleton yellow, edges blue, nodes red).

Outputs land in demos/output/05/.
"""

from pathlib import Path

import numpy as np

from neurograph.graph_extract import build_graph, detect_nodes, extract_edges
from neurograph.graph_model import serialize
from neurograph.pipeline import render_overlay
from neurograph.raster import BitMask, Raster, distance_transform, write_raster
from neurograph.thinning import Skeleton

out = Path(__file__).parent / "output" / "05"
out.mkdir(parents=True, exist_ok=True)

bits = np.zeros((40, 72), dtype=bool)
# figure eight: two 16x16 squares sharing a corner at (20, 24)
for x0, y0 in ((4, 4), (20, 20)):
    bits[y0, x0 : x0 + 17] = True
    bits[y0 + 16, x0 : x0 + 17] = True
    bits[y0 : y0 + 17, x0] = True
    bits[y0 : y0 + 17, x0 + 16] = True
bits[28, 36:60] = True  # a tail leaving the lower loop's right edge

skel = Skeleton(BitMask(bits))
nodes = detect_nodes(skel)
print("nodes:", [(c.id, c.kind, c.centroid) for c in nodes.clusters])

extraction = extract_edges(skel, nodes)
print(f"resolved {len(extraction.resolved)} segments, {len(extraction.spurs)} spurs")

g = build_graph(skel, nodes, extraction.resolved, distance_transform(skel.mask))
for e in g.edges:
    kind = "self-loop" if e.u == e.v else f"{e.u}-{e.v}"
    print(f"  edge {e.id}: {kind}, length {e.length:.1f}")

(out / "graph.json").write_bytes(serialize(g, "json"))
(out / "graph.graphml").write_bytes(serialize(g, "graphml"))

base = Raster(np.full(bits.shape, 40, dtype=np.uint8))
write_raster(out / "overlay.png", render_overlay(base, skel, g))
print(f"wrote graph.json, graph.graphml, overlay.png to {out}")
