"""Skeleton to graph conversion.

Node pixels are found with a 3x3 filter bank: a skeleton pixel is a node
when it is isolated, has exactly one skeleton neighbor (line tip), or has
three or more skeleton neighbors that are pairwise non-adjacent (junction).
Touching node pixels merge into one node identity whose position is the
pixel centroid.

Removing node pixels cuts the skeleton into labeled segments. Segments are
resolved to edges by repeatedly dilating each unresolved segment footprint
one step and connecting the two node identities it overlaps most; segments
that never reach two identities either close a loop back onto their single
identity (both free ends touch it) or are discarded as spurs and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import ndimage

from . import __version__
from .graph_model import ExtractedGraph, GraphEdge, GraphNode
from .neighborhood import POSITION_TOUCHING, neighbor_codes, set_positions
from .raster import BitMask, connected_components
from .roi import Roi
from .thinning import Skeleton

_KIND_NONE, _KIND_ENDPOINT, _KIND_JUNCTION, _KIND_ISOLATED = 0, 1, 2, 3


def _build_kind_lut() -> np.ndarray:
    lut = np.zeros(256, dtype=np.uint8)
    for code in range(256):
        pos = set_positions(code)
        if len(pos) == 0:
            lut[code] = _KIND_ISOLATED
        elif len(pos) == 1:
            lut[code] = _KIND_ENDPOINT
        elif any(
            not POSITION_TOUCHING[a, b] and not POSITION_TOUCHING[a, c] and not POSITION_TOUCHING[b, c]
            for a, b, c in combinations(pos, 3)
        ):
            lut[code] = _KIND_JUNCTION
    return lut


KIND_LUT = _build_kind_lut()


@dataclass(frozen=True)
class NodeCluster:
    id: int
    pixels: list[tuple[int, int]]
    centroid: tuple[float, float]
    kind: str


@dataclass(frozen=True)
class NodePixelSet:
    clusters: list[NodeCluster]
    label_map: np.ndarray  # per-pixel node identity, 0 where not a node pixel

    @property
    def pixels(self) -> set[tuple[int, int]]:
        return {px for c in self.clusters for px in c.pixels}

    def by_id(self, nid: int) -> NodeCluster:
        return self.clusters[nid - 1]


@dataclass
class EdgeSegment:
    label: int
    pixels: list[tuple[int, int]]
    endpoints_resolved: tuple[int, int] | None = None


@dataclass
class EdgeExtraction:
    resolved: list[EdgeSegment] = field(default_factory=list)
    spurs: list[EdgeSegment] = field(default_factory=list)


def classify_pixel(code: int) -> str:
    """Node classification of a 3x3 neighborhood code: none, endpoint,
    junction, or isolated."""
    return ("none", "endpoint", "junction", "isolated")[KIND_LUT[code]]


def detect_nodes(skel: Skeleton) -> NodePixelSet:
    bits = skel.mask.bits
    padded = np.zeros((bits.shape[0] + 2, bits.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = bits
    codes = neighbor_codes(padded)
    kinds = np.where(bits, KIND_LUT[codes], 0)
    node_mask = kinds > 0
    labels = connected_components(BitMask(node_mask), connectivity=8)
    clusters: list[NodeCluster] = []
    for nid in range(1, labels.count + 1):
        ys, xs = np.nonzero(labels.labels == nid)
        pixel_kinds = kinds[ys, xs]
        if (pixel_kinds == _KIND_JUNCTION).any():
            kind = "junction"
        elif (pixel_kinds == _KIND_ENDPOINT).any():
            kind = "endpoint"
        else:
            kind = "isolated"
        pixels = [(int(x), int(y)) for y, x in sorted(zip(ys.tolist(), xs.tolist()))]
        centroid = (float(xs.mean()), float(ys.mean()))
        clusters.append(NodeCluster(nid, pixels, centroid, kind))
    return NodePixelSet(clusters, np.asarray(labels.labels))


def _segment_terminals(pixels: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Pixels with at most one 8-neighbor inside the segment."""
    pset = set(pixels)
    out = []
    for x, y in pixels:
        n = sum(
            1
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            if (dx, dy) != (0, 0) and (x + dx, y + dy) in pset
        )
        if n <= 1:
            out.append((x, y))
    return out


def _touches(pixels: list[tuple[int, int]], node_pixels: set[tuple[int, int]]):
    """Segment pixels 8-adjacent to the node's pixel set."""
    hits = []
    for x, y in pixels:
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if (dx, dy) != (0, 0) and (x + dx, y + dy) in node_pixels:
                    hits.append((x, y))
                    break
            else:
                continue
            break
    return hits


_SQUARE3 = np.ones((3, 3), dtype=bool)


def extract_edges(skel: Skeleton, nodes: NodePixelSet, max_dilation_rounds: int = 3) -> EdgeExtraction:
    """Assign skeleton segments to node pairs by iterative footprint dilation."""
    bits = skel.mask.bits
    node_map = nodes.label_map
    seg_mask = bits & (node_map == 0)
    seg_labels = connected_components(BitMask(seg_mask), connectivity=8)
    segments: list[EdgeSegment] = []
    footprints: dict[int, np.ndarray] = {}
    for label in range(1, seg_labels.count + 1):
        ys, xs = np.nonzero(seg_labels.labels == label)
        pixels = [(int(x), int(y)) for y, x in sorted(zip(ys.tolist(), xs.tolist()))]
        segments.append(EdgeSegment(label, pixels))
        footprints[label] = seg_labels.labels == label
    out = EdgeExtraction()
    pending = list(segments)
    for _ in range(max_dilation_rounds):
        if not pending:
            break
        still = []
        for seg in pending:
            fp = ndimage.binary_dilation(footprints[seg.label], structure=_SQUARE3, border_value=0)
            footprints[seg.label] = fp
            overlapped = node_map[fp & (node_map > 0)]
            if overlapped.size:
                counts = np.bincount(overlapped)
                ids = np.nonzero(counts)[0]
                if ids.size >= 2:
                    ranked = sorted(ids.tolist(), key=lambda i: (-counts[i], i))
                    seg.endpoints_resolved = (int(ranked[0]), int(ranked[1]))
                    out.resolved.append(seg)
                    continue
            still.append(seg)
        pending = still
    for seg in pending:
        fp = footprints[seg.label]
        overlapped = node_map[fp & (node_map > 0)]
        ids = np.unique(overlapped)
        if ids.size == 1:
            nid = int(ids[0])
            node_pixels = set(nodes.by_id(nid).pixels)
            terminals = _segment_terminals(seg.pixels)
            touching_terminals = [t for t in terminals if _touches([t], node_pixels)]
            if len(touching_terminals) >= 2:
                # both free ends reach the same identity: the segment closes a loop
                seg.endpoints_resolved = (nid, nid)
                out.resolved.append(seg)
                continue
        out.spurs.append(seg)
    return out


_STEP = {(dx, dy): math.hypot(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)}


def _chain_walk(pixels: list[tuple[int, int]], start: tuple[int, int]):
    """Minimal spanning walk over the segment pixels from ``start``.

    Returns (ordered visit list, total step cost). For arc-shaped segments
    this is the pixel chain and its exact step length; branches contribute
    their spanning cost.
    """
    pset = set(pixels)
    if not pset:
        return [], 0.0
    visited = {start}
    order = [start]
    total = 0.0
    # Prim-style growth, preferring cheap (axial) steps; ties by coordinates
    frontier = list(pset - visited)
    while frontier:
        best = None
        for px in order[::-1]:
            for (dx, dy), cost in sorted(_STEP.items(), key=lambda kv: (kv[1], kv[0])):
                cand = (px[0] + dx, px[1] + dy)
                if cand in pset and cand not in visited:
                    best = (cost, cand)
                    break
            if best:
                break
        if best is None:
            # disconnected leftovers (cannot happen for 8-connected segments)
            break
        cost, cand = best
        visited.add(cand)
        order.append(cand)
        total += cost
        frontier = [p for p in frontier if p not in visited]
    return order, total


def _min_dist(pixels, targets) -> float:
    return min(math.hypot(px[0] - t[0], px[1] - t[1]) for px in pixels for t in targets)


def build_graph(
    skel: Skeleton,
    nodes: NodePixelSet,
    edges: list[EdgeSegment],
    thickness: np.ndarray | None = None,
) -> ExtractedGraph:
    """Assemble the attributed graph from node identities and resolved segments.

    Edge length is the step cost along the segment chain (1 per axial move,
    sqrt(2) per diagonal) plus one step onto each endpoint node. Edge weight
    is the mean of ``thickness`` (the pre-thinning distance transform) over
    the segment pixels.
    """
    g = ExtractedGraph(meta={"source": "", "version": __version__, "created": ""})
    for c in nodes.clusters:
        g.nodes[c.id] = GraphNode(c.centroid[0], c.centroid[1], c.kind)
    eid = 0
    for seg in sorted(edges, key=lambda s: s.label):
        if seg.endpoints_resolved is None:
            continue
        u, v = seg.endpoints_resolved
        for end in (u, v):
            if end not in g.nodes:
                raise ValueError(f"segment {seg.label} resolved to unknown node {end}")
        u_pixels = nodes.by_id(u).pixels
        v_pixels = nodes.by_id(v).pixels
        eid += 1
        if not seg.pixels:
            continue
        terminals = _segment_terminals(seg.pixels)
        start = terminals[0] if terminals else seg.pixels[0]
        walk, chain_cost = _chain_walk(seg.pixels, start)
        if u == v:
            ts = terminals if len(terminals) >= 2 else [walk[0], walk[-1]]
            attach = _min_dist([ts[0]], u_pixels) + _min_dist([ts[-1]], u_pixels)
        else:
            attach = _min_dist(seg.pixels, u_pixels) + _min_dist(seg.pixels, v_pixels)
        length = chain_cost + attach
        weight = None
        if thickness is not None:
            xs = np.array([p[0] for p in seg.pixels])
            ys = np.array([p[1] for p in seg.pixels])
            weight = float(thickness[ys, xs].mean())
        path = [(float(x), float(y)) for x, y in walk]
        g.edges.append(GraphEdge(eid, u, v, float(length), weight, path))
    g.validate()
    return g


def classify_nodes(
    g: ExtractedGraph,
    rois: list[Roi],
    image_dims: tuple[int, int],
) -> tuple[ExtractedGraph, list[str]]:
    """Transfer detector classes onto the nearest nodes.

    Astrocyte boxes are skipped. A box claims the node nearest its center,
    capped at half the larger box side; competing boxes lose to higher
    confidence. Unclaimed boxes come back as diagnostic strings.
    """
    import copy

    width, height = image_dims
    out = copy.deepcopy(g)
    unmatched: list[str] = []
    claims: dict[int, tuple[float, int, Roi]] = {}
    for idx, roi in enumerate(rois):
        if not isinstance(roi, Roi):
            raise ValueError(f"roi record {idx} is not a Roi")
        if roi.class_name == "astrocyte":
            continue
        cx, cy = roi.center_px(width, height)
        w_px, h_px = roi.size_px(width, height)
        radius = max(w_px, h_px) / 2.0
        best = None
        for nid in sorted(out.nodes):
            n = out.nodes[nid]
            d = math.hypot(n.x - cx, n.y - cy)
            if best is None or d < best[0] - 1e-12:
                best = (d, nid)
        if best is None or best[0] > radius:
            unmatched.append(
                f"roi {idx} ({roi.class_name}, conf {roi.confidence}) matched no node within {radius:.1f} px"
            )
            continue
        _, nid = best
        incumbent = claims.get(nid)
        if incumbent is None or (roi.confidence, -idx) > (incumbent[0], -incumbent[1]):
            if incumbent is not None:
                l_idx, l_roi = incumbent[1], incumbent[2]
                unmatched.append(
                    f"roi {l_idx} ({l_roi.class_name}, conf {l_roi.confidence}) lost node {nid} to a higher-confidence roi"
                )
            claims[nid] = (roi.confidence, idx, roi)
        else:
            unmatched.append(
                f"roi {idx} ({roi.class_name}, conf {roi.confidence}) lost node {nid} to a higher-confidence roi"
            )
    for nid, (_, _, roi) in claims.items():
        out.nodes[nid].node_class = roi.class_name
    return out, unmatched
