from itertools import combinations

import numpy as np
import pytest

from neurograph.graph_extract import (
    NodeCluster,
    NodePixelSet,
    build_graph,
    classify_nodes,
    classify_pixel,
    detect_nodes,
    extract_edges,
)
from neurograph.raster import BitMask, distance_transform
from neurograph.roi import Roi
from neurograph.thinning import Skeleton


def skel_from(bits):
    return Skeleton(BitMask(np.asarray(bits, dtype=bool)))


def blank(h=32, w=32):
    return np.zeros((h, w), dtype=bool)


def cross_bits(c=16, arm=5):
    bits = blank()
    bits[c - arm : c + arm + 1, c] = True
    bits[c, c - arm : c + arm + 1] = True
    return bits


# ------------------------------------------------------------ node filter


def _oracle_kind(code):
    """Brute force over every subset of set neighbors, independent layout."""
    offsets = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)]
    present = [offsets[i] for i in range(8) if code >> i & 1]
    if len(present) == 0:
        return "isolated"
    if len(present) == 1:
        return "endpoint"

    def touching(a, b):
        return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1

    for size in range(3, len(present) + 1):
        for sub in combinations(present, size):
            if all(not touching(a, b) for a, b in combinations(sub, 2)):
                return "junction"
    return "none"


def test_all_256_neighborhoods_match_subset_oracle():
    for code in range(256):
        assert classify_pixel(code) == _oracle_kind(code), code


def test_line_has_two_endpoint_identities():
    bits = blank()
    bits[5, 3:13] = True  # 10 pixels
    nodes = detect_nodes(skel_from(bits))
    assert len(nodes.clusters) == 2
    assert all(c.kind == "endpoint" for c in nodes.clusters)
    assert nodes.clusters[0].centroid == (3.0, 5.0)
    assert nodes.clusters[1].centroid == (12.0, 5.0)


def test_cross_has_five_identities():
    nodes = detect_nodes(skel_from(cross_bits()))
    kinds = sorted(c.kind for c in nodes.clusters)
    assert kinds == ["endpoint", "endpoint", "endpoint", "endpoint", "junction"]
    junction = [c for c in nodes.clusters if c.kind == "junction"][0]
    assert junction.centroid == (16.0, 16.0)


def test_isolated_pixel_is_a_node():
    bits = blank()
    bits[7, 9] = True
    nodes = detect_nodes(skel_from(bits))
    assert len(nodes.clusters) == 1
    assert nodes.clusters[0].kind == "isolated"


def test_adjacent_node_pixels_merge_with_centroid():
    # two diagonal junction-free endpoints adjacent to each other merge
    bits = blank()
    bits[5, 5] = True
    bits[6, 6] = True
    nodes = detect_nodes(skel_from(bits))
    assert len(nodes.clusters) == 1
    assert nodes.clusters[0].centroid == (5.5, 5.5)


# ------------------------------------------------------------ edges


def test_line_resolves_to_single_edge():
    bits = blank()
    bits[5, 3:13] = True
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    out = extract_edges(skel, nodes)
    assert len(out.resolved) == 1 and not out.spurs
    assert set(out.resolved[0].endpoints_resolved) == {1, 2}


def test_cross_resolves_to_four_edges_at_junction():
    skel = skel_from(cross_bits())
    nodes = detect_nodes(skel)
    junction_id = [c.id for c in nodes.clusters if c.kind == "junction"][0]
    out = extract_edges(skel, nodes)
    assert len(out.resolved) == 4 and not out.spurs
    for seg in out.resolved:
        assert junction_id in seg.endpoints_resolved


def test_disconnected_nodes_give_no_edges_no_spurs():
    bits = blank()
    bits[3, 3] = True
    bits[20, 20] = True
    skel = skel_from(bits)
    out = extract_edges(skel, detect_nodes(skel))
    assert not out.resolved and not out.spurs


def test_floating_ring_is_a_spur():
    bits = blank()
    bits[10, 10:15] = True
    bits[14, 10:15] = True
    bits[10:15, 10] = True
    bits[10:15, 14] = True
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    assert not nodes.clusters  # a bare ring has no node pixels
    out = extract_edges(skel, nodes)
    assert not out.resolved
    assert len(out.spurs) == 1


def test_lollipop_gives_self_loop_and_stem():
    bits = blank()
    # square ring with a stem leaving its corner
    bits[10, 10:17] = True
    bits[16, 10:17] = True
    bits[10:17, 10] = True
    bits[10:17, 16] = True
    bits[17:24, 16] = True  # stem downward from ring corner
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    out = extract_edges(skel, nodes)
    loops = [s for s in out.resolved if s.endpoints_resolved[0] == s.endpoints_resolved[1]]
    stems = [s for s in out.resolved if s.endpoints_resolved[0] != s.endpoints_resolved[1]]
    assert len(loops) == 1 and len(stems) == 1
    assert not out.spurs


def _hand_node_set(clusters):
    label_map = np.zeros((32, 32), dtype=np.int32)
    built = []
    for nid, (pixels, kind) in enumerate(clusters, start=1):
        for x, y in pixels:
            label_map[y, x] = nid
        xs = [p[0] for p in pixels]
        ys = [p[1] for p in pixels]
        built.append(NodeCluster(nid, pixels, (float(np.mean(xs)), float(np.mean(ys))), kind))
    return NodePixelSet(built, label_map)


def test_three_way_overlap_takes_two_largest_then_smaller_id():
    # a segment flanked by three identities: two touch with 2 px, one with 1
    nodes = _hand_node_set(
        [
            ([(4, 9), (4, 10)], "junction"),   # left, 2 contact pixels
            ([(11, 9), (11, 10)], "junction"),  # right, 2 contact pixels
            ([(7, 12)], "endpoint"),            # below, 1 contact pixel
        ]
    )
    bits = blank()
    bits[10, 5:11] = True  # the segment
    bits[9, 4] = bits[10, 4] = True
    bits[9, 11] = bits[10, 11] = True
    bits[12, 7] = True
    skel = skel_from(bits)
    results = set()
    for _ in range(10):
        out = extract_edges(skel, nodes, max_dilation_rounds=3)
        seg = [s for s in out.resolved if s.pixels[0] == (5, 10)][0]
        results.add(seg.endpoints_resolved)
    assert results == {(1, 2)}


def test_tied_overlaps_resolve_to_smaller_ids():
    nodes = _hand_node_set(
        [
            ([(4, 10)], "endpoint"),
            ([(11, 10)], "endpoint"),
            ([(7, 12)], "endpoint"),
        ]
    )
    bits = blank()
    bits[10, 5:11] = True
    bits[12, 7] = True
    bits[4, 10] = bits[11, 10] = True
    skel = skel_from(bits)
    out = extract_edges(skel, nodes, max_dilation_rounds=1)
    seg = out.resolved[0]
    assert seg.endpoints_resolved == (1, 2)


def test_pixel_partition_invariant():
    for bits in (cross_bits(), blank() | cross_bits()):
        bits = bits.copy()
        bits[2, 2] = True  # plus an isolated node
        skel = skel_from(bits)
        nodes = detect_nodes(skel)
        out = extract_edges(skel, nodes)
        node_px = nodes.pixels
        seg_px = {p for s in out.resolved + out.spurs for p in s.pixels}
        skel_px = {(int(x), int(y)) for y, x in np.argwhere(bits)}
        assert node_px | seg_px == skel_px
        assert not node_px & seg_px


# ------------------------------------------------------------ build_graph


def test_axial_line_length_nine():
    bits = blank()
    bits[5, 3:13] = True
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    out = extract_edges(skel, nodes)
    g = build_graph(skel, nodes, out.resolved)
    assert len(g.edges) == 1
    assert g.edges[0].length == pytest.approx(9.0)


def test_diagonal_line_length_four_sqrt2():
    bits = blank()
    for i in range(5):
        bits[4 + i, 4 + i] = True
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    out = extract_edges(skel, nodes)
    g = build_graph(skel, nodes, out.resolved)
    assert len(g.edges) == 1
    assert g.edges[0].length == pytest.approx(4 * np.sqrt(2), abs=0.01)


def test_degrees_match_incident_edges_and_weight_uses_thickness():
    bits = cross_bits()
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    out = extract_edges(skel, nodes)
    thickness = distance_transform(BitMask(bits))
    g = build_graph(skel, nodes, out.resolved, thickness)
    junction_id = [c.id for c in nodes.clusters if c.kind == "junction"][0]
    assert g.degree(junction_id) == 4
    for c in nodes.clusters:
        if c.kind == "endpoint":
            assert g.degree(c.id) == 1
    for e in g.edges:
        assert e.weight == pytest.approx(1.0)  # 1-px lines are 1 px from background
        assert e.path  # traced pixel chain is kept for rendering


def test_build_graph_rejects_dangling_identity():
    bits = blank()
    bits[5, 3:13] = True
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    out = extract_edges(skel, nodes)
    out.resolved[0].endpoints_resolved = (1, 99)
    with pytest.raises(ValueError, match="unknown node 99"):
        build_graph(skel, nodes, out.resolved)


# ------------------------------------------------------------ classify


def _graph_with_nodes(positions):
    bits = blank()
    for x, y in positions:
        bits[y, x] = True
    skel = skel_from(bits)
    nodes = detect_nodes(skel)
    return build_graph(skel, nodes, [])


def test_single_node_acquires_roi_class():
    g = _graph_with_nodes([(10, 10)])
    rois = [Roi(0, 10 / 32, 10 / 32, 0.4, 0.4, 0.9)]
    out, unmatched = classify_nodes(g, rois, (32, 32))
    assert out.nodes[1].node_class == "neuron"
    assert unmatched == []
    assert g.nodes[1].node_class == "unclassified"  # input untouched


def test_far_roi_is_unmatched():
    g = _graph_with_nodes([(1, 1)])
    rois = [Roi(2, 0.9, 0.9, 20 / 32, 20 / 32)]
    out, unmatched = classify_nodes(g, rois, (32, 32))
    assert out.nodes[1].node_class == "unclassified"
    assert len(unmatched) == 1 and "matched no node" in unmatched[0]


def test_conflicting_rois_resolved_by_confidence():
    g = _graph_with_nodes([(10, 10)])
    rois = [
        Roi(2, 10 / 32, 10 / 32, 0.5, 0.5, 0.6),
        Roi(0, 11 / 32, 10 / 32, 0.5, 0.5, 0.9),
    ]
    out, unmatched = classify_nodes(g, rois, (32, 32))
    assert out.nodes[1].node_class == "neuron"
    assert len(unmatched) == 1 and "lost node" in unmatched[0]


def test_astrocyte_rois_skipped():
    g = _graph_with_nodes([(10, 10)])
    out, unmatched = classify_nodes(g, [Roi(1, 10 / 32, 10 / 32, 0.5, 0.5)], (32, 32))
    assert out.nodes[1].node_class == "unclassified"
    assert unmatched == []


def _assignment_oracle(node_positions, rois, dims):
    """Independent re-derivation of the class transfer rules."""
    width, height = dims
    claims = {}
    for idx, roi in enumerate(rois):
        if roi.class_id == 1:
            continue
        cx, cy = roi.cx * width, roi.cy * height
        radius = max(roi.w * width, roi.h * height) / 2
        dists = sorted(
            (np.hypot(px - cx, py - cy), nid) for nid, (px, py) in node_positions.items()
        )
        if not dists or dists[0][0] > radius:
            continue
        nid = dists[0][1]
        if nid not in claims or roi.confidence > claims[nid][0]:
            claims[nid] = (roi.confidence, roi.class_name)
    return {nid: cls for nid, (_, cls) in claims.items()}


def test_classification_matches_assignment_oracle():
    rng = np.random.default_rng(17)
    for _ in range(15):
        pts = [(int(rng.integers(2, 30)), int(rng.integers(2, 30))) for _ in range(4)]
        pts = list(dict.fromkeys(pts))
        # keep nodes apart so none merge into one cluster
        pts = [p for i, p in enumerate(pts) if all(max(abs(p[0] - q[0]), abs(p[1] - q[1])) > 1 for q in pts[:i])]
        g = _graph_with_nodes(pts)
        node_positions = {nid: (n.x, n.y) for nid, n in g.nodes.items()}
        rois = [
            Roi(
                int(rng.choice([0, 1, 2])),
                float(rng.uniform(0.1, 0.9)),
                float(rng.uniform(0.1, 0.9)),
                float(rng.uniform(0.2, 0.6)),
                float(rng.uniform(0.2, 0.6)),
                float(np.round(rng.uniform(0.2, 1.0), 3)),
            )
            for _ in range(rng.integers(1, 5))
        ]
        out, _ = classify_nodes(g, rois, (32, 32))
        want = _assignment_oracle(node_positions, rois, (32, 32))
        for nid, n in out.nodes.items():
            assert n.node_class == want.get(nid, "unclassified")
