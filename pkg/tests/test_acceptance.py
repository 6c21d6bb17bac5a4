"""Acceptance suite: one test per release criterion, each printing a PASS
line when it holds. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import json
import time
from itertools import combinations
from math import hypot

import numpy as np
import pytest
from fastapi.testclient import TestClient

from neurograph.artifact import build_mask_pool, extract_ground_truth_patches, inpaint
from neurograph.graph_extract import build_graph, classify_pixel, detect_nodes, extract_edges
from neurograph.graph_model import parse, serialize
from neurograph.pipeline import PipelineConfig, run_pipeline
from neurograph.raster import BitMask, Raster, write_raster
from neurograph.roi import iou_centered, kmeans_anchors
from neurograph.service import create_app
from neurograph.thinning import Skeleton, thin

from shapes import (
    bg_components,
    electrode_fixture,
    fg_components,
    has_2x2_block,
    mask_corpus,
    polyline_mask,
)
from test_graph_model import random_graph as make_random_graph


def _report(name):
    print(f"\n[acceptance] PASS {name}")


# ---------------------------------------------------------------------------
# 1. Thinning suite: >=200 masks, all invariants, under 10 seconds
# ---------------------------------------------------------------------------


def test_thinning_suite():
    masks = mask_corpus(seed=1234)  # 70 blobs + 90 strokes (widths 1..7) + 45 shapes
    assert len(masks) >= 200
    start = time.monotonic()
    for bits in masks:
        out = thin(BitMask(bits)).mask.bits
        assert not (out & ~bits).any(), "anti-extensive"
        assert np.array_equal(thin(BitMask(out)).mask.bits, out), "idempotent"
        assert fg_components(out) == fg_components(bits), "foreground components"
        assert bg_components(out) == bg_components(bits), "background components"
        assert not has_2x2_block(out), "2x2 block"
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"thinning suite took {elapsed:.1f}s"
    _report(f"thinning invariants on {len(masks)} masks in {elapsed:.2f}s")


# ---------------------------------------------------------------------------
# 2. Node filter: all 256 neighborhoods match the subset-search oracle
# ---------------------------------------------------------------------------


def test_node_filter_exhaustive():
    offsets = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)]

    def oracle(code):
        present = [offsets[i] for i in range(8) if code >> i & 1]
        if not present:
            return "isolated"
        if len(present) == 1:
            return "endpoint"
        for size in range(3, len(present) + 1):
            for sub in combinations(present, size):
                if all(abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1 for a, b in combinations(sub, 2)):
                    return "junction"
        return "none"

    for code in range(256):
        assert classify_pixel(code) == oracle(code), code
    _report("node filter matches the brute-force oracle on all 256 patterns")


# ---------------------------------------------------------------------------
# 3. Graph extraction vs hand-specified ground truth on the fixture set
# ---------------------------------------------------------------------------


def _draw(strokes, size=33):
    bits = np.zeros((size, size), dtype=bool)
    for pts in strokes:
        bits |= polyline_mask((size, size), pts, width=1)
    return bits


def _match_ground_truth(g, expected_nodes, expected_edges, pos_tol=1.5, len_tol=2.0):
    assert len(g.nodes) == len(expected_nodes), (len(g.nodes), len(expected_nodes))
    mapping = {}
    used = set()
    for i, (ex, ey) in enumerate(expected_nodes):
        cands = sorted(
            (hypot(n.x - ex, n.y - ey), nid)
            for nid, n in g.nodes.items()
            if nid not in used
        )
        assert cands and cands[0][0] <= pos_tol, f"no extracted node within {pos_tol} of ({ex},{ey})"
        mapping[i] = cands[0][1]
        used.add(cands[0][1])
    remaining = list(g.edges)
    for i, j, length in expected_edges:
        u, v = mapping[i], mapping[j]
        match = None
        for e in remaining:
            if {e.u, e.v} == {u, v} and abs(e.length - length) <= len_tol:
                match = e
                break
        assert match is not None, f"no edge {u}-{v} of length ~{length}"
        remaining.remove(match)
    assert not remaining, f"unexpected extra edges: {[(e.u, e.v, e.length) for e in remaining]}"


def _extract(bits):
    skel = Skeleton(BitMask(bits))
    nodes = detect_nodes(skel)
    ext = extract_edges(skel, nodes)
    return build_graph(skel, nodes, ext.resolved)


FIXTURES = {}

FIXTURES["line"] = (
    _draw([[(4, 10), (23, 10)]]),
    [(4, 10), (23, 10)],
    [(0, 1, 19.0)],
)

FIXTURES["cross"] = (
    _draw([[(16, 8), (16, 24)], [(8, 16), (24, 16)]]),
    [(16, 16), (16, 8), (16, 24), (8, 16), (24, 16)],
    [(0, 1, 8.0), (0, 2, 8.0), (0, 3, 8.0), (0, 4, 8.0)],
)

FIXTURES["Y"] = (
    _draw([[(16, 16), (16, 6)], [(16, 16), (9, 23)], [(16, 16), (23, 23)]]),
    [(16, 16), (16, 6), (9, 23), (23, 23)],
    [(0, 1, 10.0), (0, 2, 7 * 2**0.5), (0, 3, 7 * 2**0.5)],
)

FIXTURES["T"] = (
    _draw([[(6, 8), (26, 8)], [(16, 8), (16, 20)]]),
    [(16, 8), (6, 8), (26, 8), (16, 20)],
    [(0, 1, 10.0), (0, 2, 10.0), (0, 3, 12.0)],
)

FIXTURES["H"] = (
    _draw([[(8, 4), (8, 24)], [(24, 4), (24, 24)], [(8, 14), (24, 14)]]),
    [(8, 14), (24, 14), (8, 4), (8, 24), (24, 4), (24, 24)],
    [(0, 2, 10.0), (0, 3, 10.0), (1, 4, 10.0), (1, 5, 10.0), (0, 1, 16.0)],
)

FIXTURES["grid3"] = (
    _draw(
        [[(6, y), (26, y)] for y in (6, 16, 26)] + [[(x, 6), (x, 26)] for x in (6, 16, 26)]
    ),
    [(16, 16), (16, 6), (6, 16), (26, 16), (16, 26)],
    [
        (0, 1, 10.0),
        (0, 2, 10.0),
        (0, 3, 10.0),
        (0, 4, 10.0),
        (1, 2, 20.0),
        (1, 3, 20.0),
        (2, 4, 20.0),
        (3, 4, 20.0),
    ],
)

FIXTURES["tangent_loops"] = (
    _draw(
        [
            [(6, 6), (16, 6), (16, 16), (6, 16), (6, 6)],
            [(16, 16), (26, 16), (26, 26), (16, 26), (16, 16)],
        ]
    ),
    [(16, 16)],
    [(0, 0, 40.0), (0, 0, 40.0)],
)


def test_graph_extraction_ground_truth():
    for name, (bits, nodes, edges) in FIXTURES.items():
        g = _extract(bits)
        _match_ground_truth(g, nodes, edges)
    _report(f"graph extraction matches ground truth on {len(FIXTURES)} fixtures")


# ---------------------------------------------------------------------------
# 4. End-to-end electrode fixture
# ---------------------------------------------------------------------------


def test_end_to_end_fixture(tmp_path):
    img, roi_text, geometry = electrode_fixture()
    write_raster(tmp_path / "fixture.png", Raster(img))
    (tmp_path / "fixture_roi.txt").write_text(roi_text)

    def cfg(out):
        return PipelineConfig(
            image=str(tmp_path / "fixture.png"),
            roi_file=str(tmp_path / "fixture_roi.txt"),
            out_dir=str(tmp_path / out),
            dump_intermediates=True,
            artifact_dark_threshold=10,
            min_area=20,
        )

    res = run_pipeline(cfg("a"))
    g = res.graph
    assert sorted(n.kind for n in g.nodes.values()) == ["endpoint"] * 4 + ["junction"]
    assert len(g.edges) == 4
    neurons = [n for n in g.nodes.values() if n.node_class == "neuron"]
    assert len(neurons) == 1 and neurons[0].kind == "junction"
    cx, cy = geometry["center"]
    x0, x1 = geometry["bar_cols"]
    in_bar = np.argwhere(res.skeleton.mask.bits[:, x0:x1])
    assert in_bar.size > 0  # the crossing stroke is bridged through the bar
    assert np.all(np.abs(in_bar[:, 0] - cy) <= geometry["stroke_half"] + 1)  # nothing else survives there

    res_b = run_pipeline(cfg("b"))
    names = sorted(p.name for p in res.out_dir.iterdir())
    assert names == sorted(p.name for p in res_b.out_dir.iterdir())
    for name in names:
        a = (res.out_dir / name).read_bytes()
        b = (res_b.out_dir / name).read_bytes()
        if name == "effective_config.ini":  # contains the differing out dir path
            a = a.replace(str(res.out_dir).encode(), b"OUT")
            b = b.replace(str(res_b.out_dir).encode(), b"OUT")
        assert a == b, name
    _report("end-to-end fixture: 5 nodes / 4 edges, bar bridged, one neuron, byte-identical")


# ---------------------------------------------------------------------------
# 5. Augmentation counts
# ---------------------------------------------------------------------------


def test_augmentation_counts():
    rng = np.random.default_rng(31)
    bits = rng.random((300, 280)) < 0.5
    pool = build_mask_pool(BitMask(bits), patch_size=256, min_coverage=0.25, n_crops=6, seed=9)
    assert pool.patches and len(pool.patches) % 36 == 0
    groups = {(x, y) for x, y, _ in pool.provenance}
    assert len(pool.patches) == 36 * len(pool.provenance) / 36  # one entry per patch
    for gx, gy in groups:
        degs = [d for x, y, d in pool.provenance if (x, y) == (gx, gy)]
        assert degs == list(range(0, 360, 10))

    # rejection below the coverage floor
    sparse = np.zeros((300, 300), dtype=bool)
    sparse[:150, :100] = True  # any 256x256 crop covers < 0.25
    empty_pool = build_mask_pool(BitMask(sparse), patch_size=256, n_crops=16, seed=1)
    assert empty_pool.patches == []

    img = Raster(rng.integers(0, 256, size=(300, 300), dtype=np.uint8))
    mask_bits = np.zeros((300, 300), dtype=bool)
    mask_bits[140:170, 140:170] = True
    ps = extract_ground_truth_patches(img, BitMask(mask_bits), patch_size=128, stride=64)
    assert ps.patches and len(ps.patches) % 8 == 0
    for x, y, _ in ps.provenance:
        assert not mask_bits[y : y + 128, x : x + 128].any()
    _report("augmentation: 36 orientations per kept crop, 8 variants per clean patch")


# ---------------------------------------------------------------------------
# 6. Anchor clustering optimality and monotone cost
# ---------------------------------------------------------------------------


def _total_cost(boxes, anchors):
    return sum(min(1 - iou_centered(b, a) for a in anchors) for b in boxes)


def test_anchor_clustering():
    rng = np.random.default_rng(8)
    for trial in range(8):
        n_small = int(rng.integers(2, 7))
        n_big = int(rng.integers(2, min(13 - n_small, 7)))
        boxes = [(float(rng.uniform(5, 11)), float(rng.uniform(6, 12))) for _ in range(n_small)]
        boxes += [(float(rng.uniform(60, 95)), float(rng.uniform(55, 100))) for _ in range(n_big)]
        assert len(boxes) <= 12
        out = kmeans_anchors(boxes, k=2, seed=trial)
        got = _total_cost(boxes, out.anchors)
        best = np.inf
        n = len(boxes)
        for bitsel in range(1, 2 ** (n - 1)):
            left = [b for i, b in enumerate(boxes) if bitsel >> i & 1]
            right = [b for i, b in enumerate(boxes) if not bitsel >> i & 1]
            if not left or not right:
                continue
            anchors = [tuple(np.mean(part, axis=0)) for part in (left, right)]
            best = min(best, _total_cost(boxes, anchors))
        assert got <= best + 1e-9, (trial, got, best)

    for trial in range(12):
        boxes = [(float(rng.uniform(3, 140)), float(rng.uniform(3, 140))) for _ in range(25)]
        costs = []
        kmeans_anchors(boxes, k=4, seed=trial, on_iteration=costs.append)
        assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:])), trial
    _report("anchor clustering: optimal on 2-mode sets, cost non-increasing")


# ---------------------------------------------------------------------------
# 7. Inpainting
# ---------------------------------------------------------------------------


def test_inpainting():
    holes = np.zeros((24, 24), dtype=bool)
    holes[6:18, 8:20] = True
    flat = Raster(np.full((24, 24), 131, dtype=np.uint8))
    assert np.array_equal(inpaint(flat, BitMask(holes)).pixels, flat.pixels)

    ramp = np.tile(np.arange(0, 256, 4, dtype=np.uint8), (32, 1))
    hole2 = np.zeros((32, 64), dtype=bool)
    hole2[8:24, 24:40] = True
    broken = ramp.copy()
    broken[hole2] = 255
    out = inpaint(Raster(broken), BitMask(hole2), max_iters=8000, tol=1e-4)
    assert np.abs(out.pixels[hole2].astype(int) - ramp[hole2].astype(int)).max() <= 3
    assert np.array_equal(out.pixels[~hole2], broken[~hole2])

    rng = np.random.default_rng(3)
    px = rng.integers(0, 256, size=(20, 20), dtype=np.uint8)
    hole3 = np.zeros((20, 20), dtype=bool)
    hole3[5:15, 4:16] = True
    boundary = np.zeros_like(hole3)
    boundary[:-1, :] |= hole3[1:, :]
    boundary[1:, :] |= hole3[:-1, :]
    boundary[:, :-1] |= hole3[:, 1:]
    boundary[:, 1:] |= hole3[:, :-1]
    boundary &= ~hole3
    lo, hi = px[boundary].min(), px[boundary].max()
    iterates = []
    inpaint(Raster(px), BitMask(hole3), max_iters=400, tol=1e-6, on_iter=iterates.append)
    assert iterates
    for f in iterates:
        assert lo - 1e-9 <= f[hole3].min() and f[hole3].max() <= hi + 1e-9
    _report("inpainting: constant exact, ramp within 3, outside untouched, maximum principle")


# ---------------------------------------------------------------------------
# 8. Serialization round trip
# ---------------------------------------------------------------------------


def test_serialization_round_trip():
    rng = np.random.default_rng(77)
    for _ in range(100):
        g = make_random_graph(rng)
        for fmt in ("json", "graphml"):
            data = serialize(g, fmt)
            assert data == serialize(g, fmt)
            back = parse(data, fmt)
            assert back.nodes == g.nodes and back.edges == g.edges and back.meta == g.meta
    _report("serialization: 100 random graphs round-trip in both formats, byte-stable")


# ---------------------------------------------------------------------------
# 9. Service: atomicity, undo, replay
# ---------------------------------------------------------------------------


def test_service_contract(tmp_path):
    img, roi_text, _ = electrode_fixture()
    write_raster(tmp_path / "fixture.png", Raster(img))
    (tmp_path / "fixture_roi.txt").write_text(roi_text)
    app = create_app(runs_dir=tmp_path / "runs", debug=True)
    with TestClient(app) as client:
        resp = client.post(
            "/runs",
            json={
                "config": {
                    "input": {
                        "image": str(tmp_path / "fixture.png"),
                        "roi_file": str(tmp_path / "fixture_roi.txt"),
                    },
                    "artifact": {"dark_threshold": 10},
                    "segmentation": {"min_area": 20},
                }
            },
        )
        assert resp.status_code == 202
        run_id = resp.json()["run_id"]
        deadline = time.monotonic() + 60
        while time.monotonic() < deadline:
            if client.get(f"/runs/{run_id}").json()["status"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert client.get(f"/runs/{run_id}").json()["status"] == "done"

        original = client.get(f"/runs/{run_id}/graph").json()
        victim = original["nodes"][0]["id"]

        bad = client.post(
            f"/runs/{run_id}/edits",
            json={"edits": [{"op": "remove_node", "id": victim}, {"op": "remove_node", "id": 4242}]},
        )
        assert bad.status_code == 422 and bad.json()["index"] == 1
        assert client.get(f"/runs/{run_id}/graph").json() == original

        ok = client.post(f"/runs/{run_id}/edits", json={"edits": [{"op": "remove_node", "id": victim}]})
        assert ok.status_code == 200
        assert client.get(f"/runs/{run_id}/integrity").json()["ok"] is True

        undone = client.post(f"/runs/{run_id}/undo")
        assert undone.status_code == 200
        assert client.get(f"/runs/{run_id}/graph").json() == original
    _report("service: atomic batches, undo restores, replay equals served graph")
