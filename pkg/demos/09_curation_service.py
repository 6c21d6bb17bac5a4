"""
Curation over HTTP
==================

The service wraps pipeline runs and live graph editing for the browser UI,
but it is perfectly usable from scripts. This demo starts the app
in-process, submits a run, waits for it, edits the graph (batch apply,
atomic rejection, undo), and downloads both export formats.

Outputs land in demos/output/09/.
"""

import time
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from neurograph.raster import Raster, write_raster
from neurograph.service import create_app

out = Path(__file__).parent / "output" / "09"
out.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(2024)
px = rng.integers(36, 45, size=(128, 128)).astype(np.uint8)
px[20:109, 61:68] = 220
px[61:68, 20:109] = 220
px[:, 39:42] = 0
write_raster(out / "input.png", Raster(px))

app = create_app(runs_dir=out / "runs", debug=True)
with TestClient(app) as api:
    run_id = api.post(
        "/runs",
        json={"config": {
            "input": {"image": str(out / "input.png")},
            "artifact": {"dark_threshold": 10},
            "segmentation": {"min_area": 20},
        }},
    ).json()["run_id"]
    while api.get(f"/runs/{run_id}").json()["status"] not in ("done", "failed"):
        time.sleep(0.05)
    print("status:", api.get(f"/runs/{run_id}").json()["status"])

    graph = api.get(f"/runs/{run_id}/graph").json()
    print(f"pipeline graph: {len(graph['nodes'])} nodes, {len(graph['edges'])} edges")

    tips = [n["id"] for n in graph["nodes"] if n["kind"] == "endpoint"]
    bad_batch = api.post(f"/runs/{run_id}/edits", json={"edits": [
        {"op": "remove_node", "id": tips[0]},
        {"op": "remove_node", "id": 10_000},
    ]})
    print("bad batch:", bad_batch.status_code, bad_batch.json())

    api.post(f"/runs/{run_id}/edits", json={"edits": [
        {"op": "remove_node", "id": tips[0]},
        {"op": "set_node_class", "id": tips[1], "class": "cluster"},
    ]})
    edited = api.get(f"/runs/{run_id}/graph").json()
    print(f"after edits: {len(edited['nodes'])} nodes")
    print("integrity:", api.get(f"/runs/{run_id}/integrity").json())

    api.post(f"/runs/{run_id}/undo")
    print(f"after undo: {len(api.get(f'/runs/{run_id}/graph').json()['nodes'])} nodes")

    for fmt in ("json", "graphml"):
        data = api.get(f"/runs/{run_id}/export", params={"format": fmt}).content
        (out / f"graph.{fmt}").write_bytes(data)
print(f"exports written to {out}")
