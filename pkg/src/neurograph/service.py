"""HTTP facade for pipeline runs and live graph curation.

Runs execute off the request path; clients poll run status. Graph edits
arrive in batches that apply atomically: one bad edit rejects the batch with
the offending index and leaves the graph untouched. Undo reverts the last
accepted batch. Each run persists to its own directory (config, stage dumps,
pipeline graph, edit log as line-delimited JSON), so a restarted service
picks existing runs back up.

Endpoints (JSON unless noted):
    POST /runs {config}                  -> 202 {run_id}
    GET  /runs/{id}                      -> {run_id, status, diagnostics, error}
    GET  /runs/{id}/image|skeleton|overlay -> PNG bytes
    GET  /runs/{id}/graph                -> graph document
    POST /runs/{id}/edits {edits: [...]} -> updated graph document
    POST /runs/{id}/undo                 -> graph document
    GET  /runs/{id}/export?format=json|graphml -> file download
    GET  /runs/{id}/integrity            -> {ok} (debug builds only)

Unknown runs give 404; edit endpoints on an unfinished run give 409.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .graph_model import ExtractedGraph, GraphEdit, apply_edit, graph_to_json_obj, parse, replay, serialize
from .pipeline import ConfigError, config_from_ini, run_pipeline


class RunRequest(BaseModel):
    config: dict


class EditBatch(BaseModel):
    edits: list[dict]


@dataclass
class RunRecord:
    run_id: str
    status: str  # pending | running | done | failed
    directory: Path
    config: object = None
    base_graph: ExtractedGraph | None = None
    graph: ExtractedGraph | None = None
    edit_batches: list[list[GraphEdit]] = field(default_factory=list)
    diagnostics: str = ""
    error: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock)


def _render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _flatten_config(obj: dict) -> list[str]:
    overrides = []
    for key, value in obj.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                overrides.append(f"{key}.{sub}={_render_value(v)}")
        else:
            overrides.append(f"{key}={_render_value(v)}")
    return overrides


def _edits_path(record: RunRecord) -> Path:
    return record.directory / "edits.ndjson"


def _status_path(record: RunRecord) -> Path:
    return record.directory / "status.json"


def _save_status(record: RunRecord) -> None:
    _status_path(record).write_text(
        json.dumps({"status": record.status, "error": record.error, "diagnostics": record.diagnostics})
    )


def _append_batch(record: RunRecord, batch: list[GraphEdit]) -> None:
    with _edits_path(record).open("a") as fh:
        fh.write(json.dumps([e.to_dict() for e in batch]) + "\n")


def _rewrite_batches(record: RunRecord) -> None:
    lines = [json.dumps([e.to_dict() for e in batch]) for batch in record.edit_batches]
    _edits_path(record).write_text("\n".join(lines) + ("\n" if lines else ""))


def create_app(runs_dir="runs", debug: bool = False, ui_dir=None) -> FastAPI:
    app = FastAPI(title="neurograph curation service")
    runs_root = Path(runs_dir)
    runs_root.mkdir(parents=True, exist_ok=True)
    runs: dict[str, RunRecord] = {}

    def _load_existing():
        for d in sorted(runs_root.iterdir()):
            status_file = d / "status.json"
            if not d.is_dir() or not status_file.exists():
                continue
            info = json.loads(status_file.read_text())
            record = RunRecord(run_id=d.name, status=info.get("status", "failed"), directory=d)
            record.error = info.get("error", "")
            record.diagnostics = info.get("diagnostics", "")
            if record.status in ("pending", "running"):
                record.status = "failed"
                record.error = "interrupted by service restart"
                _save_status(record)
            graph_file = d / "graph.json"
            if record.status == "done" and graph_file.exists():
                record.base_graph = parse(graph_file.read_bytes(), "json")
                record.edit_batches = []
                if _edits_path(record).exists():
                    for line in _edits_path(record).read_text().splitlines():
                        if line.strip():
                            record.edit_batches.append(
                                [GraphEdit.from_dict(d2) for d2 in json.loads(line)]
                            )
                record.graph = replay(record.base_graph, (e for b in record.edit_batches for e in b))
            runs[record.run_id] = record

    _load_existing()

    def _get(run_id: str) -> RunRecord | None:
        return runs.get(run_id)

    def _not_found():
        return JSONResponse({"detail": "unknown run"}, status_code=404)

    def _not_ready(record: RunRecord):
        return JSONResponse(
            {"detail": f"run is {record.status}", "status": record.status}, status_code=409
        )

    def _execute(record: RunRecord):
        record.status = "running"
        _save_status(record)
        try:
            result = run_pipeline(record.config)
            record.base_graph = result.graph
            record.graph = result.graph
            record.diagnostics = result.diagnostics
            record.status = "done"
        except Exception as exc:
            record.status = "failed"
            record.error = str(exc)
        _save_status(record)

    @app.post("/runs", status_code=202)
    def submit_run(req: RunRequest):
        try:
            cfg = config_from_ini("", _flatten_config(req.config))
        except ConfigError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        run_id = uuid.uuid4().hex[:12]
        directory = runs_root / run_id
        directory.mkdir(parents=True)
        cfg.out_dir = str(directory)
        cfg.dump_intermediates = True
        try:
            cfg.validate()
        except ConfigError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        record = RunRecord(run_id=run_id, status="pending", directory=directory, config=cfg)
        runs[run_id] = record
        _save_status(record)
        _edits_path(record).write_text("")
        threading.Thread(target=_execute, args=(record,), daemon=True).start()
        return {"run_id": run_id}

    @app.get("/runs/{run_id}")
    def run_status(run_id: str):
        record = _get(run_id)
        if record is None:
            return _not_found()
        return {
            "run_id": record.run_id,
            "status": record.status,
            "diagnostics": record.diagnostics,
            "error": record.error,
        }

    def _png_endpoint(run_id: str, filename: str):
        record = _get(run_id)
        if record is None:
            return _not_found()
        if record.status != "done":
            return _not_ready(record)
        path = record.directory / filename
        if not path.exists():
            return JSONResponse({"detail": f"{filename} not available"}, status_code=404)
        return Response(path.read_bytes(), media_type="image/png")

    @app.get("/runs/{run_id}/image")
    def run_image(run_id: str):
        return _png_endpoint(run_id, "00_input.png")

    @app.get("/runs/{run_id}/skeleton")
    def run_skeleton(run_id: str):
        return _png_endpoint(run_id, "05_skeleton.png")

    @app.get("/runs/{run_id}/overlay")
    def run_overlay(run_id: str):
        return _png_endpoint(run_id, "06_overlay.png")

    @app.get("/runs/{run_id}/graph")
    def run_graph(run_id: str):
        record = _get(run_id)
        if record is None:
            return _not_found()
        if record.status != "done":
            return _not_ready(record)
        with record.lock:
            return graph_to_json_obj(record.graph)

    @app.post("/runs/{run_id}/edits")
    def run_edits(run_id: str, batch: EditBatch):
        record = _get(run_id)
        if record is None:
            return _not_found()
        if record.status != "done":
            return _not_ready(record)
        with record.lock:
            graph = record.graph
            applied = []
            for i, edit_dict in enumerate(batch.edits):
                try:
                    edit = GraphEdit.from_dict(edit_dict)
                    graph = apply_edit(graph, edit)
                except ValueError as exc:
                    return JSONResponse(
                        {"detail": f"edit {i} rejected: {exc}", "index": i}, status_code=422
                    )
                applied.append(edit)
            record.graph = graph
            record.edit_batches.append(applied)
            _append_batch(record, applied)
            return graph_to_json_obj(record.graph)

    @app.post("/runs/{run_id}/undo")
    def run_undo(run_id: str):
        record = _get(run_id)
        if record is None:
            return _not_found()
        if record.status != "done":
            return _not_ready(record)
        with record.lock:
            if record.edit_batches:
                record.edit_batches.pop()
                record.graph = replay(
                    record.base_graph, (e for b in record.edit_batches for e in b)
                )
                _rewrite_batches(record)
            return graph_to_json_obj(record.graph)

    @app.get("/runs/{run_id}/export")
    def run_export(run_id: str, format: str = "json"):
        record = _get(run_id)
        if record is None:
            return _not_found()
        if record.status != "done":
            return _not_ready(record)
        if format not in ("json", "graphml"):
            return JSONResponse({"detail": f"unknown format {format!r}"}, status_code=422)
        with record.lock:
            data = serialize(record.graph, format)
        media = "application/json" if format == "json" else "application/xml"
        return Response(
            data,
            media_type=media,
            headers={"Content-Disposition": f'attachment; filename="graph.{format}"'},
        )

    if debug:

        @app.get("/runs/{run_id}/integrity")
        def run_integrity(run_id: str):
            record = _get(run_id)
            if record is None:
                return _not_found()
            if record.status != "done":
                return _not_ready(record)
            with record.lock:
                replayed = replay(record.base_graph, (e for b in record.edit_batches for e in b))
                ok = serialize(replayed, "json") == serialize(record.graph, "json")
            return {"ok": ok, "batches": len(record.edit_batches)}

    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
