"""Command-line interface.

Subcommands: run, mask-pool, patches, anchors, thin, extract, render, edit,
serve. Every config value is overridable with ``--set section.key=value``.
Exit codes: 0 success, 1 usage or configuration error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .artifact import build_mask_pool, extract_ground_truth_patches, save_mask_pool, save_patch_set, segment_artifacts
from .graph_extract import build_graph, classify_nodes, detect_nodes, extract_edges
from .graph_model import GraphEdit, parse, replay, serialize
from .pipeline import (
    ConfigError,
    PipelineConfig,
    StageError,
    load_config,
    config_from_ini,
    render_overlay,
    run_pipeline,
)
from .raster import distance_transform, read_mask, read_raster, to_grayscale, write_mask, write_raster
from .roi import kmeans_anchors, parse_roi_file
from .thinning import thin


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. --set segmentation.min_area=20 (repeatable)")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="random seed (overrides pipeline.seed)")
    p.add_argument("--dump-intermediates", action="store_true", help="write per-stage PNGs")


def _config(args) -> PipelineConfig:
    if args.config:
        cfg = load_config(args.config, args.overrides)
    else:
        cfg = config_from_ini("", args.overrides)
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    if args.dump_intermediates:
        cfg.dump_intermediates = True
    return cfg


def _gray(path):
    img = read_raster(path)
    return img if img.channels == 1 else to_grayscale(img)


def _cmd_run(args) -> int:
    cfg = _config(args)
    if args.image:
        cfg.image = args.image
    res = run_pipeline(cfg)
    print(res.diagnostics, end="")
    print(f"graph: {len(res.graph.nodes)} nodes, {len(res.graph.edges)} edges -> {res.out_dir}")
    return 0


def _cmd_mask_pool(args) -> int:
    cfg = _config(args)
    if args.image:
        cfg.image = args.image
    cfg.validate()
    gray = _gray(cfg.image)
    mask = segment_artifacts(gray, cfg.artifact_dark_threshold)
    pool = build_mask_pool(
        mask,
        patch_size=cfg.maskpool_patch_size,
        min_coverage=cfg.maskpool_min_coverage,
        n_crops=cfg.maskpool_n_crops,
        seed=cfg.seed,
    )
    out = Path(cfg.out_dir) / "mask_pool"
    save_mask_pool(out, pool)
    print(f"mask pool: {len(pool.patches)} patches ({len(pool.patches) // 36 if pool.patches else 0} crops x 36) -> {out}")
    return 0


def _cmd_patches(args) -> int:
    cfg = _config(args)
    if args.image:
        cfg.image = args.image
    cfg.validate()
    img = read_raster(cfg.image)
    gray = img if img.channels == 1 else to_grayscale(img)
    mask = segment_artifacts(gray, cfg.artifact_dark_threshold)
    pset = extract_ground_truth_patches(
        img, mask, patch_size=cfg.patches_patch_size, stride=cfg.patches_stride
    )
    out = Path(cfg.out_dir) / "patches"
    save_patch_set(out, pset)
    print(f"ground-truth patches: {len(pset.patches)} ({len(pset.patches) // 8} crops x 8) -> {out}")
    return 0


def _cmd_anchors(args) -> int:
    cfg = _config(args)
    try:
        w, h = (int(v) for v in args.image_size.lower().split("x"))
    except ValueError:
        raise ConfigError(f"--image-size must look like 1024x768, got {args.image_size!r}") from None
    boxes = []
    for path in args.roi_files:
        for roi in parse_roi_file(path):
            boxes.append((roi.w * w, roi.h * h))
    anchors = kmeans_anchors(boxes, k=args.k, seed=cfg.seed)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{aw:.1f} {ah:.1f}" for aw, ah in anchors.anchors]
    (out_dir / "anchors.txt").write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return 0


def _cmd_thin(args) -> int:
    cfg = _config(args)
    mask = read_mask(args.mask)
    skel = thin(mask)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_mask(out_dir / "skeleton.png", skel.mask)
    print(f"thinned {mask.count()} -> {skel.mask.count()} px -> {out_dir / 'skeleton.png'}")
    return 0


def _cmd_extract(args) -> int:
    cfg = _config(args)
    skel_mask = read_mask(args.skeleton)
    from .thinning import Skeleton

    skel = Skeleton(skel_mask)
    nodes = detect_nodes(skel)
    extraction = extract_edges(skel, nodes, cfg.max_dilation_rounds)
    thickness = distance_transform(read_mask(args.mask)) if args.mask else None
    graph = build_graph(skel, nodes, extraction.resolved, thickness)
    graph.meta["source"] = Path(args.skeleton).name
    if args.roi:
        rois = parse_roi_file(args.roi)
        graph, unmatched = classify_nodes(graph, rois, (skel.width, skel.height))
        for u in unmatched:
            print(f"unmatched: {u}", file=sys.stderr)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "graph.json").write_bytes(serialize(graph, "json"))
    (out_dir / "graph.graphml").write_bytes(serialize(graph, "graphml"))
    print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges, {len(extraction.spurs)} spurs -> {out_dir}")
    return 0


def _cmd_render(args) -> int:
    cfg = _config(args)
    from .thinning import Skeleton

    img = read_raster(args.image)
    skel = Skeleton(read_mask(args.skeleton))
    fmt = "graphml" if args.graph.endswith(".graphml") else "json"
    graph = parse(Path(args.graph).read_bytes(), fmt)
    overlay = render_overlay(img, skel, graph)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_raster(out_dir / "overlay.png", overlay)
    print(f"overlay -> {out_dir / 'overlay.png'}")
    return 0


def _cmd_edit(args) -> int:
    cfg = _config(args)
    fmt = "graphml" if args.graph.endswith(".graphml") else "json"
    graph = parse(Path(args.graph).read_bytes(), fmt)
    edits = []
    for ln, line in enumerate(Path(args.edits).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            edits.append(GraphEdit.from_dict(json.loads(line)))
        except (json.JSONDecodeError, ValueError) as exc:
            raise ConfigError(f"edit file line {ln}: {exc}") from None
    graph = replay(graph, edits)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"edited.{ 'graphml' if fmt == 'graphml' else 'json' }"
    out_path.write_bytes(serialize(graph, fmt))
    print(f"applied {len(edits)} edits -> {out_path}")
    return 0


def _cmd_batch(args) -> int:
    from concurrent.futures import ThreadPoolExecutor

    cfg = _config(args)
    base_out = Path(cfg.out_dir)

    def one(image: str) -> tuple[str, str]:
        import copy

        c = copy.deepcopy(cfg)
        c.image = image
        c.out_dir = str(base_out / Path(image).stem)
        try:
            res = run_pipeline(c)
            return image, f"ok: {len(res.graph.nodes)} nodes, {len(res.graph.edges)} edges"
        except (StageError, ConfigError, OSError, ValueError) as exc:
            return image, f"failed: {exc}"

    failures = 0
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        for image, outcome in pool.map(one, args.images):
            print(f"{image}: {outcome}")
            if outcome.startswith("failed"):
                failures += 1
    return 2 if failures else 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(runs_dir=args.runs_dir, debug=args.debug, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neurograph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[], help="run the full extraction pipeline")
    _add_common(p)
    p.add_argument("image", nargs="?", help="input image (overrides input.image)")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("mask-pool", help="build the artifact-mask augmentation pool")
    _add_common(p)
    p.add_argument("image", nargs="?", help="input image (overrides input.image)")
    p.set_defaults(fn=_cmd_mask_pool)

    p = sub.add_parser("patches", help="extract clean ground-truth patches")
    _add_common(p)
    p.add_argument("image", nargs="?", help="input image (overrides input.image)")
    p.set_defaults(fn=_cmd_patches)

    p = sub.add_parser("anchors", help="cluster labeled boxes into anchor priors")
    _add_common(p)
    p.add_argument("roi_files", nargs="+", help="ROI label files")
    p.add_argument("--k", type=int, default=6, help="number of anchors")
    p.add_argument("--image-size", required=True, help="pixel size of labeled images, e.g. 1024x768")
    p.set_defaults(fn=_cmd_anchors)

    p = sub.add_parser("thin", help="thin a {0,255} mask PNG to a skeleton")
    _add_common(p)
    p.add_argument("mask", help="mask PNG")
    p.set_defaults(fn=_cmd_thin)

    p = sub.add_parser("extract", help="extract a graph from a skeleton PNG")
    _add_common(p)
    p.add_argument("skeleton", help="skeleton PNG")
    p.add_argument("--mask", help="pre-thinning mask PNG for thickness weights")
    p.add_argument("--roi", help="ROI label file for node classes")
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("render", help="render the node/edge/skeleton overlay")
    _add_common(p)
    p.add_argument("image", help="base image PNG")
    p.add_argument("skeleton", help="skeleton PNG")
    p.add_argument("graph", help="graph .json or .graphml")
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("edit", help="apply an edit log (one JSON edit per line) to a graph")
    _add_common(p)
    p.add_argument("graph", help="graph .json or .graphml")
    p.add_argument("edits", help="edit file, line-delimited JSON")
    p.set_defaults(fn=_cmd_edit)

    p = sub.add_parser("batch", help="run the pipeline over many images concurrently")
    _add_common(p)
    p.add_argument("images", nargs="+", help="input images; each gets out_dir/<stem>/")
    p.add_argument("--jobs", type=int, default=4, help="concurrent runs")
    p.set_defaults(fn=_cmd_batch)

    p = sub.add_parser("serve", help="start the curation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.add_argument("--runs-dir", default="runs")
    p.add_argument("--ui-dir", default=None, help="directory with the built UI bundle")
    p.add_argument("--debug", action="store_true", help="enable the integrity endpoint")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"neurograph: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"neurograph: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"neurograph: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
