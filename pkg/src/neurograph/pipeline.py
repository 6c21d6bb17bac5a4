"""Configuration-driven orchestration of the full extraction run.

A run reads one image and executes: grayscale conversion, artifact masking,
diffusion fill, structure segmentation (watershed or an external mask),
thinning, node/edge extraction, optional ROI class transfer, and graph
serialization. Stage outputs can be dumped as numbered PNGs for visual
inspection; outputs are byte-identical for identical config and seed.

Configuration is an INI file; every value can be overridden on the command
line as ``--set section.key=value``. See ``DEFAULT_CONFIG_TEXT`` for the
full key set and defaults.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .artifact import inpaint, segment_artifacts
from .graph_extract import EdgeExtraction, build_graph, classify_nodes, detect_nodes, extract_edges
from .graph_model import ExtractedGraph, serialize
from .raster import (
    BitMask,
    Raster,
    StructuringElement,
    distance_transform,
    read_mask,
    read_raster,
    to_grayscale,
    write_mask,
    write_raster,
)
from .roi import parse_roi_file
from .segmentation import auto_markers, guided_watershed, load_markers, structure_mask
from .thinning import Skeleton, thin

DEFAULT_CONFIG_TEXT = """\
[input]
image =
roi_file =

[output]
dir = out
dump_intermediates = false

[artifact]
enabled = true
dark_threshold =
grow_shape = disk
grow_diameter = 5

[inpaint]
max_iters = 4000
tol = 0.05

[segmentation]
segmenter = watershed
external_mask =
markers_file =
fg_quantile = 0.9
bg_quantile = 0.2
min_area = 0

[thinning]
enabled = true

[graph]
max_dilation_rounds = 3

[maskpool]
patch_size = 256
min_coverage = 0.25
n_crops = 64

[patches]
patch_size = 256
stride = 256

[pipeline]
seed = 0
"""


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    image: str = ""
    roi_file: str = ""
    out_dir: str = "out"
    dump_intermediates: bool = False
    artifact_enabled: bool = True
    artifact_dark_threshold: int = -1  # required when the artifact stage is on
    artifact_grow_shape: str = "disk"
    artifact_grow_diameter: float = 5.0
    inpaint_max_iters: int = 4000
    inpaint_tol: float = 0.05
    segmenter: str = "watershed"
    external_mask: str = ""
    markers_file: str = ""
    fg_quantile: float = 0.9
    bg_quantile: float = 0.2
    min_area: int = 0
    thinning_enabled: bool = True
    max_dilation_rounds: int = 3
    maskpool_patch_size: int = 256
    maskpool_min_coverage: float = 0.25
    maskpool_n_crops: int = 64
    patches_patch_size: int = 256
    patches_stride: int = 256
    seed: int = 0

    def validate(self) -> None:
        if not self.image:
            raise ConfigError("input.image is required")
        if self.artifact_enabled and not (0 <= self.artifact_dark_threshold <= 255):
            raise ConfigError("artifact.dark_threshold must be set in 0..255 when artifact.enabled")
        if self.artifact_grow_shape not in ("disk", "square"):
            raise ConfigError(f"artifact.grow_shape must be disk or square, got {self.artifact_grow_shape!r}")
        if self.artifact_grow_diameter <= 0:
            raise ConfigError("artifact.grow_diameter must be > 0")
        if self.inpaint_max_iters < 1:
            raise ConfigError("inpaint.max_iters must be >= 1")
        if self.inpaint_tol <= 0:
            raise ConfigError("inpaint.tol must be > 0")
        if self.segmenter not in ("watershed", "external-mask"):
            raise ConfigError(f"segmentation.segmenter must be watershed or external-mask, got {self.segmenter!r}")
        if self.segmenter == "external-mask" and not self.external_mask:
            raise ConfigError("segmentation.external_mask is required for the external-mask segmenter")
        if not (0 < self.bg_quantile < self.fg_quantile < 1):
            raise ConfigError("segmentation quantiles must satisfy 0 < bg < fg < 1")
        if self.min_area < 0:
            raise ConfigError("segmentation.min_area must be >= 0")
        if self.max_dilation_rounds < 1:
            raise ConfigError("graph.max_dilation_rounds must be >= 1")
        if self.maskpool_patch_size < 1 or self.patches_patch_size < 1:
            raise ConfigError("patch sizes must be >= 1")
        if not (0 <= self.maskpool_min_coverage <= 1):
            raise ConfigError("maskpool.min_coverage must be in [0, 1]")
        if self.patches_stride < 1:
            raise ConfigError("patches.stride must be >= 1")


_KEYMAP = {
    ("input", "image"): ("image", str),
    ("input", "roi_file"): ("roi_file", str),
    ("output", "dir"): ("out_dir", str),
    ("output", "dump_intermediates"): ("dump_intermediates", "bool"),
    ("artifact", "enabled"): ("artifact_enabled", "bool"),
    ("artifact", "dark_threshold"): ("artifact_dark_threshold", int),
    ("artifact", "grow_shape"): ("artifact_grow_shape", str),
    ("artifact", "grow_diameter"): ("artifact_grow_diameter", float),
    ("inpaint", "max_iters"): ("inpaint_max_iters", int),
    ("inpaint", "tol"): ("inpaint_tol", float),
    ("segmentation", "segmenter"): ("segmenter", str),
    ("segmentation", "external_mask"): ("external_mask", str),
    ("segmentation", "markers_file"): ("markers_file", str),
    ("segmentation", "fg_quantile"): ("fg_quantile", float),
    ("segmentation", "bg_quantile"): ("bg_quantile", float),
    ("segmentation", "min_area"): ("min_area", int),
    ("thinning", "enabled"): ("thinning_enabled", "bool"),
    ("graph", "max_dilation_rounds"): ("max_dilation_rounds", int),
    ("maskpool", "patch_size"): ("maskpool_patch_size", int),
    ("maskpool", "min_coverage"): ("maskpool_min_coverage", float),
    ("maskpool", "n_crops"): ("maskpool_n_crops", int),
    ("patches", "patch_size"): ("patches_patch_size", int),
    ("patches", "stride"): ("patches_stride", int),
    ("pipeline", "seed"): ("seed", int),
}
_FIELD_TO_KEY = {v[0]: k for k, v in _KEYMAP.items()}


def _convert(raw: str, typ, where: str):
    raw = raw.strip()
    if typ is str:
        return raw
    if raw == "":
        raise ConfigError(f"{where} must not be empty")
    if typ == "bool":
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{where} must be a boolean, got {raw!r}")
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{where} must be {typ.__name__}, got {raw!r}") from None


def config_from_ini(text: str, overrides: list[str] | None = None) -> PipelineConfig:
    """Parse an INI config plus ``section.key=value`` override strings."""
    parser = configparser.ConfigParser()
    parser.read_string(text)
    cfg = PipelineConfig()
    for section in parser.sections():
        for key, raw in parser[section].items():
            entry = _KEYMAP.get((section, key))
            if entry is None:
                raise ConfigError(f"unknown config key [{section}] {key}")
            name, typ = entry
            if typ is not str and raw.strip() == "":
                continue  # blank means keep default
            setattr(cfg, name, _convert(raw, typ, f"[{section}] {key}"))
    for ov in overrides or []:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} is not of the form section.key=value")
        dotted, raw = ov.split("=", 1)
        if "." not in dotted:
            raise ConfigError(f"override key {dotted!r} is not of the form section.key")
        section, key = dotted.split(".", 1)
        entry = _KEYMAP.get((section.strip(), key.strip()))
        if entry is None:
            raise ConfigError(f"unknown config key {dotted!r}")
        name, typ = entry
        setattr(cfg, name, _convert(raw, typ, dotted))
    return cfg


def load_config(path, overrides: list[str] | None = None) -> PipelineConfig:
    return config_from_ini(Path(path).read_text(), overrides)


def config_to_ini(cfg: PipelineConfig) -> str:
    parser = configparser.ConfigParser()
    for (section, key), (name, typ) in _KEYMAP.items():
        if not parser.has_section(section):
            parser.add_section(section)
        value = getattr(cfg, name)
        if typ == "bool":
            rendered = "true" if value else "false"
        elif name == "artifact_dark_threshold" and value < 0:
            rendered = ""
        else:
            rendered = str(value)
        parser[section][key] = rendered
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


@dataclass
class PipelineResult:
    graph: ExtractedGraph
    skeleton: Skeleton
    grayscale: Raster
    preprocessed: Raster
    structure: BitMask
    artifact_mask: BitMask | None
    diagnostics: str
    out_dir: Path


def render_overlay(img: Raster, skel: Skeleton, g: ExtractedGraph) -> Raster:
    """Overlay: skeleton yellow, edge paths blue, nodes as red 3x3 squares."""
    if (img.height, img.width) != (skel.height, skel.width):
        raise ValueError("image and skeleton dimensions differ")
    gray = img if img.channels == 1 else to_grayscale(img)
    rgb = np.stack([gray.pixels] * 3, axis=2).astype(np.uint8)
    rgb[skel.mask.bits] = (255, 255, 0)
    h, w = gray.pixels.shape
    for e in g.edges:
        for x, y in e.path or []:
            xi, yi = int(round(x)), int(round(y))
            if 0 <= xi < w and 0 <= yi < h:
                rgb[yi, xi] = (0, 0, 255)
    for n in g.nodes.values():
        xi, yi = int(round(n.x)), int(round(n.y))
        y0, y1 = max(yi - 1, 0), min(yi + 2, h)
        x0, x1 = max(xi - 1, 0), min(xi + 2, w)
        if xi < -1 or yi < -1 or xi > w or yi > h:
            continue
        rgb[y0:y1, x0:x1] = (255, 0, 0)
    return Raster(rgb)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Execute all stages; any failure aborts with the stage name attached,
    keeping whatever dumps were already written."""
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dump = cfg.dump_intermediates

    def dump_raster(name, r):
        if dump:
            write_raster(out_dir / name, r)

    def dump_bits(name, m):
        if dump:
            write_mask(out_dir / name, m)

    diag_lines = [f"pipeline {__version__}", f"image: {cfg.image}"]

    def stage(name, fn):
        try:
            return fn()
        except Exception as exc:
            raise StageError(name, exc) from exc

    img = stage("load", lambda: read_raster(cfg.image))
    dump_raster("00_input.png", img)
    gray = stage("grayscale", lambda: img if img.channels == 1 else to_grayscale(img))
    dump_raster("01_grayscale.png", gray)

    artifact_mask = None
    pre = gray
    if cfg.artifact_enabled:
        grow = (
            StructuringElement.disk_of_diameter(cfg.artifact_grow_diameter)
            if cfg.artifact_grow_shape == "disk"
            else StructuringElement("square", int(cfg.artifact_grow_diameter) // 2)
        )
        artifact_mask = stage(
            "artifact-mask", lambda: segment_artifacts(gray, cfg.artifact_dark_threshold, grow)
        )
        dump_bits("02_artifact_mask.png", artifact_mask)
        diag_lines.append(f"artifact pixels: {artifact_mask.count()}")
        pre = stage(
            "inpaint",
            lambda: inpaint(gray, artifact_mask, cfg.inpaint_max_iters, cfg.inpaint_tol),
        )
        dump_raster("03_inpainted.png", pre)

    if cfg.segmenter == "external-mask":
        mask = stage("external-mask", lambda: read_mask(cfg.external_mask))
    else:
        def _watershed():
            markers = (
                load_markers(cfg.markers_file)
                if cfg.markers_file
                else auto_markers(pre, cfg.fg_quantile, cfg.bg_quantile)
            )
            labels = guided_watershed(pre, markers)
            return structure_mask(labels, cfg.min_area)

        mask = stage("segmentation", _watershed)
    dump_bits("04_structure_mask.png", mask)
    diag_lines.append(f"structure pixels: {mask.count()}")

    skel = stage("thinning", lambda: thin(mask) if cfg.thinning_enabled else Skeleton(mask))
    dump_bits("05_skeleton.png", skel.mask)

    nodes = stage("nodes", lambda: detect_nodes(skel))
    extraction: EdgeExtraction = stage(
        "edges", lambda: extract_edges(skel, nodes, cfg.max_dilation_rounds)
    )
    thickness = stage("thickness", lambda: distance_transform(mask))
    graph = stage("graph", lambda: build_graph(skel, nodes, extraction.resolved, thickness))
    graph.meta["source"] = Path(cfg.image).name
    kind_counts = {k: sum(1 for c in nodes.clusters if c.kind == k) for k in ("endpoint", "junction", "isolated")}
    diag_lines.append(
        "nodes: "
        + ", ".join(f"{v} {k}" for k, v in kind_counts.items())
        + f"; edges resolved: {len(extraction.resolved)}; spurs discarded: {len(extraction.spurs)}"
    )
    for spur in extraction.spurs:
        diag_lines.append(f"spur: segment {spur.label} with {len(spur.pixels)} px")

    if cfg.roi_file:
        def _classify():
            rois = parse_roi_file(cfg.roi_file)
            return classify_nodes(graph, rois, (gray.width, gray.height))

        graph, unmatched = stage("classify", _classify)
        diag_lines.extend(f"unmatched: {u}" for u in unmatched)
        classed = sum(1 for n in graph.nodes.values() if n.node_class != "unclassified")
        diag_lines.append(f"nodes classified: {classed}")

    overlay = stage("overlay", lambda: render_overlay(gray, skel, graph))
    dump_raster("06_overlay.png", overlay)

    (out_dir / "graph.json").write_bytes(serialize(graph, "json"))
    (out_dir / "graph.graphml").write_bytes(serialize(graph, "graphml"))
    diagnostics = "\n".join(diag_lines) + "\n"
    if dump:
        (out_dir / "diagnostics.txt").write_text(diagnostics)
        (out_dir / "effective_config.ini").write_text(config_to_ini(cfg))

    return PipelineResult(
        graph=graph,
        skeleton=skel,
        grayscale=gray,
        preprocessed=pre,
        structure=mask,
        artifact_mask=artifact_mask,
        diagnostics=diagnostics,
        out_dir=out_dir,
    )
