"""neurograph: attributed-graph extraction from images of cultured neuronal networks."""

__version__ = "0.1.0"

from .artifact import (
    MaskPool,
    PatchSet,
    build_mask_pool,
    extract_ground_truth_patches,
    inpaint,
    segment_artifacts,
)
from .graph_extract import build_graph, classify_nodes, detect_nodes, extract_edges
from .graph_model import ExtractedGraph, GraphEdge, GraphEdit, GraphNode, apply_edit, parse, replay, serialize
from .pipeline import PipelineConfig, PipelineResult, render_overlay, run_pipeline
from .raster import (
    BitMask,
    LabelMap,
    Raster,
    StructuringElement,
    connected_components,
    dilate,
    distance_transform,
    erode,
    gaussian_blur,
    otsu_threshold,
    read_mask,
    read_raster,
    threshold,
    to_grayscale,
    write_mask,
    write_raster,
)
from .roi import AnchorSet, Roi, kmeans_anchors, parse_roi_file
from .segmentation import MarkerSet, auto_markers, guided_watershed, structure_mask
from .thinning import Skeleton, thin
