"""Detector-output ingestion and anchor-box priors.

ROI label files follow the common detector text convention, one object per
line: ``class_id cx cy w h [confidence]`` with center and size normalized to
the image. Classes: 0 neuron, 1 astrocyte, 2 cluster.

Anchor priors come from k-means over box dimensions under the 1 - IoU
distance (boxes compared as if co-centered), seeded k-means++ initialization,
and per-cluster mean updates. Iterations never accept a cost increase, so
the reported cost sequence is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

CLASS_NAMES = {0: "neuron", 1: "astrocyte", 2: "cluster"}
NAME_TO_CLASS = {v: k for k, v in CLASS_NAMES.items()}


@dataclass(frozen=True)
class Roi:
    """One detected object: class, normalized center/size, confidence."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float
    confidence: float = 1.0

    def __post_init__(self):
        if self.class_id not in CLASS_NAMES:
            raise ValueError(f"unknown class_id {self.class_id}")
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"center ({self.cx}, {self.cy}) outside [0,1]")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"size ({self.w}, {self.h}) outside (0,1]")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0,1]")

    @property
    def class_name(self) -> str:
        return CLASS_NAMES[self.class_id]

    def center_px(self, width: int, height: int) -> tuple[float, float]:
        return self.cx * width, self.cy * height

    def size_px(self, width: int, height: int) -> tuple[float, float]:
        return self.w * width, self.h * height


@dataclass(frozen=True)
class AnchorSet:
    """k anchor (w, h) pairs in pixels, sorted by area ascending."""

    anchors: list[tuple[float, float]]
    k: int

    def __post_init__(self):
        if len(self.anchors) != self.k:
            raise ValueError("anchor count must equal k")
        for w, h in self.anchors:
            if w <= 0 or h <= 0:
                raise ValueError("anchor dimensions must be positive")


def parse_roi_file(path) -> list[Roi]:
    """Read one ROI per non-empty line; malformed records raise with line number."""
    rois = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (5, 6):
            raise ValueError(f"roi file line {ln}: expected 5 or 6 fields, got {len(parts)}")
        try:
            class_id = int(parts[0])
            nums = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise ValueError(f"roi file line {ln}: {exc}") from None
        try:
            rois.append(Roi(class_id, *nums))
        except ValueError as exc:
            raise ValueError(f"roi file line {ln}: {exc}") from None
    return rois


def save_roi_file(path, rois: list[Roi]) -> None:
    lines = [f"{r.class_id} {r.cx} {r.cy} {r.w} {r.h} {r.confidence}" for r in rois]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def iou_centered(a, b) -> float:
    """IoU of two boxes placed concentrically; arguments are (w, h)."""
    inter = min(a[0], b[0]) * min(a[1], b[1])
    union = a[0] * a[1] + b[0] * b[1] - inter
    return inter / union


def _distances(boxes: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """1 - IoU matrix, boxes (n, 2) x centers (k, 2)."""
    inter = np.minimum(boxes[:, None, :], centers[None, :, :]).prod(axis=2)
    union = boxes.prod(axis=1)[:, None] + centers.prod(axis=1)[None, :] - inter
    return 1.0 - inter / union


def _kmeans_pp_init(boxes: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [boxes[int(rng.integers(len(boxes)))]]
    while len(centers) < k:
        d = _distances(boxes, np.array(centers)).min(axis=1)
        weights = d * d
        total = weights.sum()
        if total <= 0:
            # all boxes coincide with chosen centers; any remaining pick works
            idx = int(rng.integers(len(boxes)))
        else:
            idx = int(rng.choice(len(boxes), p=weights / total))
        centers.append(boxes[idx])
    return np.array(centers, dtype=np.float64)


def kmeans_anchors(
    boxes,
    k: int,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-6,
    on_iteration=None,
) -> AnchorSet:
    """Cluster box dimensions into k anchors under the 1 - IoU distance.

    ``on_iteration`` receives the total cost after initialization and after
    each accepted Lloyd iteration.
    """
    arr = np.asarray(sorted((float(w), float(h)) for w, h in boxes), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("boxes must be nonempty")
    if (arr <= 0).any():
        raise ValueError("box dimensions must be positive")
    distinct = len({(w, h) for w, h in arr.tolist()})
    if not (1 <= k <= distinct):
        raise ValueError(f"k={k} must be between 1 and the distinct box count {distinct}")
    # canonical area-sorted input order makes the seeded init permutation-proof
    order = np.lexsort((arr[:, 1], arr[:, 0], arr.prod(axis=1)))
    arr = arr[order]
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(arr, k, rng)
    assign = _distances(arr, centers).argmin(axis=1)
    cost = float(_distances(arr, centers)[np.arange(len(arr)), assign].sum())
    if on_iteration is not None:
        on_iteration(cost)
    for _ in range(max_iters):
        new_centers = centers.copy()
        for j in range(k):
            members = arr[assign == j]
            if len(members):
                new_centers[j] = members.mean(axis=0)
        new_assign = _distances(arr, new_centers).argmin(axis=1)
        new_cost = float(_distances(arr, new_centers)[np.arange(len(arr)), new_assign].sum())
        if new_cost > cost + 1e-12:
            break  # mean update would worsen the IoU objective; keep previous state
        moved = float(np.abs(new_centers - centers).max())
        fixpoint = bool((new_assign == assign).all())
        centers, assign, cost = new_centers, new_assign, new_cost
        if on_iteration is not None:
            on_iteration(cost)
        if fixpoint and moved < tol:
            break
    anchors = sorted(
        ((float(w), float(h)) for w, h in centers),
        key=lambda wh: (wh[0] * wh[1], wh[0], wh[1]),
    )
    return AnchorSet(anchors, k)
