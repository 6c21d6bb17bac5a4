"""Core raster types and the classical image transforms shared by every stage.

All images are 8-bit per channel, either single-channel grayscale or RGB.
Values are immutable once constructed: the backing numpy arrays are marked
read-only, and every operation returns a fresh value.

Border conventions: morphological operations treat out-of-image pixels as
background; Gaussian smoothing reflects at the border (edge pixel included).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

# ITU-R 601 luma weights, scaled to integers so the conversion is exact.
_LUMA_R, _LUMA_G, _LUMA_B = 299, 587, 114


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Raster:
    """A width x height pixel grid, 8 bits per channel, 1 or 3 channels.

    ``pixels`` is (height, width) for grayscale or (height, width, 3) for RGB.
    """

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.dtype != np.uint8:
            raise ValueError(f"raster pixels must be uint8, got {p.dtype}")
        if p.ndim == 2:
            pass
        elif p.ndim == 3 and p.shape[2] == 3:
            pass
        else:
            raise ValueError(f"raster shape must be (h, w) or (h, w, 3), got {p.shape}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("raster must be at least 1x1")
        object.__setattr__(self, "pixels", _freeze(p))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    def at(self, x: int, y: int):
        """Pixel value at (x, y). Out-of-range access raises, never wraps."""
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"pixel ({x}, {y}) outside {self.width}x{self.height} raster")
        return self.pixels[y, x]


@dataclass(frozen=True)
class BitMask:
    """A binary raster: one boolean per pixel, row-major."""

    bits: np.ndarray

    def __post_init__(self):
        b = self.bits
        if b.dtype != np.bool_:
            raise ValueError(f"mask bits must be bool, got {b.dtype}")
        if b.ndim != 2:
            raise ValueError(f"mask shape must be (h, w), got {b.shape}")
        object.__setattr__(self, "bits", _freeze(b))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(self.bits.sum())

    def same_shape(self, other) -> bool:
        return self.bits.shape == (other.height, other.width)


@dataclass(frozen=True)
class StructuringElement:
    """Neighborhood shape for dilation and erosion.

    ``square`` of radius r covers all offsets with max(|dx|, |dy|) <= r.
    ``disk`` of radius r covers all offsets with dx^2 + dy^2 <= r^2; a disk
    of diameter d is the disk of radius d / 2. The origin is always included.
    """

    shape: str
    radius: float

    def __post_init__(self):
        if self.shape not in ("square", "disk"):
            raise ValueError(f"unknown structuring element shape {self.shape!r}")
        if self.radius < 0:
            raise ValueError("structuring element radius must be >= 0")

    @classmethod
    def disk_of_diameter(cls, d: float) -> "StructuringElement":
        return cls("disk", d / 2.0)

    def footprint(self) -> np.ndarray:
        """Boolean offset grid of side 2 * floor(radius) + 1, origin at center."""
        r = int(math.floor(self.radius))
        side = 2 * r + 1
        dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
        if self.shape == "square":
            fp = np.ones((side, side), dtype=bool)
        else:
            fp = (dx * dx + dy * dy) <= self.radius * self.radius + 1e-9
        fp[r, r] = True
        return fp

    def offsets(self) -> list[tuple[int, int]]:
        """(dx, dy) offsets covered by the element, in raster-scan order."""
        fp = self.footprint()
        r = fp.shape[0] // 2
        return [(int(x) - r, int(y) - r) for y, x in np.argwhere(fp).tolist()]


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel non-negative integer labels; 0 is background, components 1..K."""

    labels: np.ndarray

    def __post_init__(self):
        lab = self.labels
        if not np.issubdtype(lab.dtype, np.integer):
            raise ValueError(f"labels must be integers, got {lab.dtype}")
        if lab.ndim != 2:
            raise ValueError(f"label map shape must be (h, w), got {lab.shape}")
        if lab.size and lab.min() < 0:
            raise ValueError("labels must be non-negative")
        k = int(lab.max()) if lab.size else 0
        if k > 0:
            present = np.unique(lab)
            want = np.arange(0, k + 1) if 0 in present else np.arange(1, k + 1)
            if not np.array_equal(present, want):
                raise ValueError("labels must form a contiguous range 1..K")
        object.__setattr__(self, "labels", _freeze(lab.astype(np.int32)))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def count(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0


def to_grayscale(img: Raster) -> Raster:
    """RGB to grayscale with ITU-R 601 luma, rounded half away from zero."""
    if img.channels == 1:
        raise ValueError("already grayscale")
    p = img.pixels.astype(np.int64)
    luma = (_LUMA_R * p[:, :, 0] + _LUMA_G * p[:, :, 1] + _LUMA_B * p[:, :, 2] + 500) // 1000
    return Raster(luma.astype(np.uint8))


def threshold(img: Raster, t: int, mode: str = "below") -> BitMask:
    """Binarize: ``below`` sets bits where pixel < t, ``above`` where pixel >= t."""
    if img.channels != 1:
        raise ValueError("threshold expects a grayscale raster")
    if mode == "below":
        return BitMask(img.pixels < t)
    if mode == "above":
        return BitMask(img.pixels >= t)
    raise ValueError(f"unknown threshold mode {mode!r}")


def otsu_threshold(img: Raster) -> int:
    """Threshold maximizing between-class variance over the 256-bin histogram.

    The returned t splits pixels into {< t} and {>= t}. Ties resolve to the
    smallest t. A constant image has no split and is rejected.
    """
    if img.channels != 1:
        raise ValueError("otsu expects a grayscale raster")
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        raise ValueError("degenerate histogram")
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    best_t, best_var = 1, -1.0
    for t in range(1, 256):
        w0 = hist[:t].sum()
        w1 = total - w0
        if w0 == 0 or w1 == 0:
            continue
        mu0 = (levels[:t] * hist[:t]).sum() / w0
        mu1 = (levels[t:] * hist[t:]).sum() / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var + 1e-12:
            best_var = var
            best_t = t
    return best_t


def dilate(mask: BitMask, se: StructuringElement) -> BitMask:
    """Set each output bit iff any input bit lies under the translated element."""
    out = ndimage.binary_dilation(mask.bits, structure=se.footprint(), border_value=0)
    return BitMask(out)


def erode(mask: BitMask, se: StructuringElement) -> BitMask:
    """Set each output bit iff all bits under the element are set; border is background."""
    out = ndimage.binary_erosion(mask.bits, structure=se.footprint(), border_value=0)
    return BitMask(out)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: Raster, sigma: float) -> Raster:
    """Separable Gaussian smoothing, kernel cut at +-ceil(3 sigma), reflect border."""
    if img.channels != 1:
        raise ValueError("gaussian_blur expects a grayscale raster")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    k = _gaussian_kernel(sigma)
    f = img.pixels.astype(np.float64)
    f = ndimage.correlate1d(f, k, axis=0, mode="reflect")
    f = ndimage.correlate1d(f, k, axis=1, mode="reflect")
    return Raster(np.clip(np.floor(f + 0.5), 0, 255).astype(np.uint8))


_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def connected_components(mask: BitMask, connectivity: int = 8) -> LabelMap:
    """Label set bits 1..K under 4- or 8-adjacency.

    Labels are assigned in raster-scan order of each component's first pixel,
    independent of how the underlying labelling pass numbers them.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    structure = _STRUCT_4 if connectivity == 4 else _STRUCT_8
    raw, k = ndimage.label(mask.bits, structure=structure)
    if k == 0:
        return LabelMap(raw)
    flat = raw.ravel()
    first = np.full(k + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size))
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(k + 1, dtype=np.int32)
    remap[1 + order] = np.arange(1, k + 1)
    return LabelMap(remap[raw])


def distance_transform(mask: BitMask) -> np.ndarray:
    """Exact Euclidean distance from each set pixel to the nearest unset pixel.

    Off-image pixels count as unset, so a fully set mask still has finite
    distances. Unset pixels map to 0. Returns float64 of the mask's shape.
    """
    padded = np.zeros((mask.height + 2, mask.width + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask.bits
    d = ndimage.distance_transform_edt(padded)
    return d[1:-1, 1:-1]


# ---------------------------------------------------------------------------
# PNG I/O. Grayscale and RGB rasters are 8-bit PNG; masks are {0, 255};
# label maps are 16-bit grayscale PNG (K <= 65535).
# ---------------------------------------------------------------------------


def read_raster(path) -> Raster:
    """Read a PNG as a raster, normalizing higher bit depths to 8 bits."""
    img = Image.open(path)
    if img.mode in ("I", "I;16", "I;16B"):
        a = np.asarray(img, dtype=np.float64)
        a = np.floor(a * (255.0 / 65535.0) + 0.5)
        return Raster(np.clip(a, 0, 255).astype(np.uint8))
    if img.mode == "L":
        return Raster(np.asarray(img, dtype=np.uint8))
    if img.mode != "RGB":
        img = img.convert("RGB")
    return Raster(np.asarray(img, dtype=np.uint8))


def write_raster(path, img: Raster) -> None:
    Image.fromarray(np.asarray(img.pixels)).save(path, format="PNG")


def read_mask(path) -> BitMask:
    img = Image.open(path).convert("L")
    return BitMask(np.asarray(img, dtype=np.uint8) >= 128)


def write_mask(path, mask: BitMask) -> None:
    Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8)).save(path, format="PNG")


def read_labels(path) -> LabelMap:
    img = Image.open(path)
    a = np.asarray(img)
    return LabelMap(a.astype(np.int32))


def write_labels(path, labels: LabelMap) -> None:
    if labels.count > 65535:
        raise ValueError(f"{labels.count} labels exceed 16-bit PNG range")
    a = labels.labels.astype(np.uint16)
    Image.fromarray(a).save(path, format="PNG")
