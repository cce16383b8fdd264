"""Core lattice types and per-node neighborhood statistics.

Images are row-major (height, width, channels) float arrays with all
intensities normalized to [0, 1], whatever the source bit depth. Each
pixel i (flat index row*width + col) gets an encoded statistic: either a
smoothed per-channel histogram over the window centered at i, or the raw
channel vector itself (Dirac).
"""

from dataclasses import dataclass, field

import numpy as np

UNMARKED = 0
FOREGROUND = 1
BACKGROUND = 2

HISTOGRAM = "histogram"
DIRAC = "dirac"


class InvalidWindowError(ValueError):
    """Statistics window is not usable for the given image."""


@dataclass
class ImageGrid:
    """Observation field: a pixel lattice with channel values in [0, 1]."""

    width: int
    height: int
    channels: int
    data: np.ndarray  # (height, width, channels) float64

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != (self.height, self.width, self.channels):
            raise ValueError(
                f"data shape {self.data.shape} does not match "
                f"{(self.height, self.width, self.channels)}"
            )
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        if self.data.size and (self.data.min() < 0.0 or self.data.max() > 1.0):
            raise ValueError("intensities must lie in [0, 1]")

    @property
    def n_nodes(self) -> int:
        return self.width * self.height

    def pixels(self) -> np.ndarray:
        """Per-node channel matrix, shape (n_nodes, channels)."""
        return self.data.reshape(self.n_nodes, self.channels)

    @classmethod
    def from_array(cls, arr) -> "ImageGrid":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        h, w, c = arr.shape
        return cls(width=w, height=h, channels=c, data=arr)


@dataclass
class ScribbleMask:
    """User seed strokes: one of {unmarked, foreground, background} per pixel."""

    width: int
    height: int
    labels: np.ndarray  # (height, width) uint8 in {0,1,2}

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.labels.shape != (self.height, self.width):
            raise ValueError("scribble dimensions do not match declared size")
        if self.labels.size and self.labels.max() > BACKGROUND:
            raise ValueError("scribble labels must be in {0,1,2}")

    @classmethod
    def empty(cls, width: int, height: int) -> "ScribbleMask":
        return cls(width, height, np.zeros((height, width), dtype=np.uint8))

    def has_both_classes(self) -> bool:
        flat = self.labels
        return bool((flat == FOREGROUND).any() and (flat == BACKGROUND).any())


@dataclass
class MaskMeta:
    seed: int | None = None
    gamma: float | None = None
    divergence: str | None = None
    expected_degree: float | None = None


@dataclass
class SegmentationMask:
    """Binary label field (1 = foreground) plus run provenance."""

    width: int
    height: int
    labels: np.ndarray  # (height, width) uint8 in {0,1}
    meta: MaskMeta = field(default_factory=MaskMeta)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.labels.shape != (self.height, self.width):
            raise ValueError("mask dimensions do not match declared size")


@dataclass
class EncodedStats:
    """Statistic attached to one node: smoothed histogram or raw channels."""

    kind: str
    bins: int  # bins per channel for histograms, 0 for Dirac
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)


@dataclass
class StatsField:
    """Per-node EncodedStats for a whole image, packed as one matrix."""

    kind: str
    bins: int
    channels: int
    values: np.ndarray  # (n_nodes, dim)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    def node(self, i: int) -> EncodedStats:
        return EncodedStats(self.kind, self.bins, self.values[i])


def compute_encoded_stats(img: ImageGrid, window: int = 5, kind: str = HISTOGRAM,
                          K: int = 16) -> StatsField:
    """Encode every node's neighborhood as a statistic.

    Histogram kind: per-channel K-bin histogram over the window centered
    at the node, replicate-padded at borders, with add-one smoothing
    (pseudo-count 1 per bin) and per-channel normalization. Dirac kind:
    the node's channel vector as-is.

    Args:
        img: source lattice.
        window: odd side length of the statistics window.
        kind: "histogram" or "dirac".
        K: bins per channel (histogram kind only), at least 2.

    Returns:
        StatsField with values of shape (n_nodes, channels*K) for
        histograms or (n_nodes, channels) for Dirac.
    """
    if kind == DIRAC:
        return StatsField(DIRAC, 0, img.channels, img.pixels().copy())
    if kind != HISTOGRAM:
        raise ValueError(f"unknown stats kind {kind!r}")
    if window < 1 or window % 2 == 0:
        raise InvalidWindowError("window must be odd and >= 1")
    if window > 2 * min(img.width, img.height) + 1:
        raise InvalidWindowError(
            f"window {window} too large for {img.width}x{img.height} image"
        )
    if K < 2:
        raise ValueError("histogram needs K >= 2")

    h, w, c = img.height, img.width, img.channels
    n = h * w
    half = window // 2
    # bin index per pixel per channel; 1.0 falls in the top bin
    idx = np.minimum((img.data * K).astype(np.int64), K - 1)
    padded = np.pad(idx, ((half, half), (half, half), (0, 0)), mode="edge")

    counts = np.zeros((n, c, K), dtype=np.float64)
    flat_node = np.arange(n)
    for dy in range(window):
        for dx in range(window):
            shifted = padded[dy:dy + h, dx:dx + w, :].reshape(n, c)
            for ch in range(c):
                np.add.at(counts[:, ch, :], (flat_node, shifted[:, ch]), 1.0)

    counts += 1.0  # add-one smoothing
    counts /= (window * window + K)
    return StatsField(HISTOGRAM, K, c, counts.reshape(n, c * K))


def local_pairs(img: ImageGrid) -> np.ndarray:
    """All 4-connected lattice pairs, each exactly once, as an (m, 2) array.

    Pairs are (i, j) flat indices with i < j; horizontal pairs first,
    then vertical, both in row-major order.
    """
    h, w = img.height, img.width
    ids = np.arange(h * w).reshape(h, w)
    horiz = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vert = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    return np.concatenate([horiz, vert], axis=0)


def node_positions(img: ImageGrid) -> np.ndarray:
    """Per-node (row, col) scaled to [0, 1], shape (n_nodes, 2)."""
    h, w = img.height, img.width
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    pos = np.stack([rows.ravel(), cols.ravel()], axis=1).astype(np.float64)
    pos[:, 0] /= max(h - 1, 1)
    pos[:, 1] /= max(w - 1, 1)
    return pos
