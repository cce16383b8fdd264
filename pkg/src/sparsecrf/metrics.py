"""Segmentation quality metrics: region F1, boundary F1, IOU.

Foreground is the positive class. Boundary pixels are positive pixels
with at least one 4-neighbor of the other class, plus positive pixels on
the image frame. Boundary F1 matches boundary pixels bidirectionally
with a Euclidean distance tolerance (2 px by default).

Empty-mask conventions: when both prediction and ground truth have no
positives (or no boundary pixels), the score is 1.0; when exactly one
side is empty, 0.0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .field import SegmentationMask


@dataclass
class ConfusionCounts:
    TP: int
    FP: int
    FN: int
    TN: int

    @property
    def total(self) -> int:
        return self.TP + self.FP + self.FN + self.TN


def _as_binary(mask) -> np.ndarray:
    if isinstance(mask, SegmentationMask):
        return mask.labels.astype(bool)
    return np.asarray(mask).astype(bool)


def confusion_counts(pred, gt, positive: int = 1) -> ConfusionCounts:
    p = _as_binary(pred)
    g = _as_binary(gt)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    if positive == 0:
        p, g = ~p, ~g
    return ConfusionCounts(
        TP=int(np.sum(p & g)),
        FP=int(np.sum(p & ~g)),
        FN=int(np.sum(~p & g)),
        TN=int(np.sum(~p & ~g)),
    )


def region_f1(c: ConfusionCounts) -> float:
    """2*TP / (2*TP + FN + FP); 1.0 when pred and gt are both empty."""
    denom = 2 * c.TP + c.FN + c.FP
    if denom == 0:
        return 1.0
    return 2 * c.TP / denom


def iou(c: ConfusionCounts) -> float:
    """TP / (TP + FP + FN); 1.0 when pred and gt are both empty."""
    denom = c.TP + c.FP + c.FN
    if denom == 0:
        return 1.0
    return c.TP / denom


def boundary_pixels(mask, positive: int = 1) -> np.ndarray:
    """Positive pixels bordering the other class or the image frame."""
    m = _as_binary(mask)
    if positive == 0:
        m = ~m
    other = ~m
    border = np.zeros_like(m)
    border[1:, :] |= other[:-1, :]
    border[:-1, :] |= other[1:, :]
    border[:, 1:] |= other[:, :-1]
    border[:, :-1] |= other[:, 1:]
    border[0, :] = True
    border[-1, :] = True
    border[:, 0] = True
    border[:, -1] = True
    return m & border


def boundary_f1(pred, gt, tol: float = 2.0, positive: int = 1) -> float:
    """Boundary F1 with a Euclidean matching tolerance in pixels.

    A predicted boundary pixel is a true positive if some ground-truth
    boundary pixel lies within `tol`; precision and recall are computed
    bidirectionally and combined as F1.
    """
    p = _as_binary(pred)
    g = _as_binary(gt)
    if p.shape != g.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {g.shape}")
    pb = boundary_pixels(p, positive)
    gb = boundary_pixels(g, positive)
    n_p = int(pb.sum())
    n_g = int(gb.sum())
    if n_p == 0 and n_g == 0:
        return 1.0
    if n_p == 0 or n_g == 0:
        return 0.0
    dist_to_g = distance_transform_edt(~gb)
    dist_to_p = distance_transform_edt(~pb)
    precision = float(np.sum(dist_to_g[pb] <= tol)) / n_p
    recall = float(np.sum(dist_to_p[gb] <= tol)) / n_g
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class MetricRecord:
    name: str
    region_f1: float
    boundary_f1: float
    iou: float
    runtime_ms: float


def evaluate_pair(pred, gt, name: str = "", tol: float = 2.0) -> MetricRecord:
    import time

    t0 = time.perf_counter()
    c = confusion_counts(pred, gt)
    rec = MetricRecord(
        name=name,
        region_f1=region_f1(c),
        boundary_f1=boundary_f1(pred, gt, tol=tol),
        iou=iou(c),
        runtime_ms=0.0,
    )
    rec.runtime_ms = (time.perf_counter() - t0) * 1e3
    return rec


def records_to_csv(records: list[MetricRecord], include_average: bool = True) -> str:
    lines = ["name,region_f1,boundary_f1,iou,runtime_ms"]
    for r in records:
        lines.append(f"{r.name},{r.region_f1:.5f},{r.boundary_f1:.5f},"
                     f"{r.iou:.5f},{r.runtime_ms:.3f}")
    if include_average and records:
        lines.append(
            "Average,"
            f"{np.mean([r.region_f1 for r in records]):.5f},"
            f"{np.mean([r.boundary_f1 for r in records]):.5f},"
            f"{np.mean([r.iou for r in records]):.5f},"
            f"{np.mean([r.runtime_ms for r in records]):.3f}"
        )
    return "\n".join(lines) + "\n"
