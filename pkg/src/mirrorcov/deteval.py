"""Detection evaluation: IoU, mask filtering, greedy matching, AP and mAP50.

Matching follows the standard protocol: detections in descending confidence
(ties keep input order), each grabbing the unmatched ground truth of its
image/class with the highest IoU at or above the threshold. AP uses
all-point interpolation (exact area under the monotone precision envelope).

File formats: detections and ground truths are JSON Lines, one object per
box: ``{"image_id", "class_id", "bbox": [x_min, y_min, x_max, y_max],
"confidence"?}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ValidationError
from .maskpipe import MaskRaster

DEFAULT_IOU_THRESHOLD = 0.5
DEFAULT_CONFIDENCE_FLOOR = 0.25


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValidationError(
                f"degenerate bbox ({self.x_min}, {self.y_min}, "
                f"{self.x_max}, {self.y_max})")

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_id: int
    bbox: BBox
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class GroundTruthBox:
    image_id: str
    class_id: int
    bbox: BBox


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    per_class_ap: dict[int, float]
    map50: float
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "per_class_ap": {str(k): v for k, v in sorted(self.per_class_ap.items())},
            "map50": self.map50,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area() + b.area() - inter)


def _box_pixel_range(lo: float, hi: float, limit: int) -> tuple[int, int]:
    # pixel centers i + 0.5 inside [lo, hi)
    start = max(0, math.ceil(lo - 0.5))
    stop = min(limit, math.ceil(hi - 0.5))
    return start, stop


def bbox_mask_fraction(bbox: BBox, mask: MaskRaster) -> float:
    """Fraction of the box's pixels (by center rule) that the mask sets."""
    x0, x1 = _box_pixel_range(bbox.x_min, bbox.x_max, mask.width)
    y0, y1 = _box_pixel_range(bbox.y_min, bbox.y_max, mask.height)
    total = (x1 - x0) * (y1 - y0)
    if total <= 0:
        return 0.0
    return float(mask.bits[y0:y1, x0:x1].sum()) / total


def filter_detections(dets: list[Detection], mask: MaskRaster,
                      min_inside: float = 0.5) -> list[Detection]:
    """Keep detections whose box overlaps the mask by at least min_inside.

    Order and confidences pass through untouched.
    """
    return [d for d in dets if bbox_mask_fraction(d.bbox, mask) >= min_inside]


def _conf_order(dets: list[Detection]) -> list[int]:
    return sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))


def match_detections(dets: list[Detection], gts: list[GroundTruthBox],
                     iou_threshold: float = DEFAULT_IOU_THRESHOLD,
                     ) -> tuple[int, int, int, list[tuple[int, int]]]:
    """Greedy confidence-ordered matching, per image and class.

    Returns (tp, fp, fn, matched pairs) with pairs as (detection index,
    ground-truth index) into the input lists.
    """
    flags, pairs = _match_flags(dets, gts, iou_threshold)
    tp = int(sum(flags))
    fp = len(dets) - tp
    fn = len(gts) - tp
    return tp, fp, fn, pairs


def _match_flags(dets, gts, iou_threshold):
    """Per-detection TP flags in input order, plus matched pairs."""
    gt_by_key: dict[tuple, list[int]] = {}
    for j, g in enumerate(gts):
        gt_by_key.setdefault((g.image_id, g.class_id), []).append(j)
    taken = [False] * len(gts)
    flags = [False] * len(dets)
    pairs: list[tuple[int, int]] = []
    for i in _conf_order(dets):
        d = dets[i]
        best_j = -1
        best_iou = 0.0
        for j in gt_by_key.get((d.image_id, d.class_id), ()):  # input order
            if taken[j]:
                continue
            v = iou(d.bbox, gts[j].bbox)
            if v >= iou_threshold and v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            flags[i] = True
            pairs.append((i, best_j))
    return flags, pairs


def average_precision(dets: list[Detection], gts: list[GroundTruthBox],
                      class_id: int,
                      iou_threshold: float = DEFAULT_IOU_THRESHOLD,
                      ) -> float | None:
    """All-point interpolated AP for one class; None when the class has no
    ground truths (excluded from mAP rather than scored zero)."""
    class_gts = [g for g in gts if g.class_id == class_id]
    if not class_gts:
        return None
    class_dets = [d for d in dets if d.class_id == class_id]
    if not class_dets:
        return 0.0
    flags, _ = _match_flags(class_dets, class_gts, iou_threshold)
    order = _conf_order(class_dets)
    tp_cum = 0
    precisions = []
    recalls = []
    for rank, i in enumerate(order, start=1):
        tp_cum += bool(flags[i])
        precisions.append(tp_cum / rank)
        recalls.append(tp_cum / len(class_gts))
    # monotone envelope, exact area under precision(recall)
    for k in range(len(precisions) - 2, -1, -1):
        precisions[k] = max(precisions[k], precisions[k + 1])
    ap = 0.0
    prev_r = 0.0
    for p, r in zip(precisions, recalls):
        if r > prev_r:
            ap += (r - prev_r) * p
            prev_r = r
    return ap


def evaluate(dets: list[Detection], gts: list[GroundTruthBox],
             iou_threshold: float = DEFAULT_IOU_THRESHOLD,
             confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR) -> EvalReport:
    """Scalar P/R at the confidence floor plus floor-independent AP/mAP50."""
    if not gts:
        raise InvalidArgumentError("cannot evaluate without ground truths")
    scored = [d for d in dets if d.confidence >= confidence_floor]
    tp, fp, fn, _ = match_detections(scored, gts, iou_threshold)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    class_ids = sorted({g.class_id for g in gts})
    per_class = {}
    for cid in class_ids:
        ap = average_precision(dets, gts, cid, iou_threshold)
        if ap is not None:
            per_class[cid] = ap
    map50 = (sum(per_class.values()) / len(per_class)) if per_class else 0.0
    return EvalReport(precision=precision, recall=recall, per_class_ap=per_class,
                      map50=map50, tp=tp, fp=fp, fn=fn)


# ---------------------------------------------------------------------------
# JSONL I/O


def _bbox_from_obj(obj) -> BBox:
    try:
        x0, y0, x1, y1 = obj["bbox"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad box record {obj!r}: {exc}") from exc
    return BBox(float(x0), float(y0), float(x1), float(y1))


def load_detections(path) -> list[Detection]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{ln}: bad JSON: {exc}") from exc
            out.append(Detection(
                image_id=str(obj["image_id"]), class_id=int(obj["class_id"]),
                bbox=_bbox_from_obj(obj),
                confidence=float(obj.get("confidence", 1.0))))
    return out


def load_ground_truth(path) -> list[GroundTruthBox]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{ln}: bad JSON: {exc}") from exc
            out.append(GroundTruthBox(
                image_id=str(obj["image_id"]), class_id=int(obj["class_id"]),
                bbox=_bbox_from_obj(obj)))
    return out


def detection_line(d: Detection) -> str:
    return json.dumps({"image_id": d.image_id, "class_id": d.class_id,
                       "bbox": d.bbox.as_list(), "confidence": d.confidence})


def ground_truth_line(g: GroundTruthBox) -> str:
    return json.dumps({"image_id": g.image_id, "class_id": g.class_id,
                       "bbox": g.bbox.as_list()})


def save_detections(dets, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dets:
            fh.write(detection_line(d) + "\n")


def save_ground_truth(gts, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in gts:
            fh.write(ground_truth_line(g) + "\n")
