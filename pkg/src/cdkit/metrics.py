"""Confusion-matrix accumulation and change-class metrics.

All four reported metrics (precision_c, recall_c, f1_c, iou_c) derive from a
single K x K pixel-count matrix with rows = ground truth and columns =
prediction. Matrices merge by entrywise sum, so shards can be accumulated
independently and reduced in any order. 0/0 ratios are reported as undefined
(None), never coerced to 0 or 1.
"""

import numpy as np

from .errors import DataError
from .registry import METRICS


class ConfusionMatrix:
    """Mergeable K x K pixel-count accumulator. Counts are int64."""

    def __init__(self, num_classes=2, ignore_value=255):
        self.num_classes = num_classes
        self.ignore_value = ignore_value
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    def update(self, pred, gt):
        pred = np.asarray(pred)
        gt = np.asarray(gt)
        if pred.shape != gt.shape:
            raise DataError(f"pred shape {pred.shape} != gt shape {gt.shape}")
        pred = pred.reshape(-1).astype(np.int64)
        gt = gt.reshape(-1).astype(np.int64)
        keep = gt != self.ignore_value
        pred, gt = pred[keep], gt[keep]
        k = self.num_classes
        if pred.size and (pred.min() < 0 or pred.max() >= k):
            raise DataError(f"prediction values outside [0, {k})")
        if gt.size and (gt.min() < 0 or gt.max() >= k):
            raise DataError(f"label values outside [0, {k}) and not ignore")
        binned = np.bincount(gt * k + pred, minlength=k * k)
        self.counts += binned.reshape(k, k)
        return self

    def merge(self, other):
        if self.num_classes != other.num_classes:
            raise DataError(
                f"cannot merge confusion matrices with K={self.num_classes} "
                f"and K={other.num_classes}"
            )
        out = ConfusionMatrix(self.num_classes, self.ignore_value)
        out.counts = self.counts + other.counts
        return out

    def reset(self):
        self.counts[:] = 0

    @property
    def total(self):
        return int(self.counts.sum())


def _ratio(num, den):
    return float(num) / float(den) if den > 0 else None


def compute_change_metrics(cm):
    """Change-class precision/recall/F1/IoU from a binary confusion matrix.

    The change class is index 1. Any 0/0 ratio is None. When defined,
    iou_c == f1_c / (2 - f1_c) holds as an algebraic identity.
    """
    if cm.num_classes != 2:
        raise DataError(f"change metrics need K=2, got K={cm.num_classes}")
    c = cm.counts
    tp, fp, fn = int(c[1, 1]), int(c[0, 1]), int(c[1, 0])
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    iou = _ratio(tp, tp + fp + fn)
    return {
        "precision_c": precision,
        "recall_c": recall,
        "f1_c": f1,
        "iou_c": iou,
        "support": {
            "unchanged": int(c[0].sum()),
            "change": int(c[1].sum()),
        },
    }


@METRICS.register
class ChangeMetrics:
    """Evaluator accumulating a confusion matrix over (pred, gt) pairs.

    aggregation="global" pools all pixels into one matrix; "per_image"
    averages the defined per-image metrics instead. The mode used is flagged
    in every report.
    """

    def __init__(self, num_classes=2, ignore_value=255, aggregation="global"):
        if aggregation not in ("global", "per_image"):
            raise ValueError(f"unknown aggregation '{aggregation}'")
        self.aggregation = aggregation
        self.cm = ConfusionMatrix(num_classes, ignore_value)
        self._per_image = []

    def update(self, pred, gt):
        self.cm.update(pred, gt)
        if self.aggregation == "per_image":
            one = ConfusionMatrix(self.cm.num_classes, self.cm.ignore_value)
            one.update(pred, gt)
            self._per_image.append(compute_change_metrics(one))

    def compute(self):
        if self.aggregation == "global":
            report = compute_change_metrics(self.cm)
        else:
            report = self._average_per_image()
        report["aggregation"] = self.aggregation
        return report

    def reset(self):
        self.cm.reset()
        self._per_image = []

    def _average_per_image(self):
        report = {}
        for key in ("precision_c", "recall_c", "f1_c", "iou_c"):
            vals = [r[key] for r in self._per_image if r[key] is not None]
            report[key] = float(np.mean(vals)) if vals else None
        report["support"] = compute_change_metrics(self.cm)["support"]
        return report
