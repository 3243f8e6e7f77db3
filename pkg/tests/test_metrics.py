"""Confusion-matrix accumulation and change-class metrics.

The brute-force oracle recomputes every count by explicit pixel loops so the
vectorized implementation is checked against an independent derivation.
"""

import numpy as np
import pytest

from cdkit import (ChangeMetrics, ConfusionMatrix, DataError,
                   compute_change_metrics)


def brute_force_counts(gt, pred, num_classes, ignore_value):
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    for g, p in zip(gt.ravel(), pred.ravel()):
        if g == ignore_value:
            continue
        cm[g, p] += 1
    return cm


def brute_force_metrics(cm):
    tp = cm[1, 1]
    fp = cm[0, 1]
    fn = cm[1, 0]
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    iou = tp / (tp + fp + fn) if tp + fp + fn else None
    return precision, recall, f1, iou


# ---- hand-checked fixture -------------------------------------------------

def test_hand_fixture_2x2():
    gt = np.array([[0, 0], [1, 1]])
    pred = np.array([[0, 1], [0, 1]])
    cm = ConfusionMatrix(num_classes=2)
    cm.update(pred, gt)
    # one each of TN, FP, FN, TP
    assert cm.counts.tolist() == [[1, 1], [1, 1]]
    m = compute_change_metrics(cm)
    assert m["precision_c"] == pytest.approx(0.5)
    assert m["recall_c"] == pytest.approx(0.5)
    assert m["f1_c"] == pytest.approx(0.5)
    assert m["iou_c"] == pytest.approx(1 / 3)
    assert m["support"] == {"unchanged": 2, "change": 2}


def test_identity_iou_equals_f1_over_2_minus_f1():
    rng = np.random.default_rng(3)
    gt = rng.integers(0, 2, size=(64, 64))
    pred = rng.integers(0, 2, size=(64, 64))
    cm = ConfusionMatrix()
    cm.update(pred, gt)
    m = compute_change_metrics(cm)
    assert m["iou_c"] == pytest.approx(m["f1_c"] / (2 - m["f1_c"]))


def test_perfect_prediction():
    gt = np.array([[0, 1], [1, 0]])
    cm = ConfusionMatrix()
    cm.update(gt, gt)
    m = compute_change_metrics(cm)
    assert m["precision_c"] == m["recall_c"] == m["f1_c"] == m["iou_c"] == 1.0


# ---- undefined (0/0) handling ---------------------------------------------

def test_no_change_anywhere_is_undefined_not_zero():
    gt = np.zeros((8, 8), dtype=np.int64)
    cm = ConfusionMatrix()
    cm.update(gt, gt)
    m = compute_change_metrics(cm)
    assert m["precision_c"] is None
    assert m["recall_c"] is None
    assert m["f1_c"] is None
    assert m["iou_c"] is None
    assert m["support"]["change"] == 0


def test_no_predicted_change_precision_undefined_recall_zero():
    gt = np.array([[1, 1], [0, 0]])
    pred = np.zeros_like(gt)
    cm = ConfusionMatrix()
    cm.update(pred, gt)
    m = compute_change_metrics(cm)
    assert m["precision_c"] is None
    assert m["recall_c"] == 0.0
    assert m["f1_c"] is None  # one side undefined -> undefined


def test_all_ignored_is_undefined():
    gt = np.full((4, 4), 255, dtype=np.int64)
    cm = ConfusionMatrix(ignore_value=255)
    cm.update(np.zeros_like(gt), gt)
    assert cm.total == 0
    m = compute_change_metrics(cm)
    assert m["f1_c"] is None


# ---- counting and merging ---------------------------------------------------

def test_counts_are_int64():
    cm = ConfusionMatrix()
    assert cm.counts.dtype == np.int64
    cm.update(np.ones((4, 4), dtype=np.int64), np.ones((4, 4), dtype=np.int64))
    assert cm.counts.dtype == np.int64


def test_total_counts_valid_pixels_only():
    gt = np.array([[0, 1], [255, 1]])
    pred = np.zeros_like(gt)
    cm = ConfusionMatrix()
    cm.update(pred, gt)
    assert cm.total == 3
    assert (cm.counts >= 0).all()


def test_merge_is_entrywise_sum_commutative_associative():
    rng = np.random.default_rng(11)
    mats = []
    for _ in range(3):
        cm = ConfusionMatrix()
        cm.update(rng.integers(0, 2, (16, 16)), rng.integers(0, 2, (16, 16)))
        mats.append(cm)
    a, b, c = mats
    ab = a.merge(b)
    assert (ab.counts == a.counts + b.counts).all()
    assert (a.merge(b).counts == b.merge(a).counts).all()
    assert (a.merge(b).merge(c).counts == a.merge(b.merge(c)).counts).all()


def test_merge_zero_matrix_identity():
    rng = np.random.default_rng(12)
    cm = ConfusionMatrix()
    cm.update(rng.integers(0, 2, (8, 8)), rng.integers(0, 2, (8, 8)))
    zero = ConfusionMatrix()
    assert (cm.merge(zero).counts == cm.counts).all()


def test_merge_size_mismatch_rejected():
    with pytest.raises(DataError):
        ConfusionMatrix(num_classes=2).merge(ConfusionMatrix(num_classes=3))


@pytest.mark.parametrize("seed", range(50))
def test_split_image_partition_property(seed):
    """Updating with two halves == merging per-half matrices == full update."""
    rng = np.random.default_rng(200 + seed)
    gt = rng.integers(0, 2, (16, 16))
    pred = rng.integers(0, 2, (16, 16))
    full = ConfusionMatrix()
    full.update(pred, gt)
    seq = ConfusionMatrix()
    seq.update(pred[:8], gt[:8])
    seq.update(pred[8:], gt[8:])
    top, bottom = ConfusionMatrix(), ConfusionMatrix()
    top.update(pred[:8], gt[:8])
    bottom.update(pred[8:], gt[8:])
    assert (full.counts == seq.counts).all()
    assert (full.counts == top.merge(bottom).counts).all()


# ---- validation -------------------------------------------------------------

def test_shape_mismatch_rejected():
    cm = ConfusionMatrix()
    with pytest.raises(DataError):
        cm.update(np.zeros((4, 4), dtype=np.int64),
                  np.zeros((4, 5), dtype=np.int64))


def test_out_of_range_prediction_rejected():
    cm = ConfusionMatrix(num_classes=2)
    with pytest.raises(DataError):
        cm.update(np.zeros((2, 2), dtype=np.int64),
                  np.full((2, 2), 7, dtype=np.int64))


def test_out_of_range_label_rejected():
    cm = ConfusionMatrix(num_classes=2)
    with pytest.raises(DataError):
        cm.update(np.full((2, 2), 9, dtype=np.int64),
                  np.zeros((2, 2), dtype=np.int64))


# ---- randomized oracle ------------------------------------------------------

def test_200_random_pairs_match_brute_force_exactly():
    """Acceptance oracle: 200 random 16x16 pairs with ignore regions."""
    rng = np.random.default_rng(42)
    for _ in range(200):
        gt = rng.integers(0, 2, (16, 16)).astype(np.int64)
        gt[rng.random((16, 16)) < 0.1] = 255
        pred = rng.integers(0, 2, (16, 16)).astype(np.int64)
        cm = ConfusionMatrix()
        cm.update(pred, gt)
        expect = brute_force_counts(gt, pred, 2, 255)
        assert (cm.counts == expect).all()
        m = compute_change_metrics(cm)
        p, r, f1, iou = brute_force_metrics(expect)
        for got, want in [(m["precision_c"], p), (m["recall_c"], r),
                          (m["f1_c"], f1), (m["iou_c"], iou)]:
            if want is None:
                assert got is None
            else:
                assert got == pytest.approx(want, abs=1e-12)


# ---- evaluator wrapper ------------------------------------------------------

def test_change_metrics_global_aggregation():
    ev = ChangeMetrics()
    gt = np.array([[0, 1], [1, 1]])
    pred = np.array([[0, 1], [0, 1]])
    ev.update(pred, gt)
    ev.update(pred, gt)
    report = ev.compute()
    assert report["aggregation"] == "global"
    assert report["recall_c"] == pytest.approx(2 / 3)
    assert set(report) >= {"precision_c", "recall_c", "f1_c", "iou_c",
                           "support", "aggregation"}


def test_change_metrics_per_image_mode_flagged_and_averaged():
    ev = ChangeMetrics(aggregation="per_image")
    gt1 = np.array([[1, 1], [0, 0]])
    ev.update(gt1, gt1)                      # f1 = 1.0
    gt2 = np.array([[1, 0], [0, 0]])
    pred2 = np.array([[1, 1], [0, 0]])       # p=0.5, r=1, f1=2/3
    ev.update(pred2, gt2)
    report = ev.compute()
    assert report["aggregation"] == "per_image"
    assert report["f1_c"] == pytest.approx((1.0 + 2 / 3) / 2)


def test_change_metrics_per_image_skips_undefined_images():
    ev = ChangeMetrics(aggregation="per_image")
    blank = np.zeros((4, 4), dtype=np.int64)
    ev.update(blank, blank)                  # undefined everywhere
    gt = np.array([[1, 0], [0, 0]])
    ev.update(gt, gt)                        # f1 = 1.0
    report = ev.compute()
    assert report["f1_c"] == pytest.approx(1.0)


def test_change_metrics_reset():
    ev = ChangeMetrics()
    gt = np.array([[1, 0], [0, 0]])
    ev.update(gt, gt)
    ev.reset()
    report = ev.compute()
    assert report["f1_c"] is None
    assert report["support"] == {"unchanged": 0, "change": 0}
