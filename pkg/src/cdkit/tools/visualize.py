"""Rendering of change maps for qualitative inspection."""

import numpy as np
from PIL import Image

# error-map palette (prediction vs. reference)
TP_COLOR = (255, 255, 255)  # predicted change, real change
TN_COLOR = (0, 0, 0)        # predicted unchanged, real unchanged
FP_COLOR = (255, 0, 0)      # predicted change, real unchanged
FN_COLOR = (0, 255, 0)      # missed change
IGNORE_COLOR = (128, 128, 128)


def render_change_map(pred, label=None, ignore_value=255):
    """Render a prediction as an RGB error map.

    Without a reference label the map is binary (white = change). With one,
    pixels are colored true positive white, true negative black, false
    positive red, false negative green; ignored pixels gray.
    Returns an H x W x 3 uint8 array.
    """
    pred = np.asarray(pred)
    if pred.ndim != 2:
        raise ValueError(f"expected an H x W prediction, got {pred.shape}")
    out = np.zeros((*pred.shape, 3), dtype=np.uint8)
    if label is None:
        out[pred > 0] = TP_COLOR
        return out
    label = np.asarray(label)
    if label.shape != pred.shape:
        raise ValueError("prediction and label shapes differ: "
                         f"{pred.shape} vs {label.shape}")
    valid = label != ignore_value
    changed_pred = pred > 0
    changed_ref = (label > 0) & valid
    out[valid & changed_pred & changed_ref] = TP_COLOR
    out[valid & ~changed_pred & ~changed_ref] = TN_COLOR
    out[valid & changed_pred & ~changed_ref] = FP_COLOR
    out[valid & ~changed_pred & changed_ref] = FN_COLOR
    out[~valid] = IGNORE_COLOR
    return out


def save_change_map(path, pred, label=None, ignore_value=255):
    rgb = render_change_map(pred, label=label, ignore_value=ignore_value)
    Image.fromarray(rgb).save(path)
    return path
