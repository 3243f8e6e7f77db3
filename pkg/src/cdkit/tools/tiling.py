"""Sliding-window inference for scenes larger than the training crop.

Tiles of size ``tile`` are placed every ``stride`` pixels; the final tile in
each axis is clamped to the image border so coverage is complete without
padding. Overlapping logits are averaged in float64 before the argmax.
"""

import numpy as np
import torch


def tile_starts(length, tile, stride):
    """Start offsets covering [0, length) with a clamped final tile."""
    if tile <= 0 or stride <= 0:
        raise ValueError("tile and stride must be positive")
    if stride > tile:
        raise ValueError(
            f"stride {stride} exceeds tile {tile}: pixels between tiles "
            "would receive no prediction")
    if tile > length:
        raise ValueError(f"tile size {tile} exceeds image extent {length}")
    starts = list(range(0, length - tile + 1, stride))
    last = length - tile
    if starts[-1] != last:
        starts.append(last)
    return starts


def predict_tiled(model, image_a, image_b, tile, stride):
    """Average per-pixel logits over all covering tiles, then argmax.

    Inputs are 1 x C x H x W tensors; returns (pred 1 x H x W int64,
    logits 1 x K x H x W float32).
    """
    if image_a.shape != image_b.shape:
        raise ValueError("temporal images must share a shape")
    _, _, height, width = image_a.shape
    accum = None
    counts = torch.zeros(1, 1, height, width, dtype=torch.float64)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            for top in tile_starts(height, tile, stride):
                for left in tile_starts(width, tile, stride):
                    sl = (slice(None), slice(None),
                          slice(top, top + tile), slice(left, left + tile))
                    logits = model(image_a[sl], image_b[sl]).double()
                    if accum is None:
                        accum = torch.zeros(
                            1, logits.shape[1], height, width,
                            dtype=torch.float64)
                    accum[sl] += logits
                    counts[:, :, top:top + tile, left:left + tile] += 1.0
    finally:
        model.train(was_training)
    logits = (accum / counts).float()
    pred = logits.argmax(dim=1)
    return pred, logits


def predict_full(model, image_a, image_b):
    """Single-pass inference; returns (pred, logits) like predict_tiled."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            logits = model(image_a, image_b)
    finally:
        model.train(was_training)
    return logits.argmax(dim=1), logits


def image_to_tensor(array):
    """H x W x C float image -> 1 x C x H x W float32 tensor."""
    arr = np.ascontiguousarray(np.asarray(array, dtype=np.float32)
                               .transpose(2, 0, 1))
    return torch.from_numpy(arr).unsqueeze(0)
