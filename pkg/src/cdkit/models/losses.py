"""Training losses: pixel cross-entropy and batch-balanced contrastive.

Both exclude ignore-labeled pixels. An all-ignored batch contributes zero
loss with zero gradient instead of NaN.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..registry import LOSSES


@LOSSES.register
class CrossEntropyLoss(nn.Module):
    """Mean -log softmax at the true class over non-ignored pixels."""

    def __init__(self, ignore_value=255, class_weights=None, loss_weight=1.0,
                 name="loss_ce"):
        super().__init__()
        self.name = name
        self.ignore_value = ignore_value
        self.loss_weight = loss_weight
        if class_weights is not None:
            self.register_buffer(
                "weight", torch.as_tensor(class_weights, dtype=torch.float32))
        else:
            self.weight = None

    def forward(self, logits, label):
        label = label.long()
        valid = label != self.ignore_value
        if valid.any():
            k = logits.shape[1]
            bad = valid & ((label < 0) | (label >= k))
            if bad.any():
                raise ValueError(
                    f"label values outside [0, {k}) and not ignore")
        else:
            return logits.sum() * 0.0
        weight = None if self.weight is None else self.weight.to(logits.dtype)
        loss = F.cross_entropy(logits, label, weight=weight,
                               ignore_index=self.ignore_value)
        return self.loss_weight * loss


@LOSSES.register
class BCLLoss(nn.Module):
    """Batch-balanced contrastive loss on a pixel distance map.

    loss = mean over unchanged of d^2 + mean over changed of
    max(0, margin - d)^2; a class absent from the batch contributes nothing.
    """

    def __init__(self, margin=2.0, ignore_value=255, loss_weight=1.0,
                 name="loss_bcl"):
        super().__init__()
        if margin <= 0:
            raise ValueError(f"margin must be positive, got {margin}")
        self.name = name
        self.margin = margin
        self.ignore_value = ignore_value
        self.loss_weight = loss_weight

    def forward(self, dist, label):
        if (dist < 0).any():
            raise ValueError("BCL distances must be non-negative")
        label = label.long()
        unchanged = label == 0
        changed = label == 1
        loss = dist.sum() * 0.0
        if unchanged.any():
            loss = loss + dist[unchanged].pow(2).mean()
        if changed.any():
            loss = loss + (self.margin - dist[changed]).clamp(min=0).pow(2).mean()
        return self.loss_weight * loss
