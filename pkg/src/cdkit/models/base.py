"""Detector interface shared by the whole zoo.

Every detector maps an aligned (N x C x H x W, N x C x H x W) pair to
N x K x H x W logits at input resolution, exposes loss(batch) returning a
mapping with one entry per configured loss, and predict(xa, xb) returning
label maps. ``temporal_symmetry`` declares what swapping the input pair does
to the logits ("invariant" or "none").
"""

import torch.nn as nn
import torch.nn.functional as F

from ..registry import LOSSES, build_component


def resize_to(x, size):
    """Bilinear resize (non-corner-aligned), the one upsampling convention."""
    if tuple(x.shape[-2:]) == tuple(size):
        return x
    return F.interpolate(x, size=size, mode="bilinear", align_corners=False)


def build_losses(loss_spec):
    """Build an ordered name -> module dict from a list of loss configs."""
    modules = {}
    for i, cfg in enumerate(loss_spec):
        if isinstance(cfg, nn.Module):
            name = getattr(cfg, "name", None) or f"loss_{i}"
            module = cfg
        else:
            cfg = dict(cfg)
            name = cfg.pop("name", None) or f"loss_{cfg['type'].lower()}"
            module = build_component(cfg, LOSSES)
        if name in modules:
            name = f"{name}_{i}"
        modules[name] = module
    return nn.ModuleDict(modules)


class BaseDetector(nn.Module):
    """Base class wiring losses, prediction, and the pair-shape contract."""

    def __init__(self, num_classes=2, ignore_value=255, loss_spec=None,
                 temporal_symmetry="none"):
        super().__init__()
        if temporal_symmetry not in ("invariant", "none"):
            raise ValueError(f"unknown temporal_symmetry '{temporal_symmetry}'")
        self.num_classes = num_classes
        self.ignore_value = ignore_value
        self.temporal_symmetry = temporal_symmetry
        self.loss_fns = build_losses(loss_spec or self.default_loss_spec())

    def default_loss_spec(self):
        return [{"type": "CrossEntropyLoss", "name": "loss_ce",
                 "ignore_value": self.ignore_value, "loss_weight": 1.0}]

    @staticmethod
    def check_pair(xa, xb):
        if xa.shape != xb.shape:
            raise ValueError(
                f"input pair shape mismatch: {tuple(xa.shape)} vs {tuple(xb.shape)}")

    def forward(self, xa, xb):
        raise NotImplementedError

    def loss(self, batch):
        logits = self(batch["image_a"], batch["image_b"])
        return {name: fn(logits, batch["label"])
                for name, fn in self.loss_fns.items()}

    def predict(self, xa, xb):
        return self(xa, xb).argmax(dim=1)
