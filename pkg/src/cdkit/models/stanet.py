"""Metric-learning detector: siamese residual encoder, multi-stage feature
aggregation into a pixel embedding, spatial-temporal attention over the
width-concatenated bi-temporal map, and a contrastive distance head.

Training minimizes the batch-balanced contrastive loss on the embedding
distance map; inference thresholds the distance. Logits are exposed as
(threshold - d, d - threshold) so argmax reproduces the thresholding.
"""

import torch
import torch.nn as nn

from ..registry import MODELS
from .attention import BAM, PAM
from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init
from .resnet import ResNetEncoder


@MODELS.register
class STANet(BaseDetector):
    def __init__(self, in_channels=3, embed_dim=64, attention="pam",
                 scales=(1, 2, 4, 8), margin=2.0, threshold=1.0,
                 num_classes=2, ignore_value=255, loss_spec=None):
        if loss_spec is None:
            loss_spec = [{"type": "BCLLoss", "name": "loss_bcl",
                          "margin": margin, "ignore_value": ignore_value}]
        super().__init__(num_classes, ignore_value, loss_spec, "invariant")
        self.threshold = threshold
        self.backbone = ResNetEncoder(in_channels)

        reduce_dim = 96
        self.reduces = nn.ModuleList([
            ConvBNReLU(c, reduce_dim, kernel_size=1)
            for c in self.backbone.out_channels
        ])
        self.fuse = ConvBNReLU(reduce_dim * len(self.reduces), 256)
        self.embed = nn.Conv2d(256, embed_dim, 1)
        kaiming_init(self.fuse)
        kaiming_init(self.embed)

        if attention == "pam":
            self.attention = PAM(embed_dim, scales=scales)
        elif attention == "bam":
            self.attention = BAM(embed_dim)
        elif attention in (None, "none"):
            self.attention = None
        else:
            raise ValueError(f"unknown attention '{attention}'")

    def _embed_one(self, x):
        feats = self.backbone(x)
        size = feats[0].shape[-2:]
        reduced = [resize_to(r(f), size) for r, f in zip(self.reduces, feats)]
        return self.embed(self.fuse(torch.cat(reduced, dim=1)))

    def distance(self, xa, xb):
        """Per-pixel embedding distance at input resolution."""
        self.check_pair(xa, xb)
        ea = self._embed_one(xa)
        eb = self._embed_one(xb)
        if self.attention is not None:
            stacked = torch.cat([ea, eb], dim=-1)
            attended = self.attention(stacked)
            ea, eb = torch.chunk(attended, 2, dim=-1)
        # eps keeps the gradient finite (and zero) where ea == eb exactly
        d = torch.sqrt((ea - eb).pow(2).sum(dim=1, keepdim=True) + 1e-12)
        return resize_to(d, xa.shape[-2:]).squeeze(1)

    def forward(self, xa, xb):
        d = self.distance(xa, xb)
        return torch.stack([self.threshold - d, d - self.threshold], dim=1)

    def loss(self, batch):
        d = self.distance(batch["image_a"], batch["image_b"])
        return {name: fn(d, batch["label"])
                for name, fn in self.loss_fns.items()}

    def predict(self, xa, xb):
        return (self.distance(xa, xb) > self.threshold).long()
