"""Densely connected siamese nested U-Net with ensemble channel attention.

Both dates run through a shared encoder; every decoder node receives the
bi-temporal skip pair plus all earlier same-level nodes plus the upsampled
node from the level below. The four full-resolution decoder outputs form the
ensemble that the channel-attention module gates before the 1x1 classifier.
"""

import torch
import torch.nn as nn

from ..registry import MODELS
from .attention import ECAM
from .base import BaseDetector, resize_to
from .blocks import kaiming_init


class NestedBlock(nn.Module):
    """Two 3x3 convs with a residual from the first conv's output."""

    def __init__(self, in_channels, mid_channels, out_channels):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, mid_channels, 3, padding=1)
        self.bn1 = nn.BatchNorm2d(mid_channels)
        self.conv2 = nn.Conv2d(mid_channels, out_channels, 3, padding=1)
        self.bn2 = nn.BatchNorm2d(out_channels)
        self.relu = nn.ReLU(inplace=True)

    def forward(self, x):
        x = self.conv1(x)
        identity = x
        x = self.relu(self.bn1(x))
        x = self.bn2(self.conv2(x))
        return self.relu(x + identity)


@MODELS.register
class SNUNet(BaseDetector):
    def __init__(self, in_channels=3, base_width=16, num_classes=2,
                 ignore_value=255, loss_spec=None):
        super().__init__(num_classes, ignore_value, loss_spec, "none")
        w = [base_width * m for m in (1, 2, 4, 8, 16)]
        self.pool = nn.MaxPool2d(2)

        self.enc = nn.ModuleList([
            NestedBlock(in_channels if i == 0 else w[i - 1], w[i], w[i])
            for i in range(5)
        ])
        self.up = nn.ModuleList([
            nn.ConvTranspose2d(w[i + 1], w[i + 1], 2, stride=2)
            for i in range(4)
        ])
        # dec[i][j] computes node (level i, step j) from
        # [A_i, B_i, nodes i,1..j-1, up(node i+1,j-1)]
        self.dec = nn.ModuleList([
            nn.ModuleList([
                NestedBlock(w[i] * (j + 1) + w[i + 1], w[i], w[i])
                for j in range(1, 5 - i)
            ])
            for i in range(4)
        ])
        self.ecam = ECAM(w[0], groups=4, reduction=16)
        self.classifier = nn.Conv2d(w[0] * 4, num_classes, 1)
        kaiming_init(self)

    def _encode(self, x):
        feats = []
        for i, block in enumerate(self.enc):
            if i > 0:
                x = self.pool(x)
            x = block(x)
            feats.append(x)
        return feats

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        fa = self._encode(xa)
        fb = self._encode(xb)

        # deepest level first so nodes[(i+1, j-1)] exists when level i needs it
        nodes = {}
        for i in range(3, -1, -1):
            for j in range(1, 5 - i):
                below = fb[i + 1] if j == 1 else nodes[(i + 1, j - 1)]
                prev = [nodes[(i, t)] for t in range(1, j)]
                cat = torch.cat([fa[i], fb[i], *prev, self.up[i](below)], dim=1)
                nodes[(i, j)] = self.dec[i][j - 1](cat)

        groups = [nodes[(0, j)] for j in range(1, 5)]
        logits = self.classifier(self.ecam(groups))
        return resize_to(logits, xa.shape[-2:])
