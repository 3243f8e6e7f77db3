"""Compact siamese detector with mixing-and-attention gated skips.

A narrow shared backbone encodes both dates; at each level a mixing block
interleaves the two feature sets channel-pairwise, mixes each pair with a
grouped convolution, and squeezes the mix into a sigmoid heatmap through a
per-pixel MLP. The heatmaps reweight the decoder as it climbs back to full
resolution, where a per-pixel MLP classifies.
"""

import torch
import torch.nn as nn

from ..registry import MODELS
from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init


@MODELS.register
class MAMB(nn.Module):
    """Mixing block: interleave [a0, b0, a1, b1, ...], grouped conv with
    groups=C so group g sees only the aligned pair (a_g, b_g), then a
    per-pixel MLP to one sigmoid channel."""

    def __init__(self, in_channels, mlp_hidden=None):
        super().__init__()
        self.in_channels = in_channels
        hidden = mlp_hidden or max(in_channels // 2, 4)
        self.grouped = nn.Conv2d(2 * in_channels, in_channels, 3, padding=1,
                                 groups=in_channels)
        self.mlp = nn.Sequential(
            nn.Conv2d(in_channels, hidden, 1),
            nn.ReLU(inplace=True),
            nn.Conv2d(hidden, 1, 1),
        )
        kaiming_init(self)

    @staticmethod
    def interleave(fa, fb):
        if fa.shape != fb.shape:
            raise ValueError(
                f"shape mismatch: {tuple(fa.shape)} vs {tuple(fb.shape)}")
        n, c, h, w = fa.shape
        return torch.stack([fa, fb], dim=2).reshape(n, 2 * c, h, w)

    def mixed(self, fa, fb):
        """Grouped-conv mix; channel g depends only on (a_g, b_g)."""
        return self.grouped(self.interleave(fa, fb))

    def forward(self, fa, fb):
        return torch.sigmoid(self.mlp(self.mixed(fa, fb)))


@MODELS.register
class TinyCD(BaseDetector):
    def __init__(self, in_channels=3, widths=(24, 32, 48, 64), num_classes=2,
                 ignore_value=255, loss_spec=None):
        super().__init__(num_classes, ignore_value, loss_spec, "none")
        self.stages = nn.ModuleList()
        prev = in_channels
        for w in widths:
            self.stages.append(nn.Sequential(
                ConvBNReLU(prev, w, stride=2),
                ConvBNReLU(w, w),
            ))
            prev = w
        self.bottleneck = nn.Sequential(
            ConvBNReLU(2 * widths[-1], widths[-1]),
            ConvBNReLU(widths[-1], widths[-1]),
        )
        self.mambs = nn.ModuleList([MAMB(w) for w in widths[:-1]])
        self.dec_convs = nn.ModuleList([
            ConvBNReLU(widths[i + 1], widths[i])
            for i in reversed(range(len(widths) - 1))
        ])
        head_hidden = widths[0] // 2
        self.head = nn.Sequential(
            nn.Conv2d(widths[0], head_hidden, 1),
            nn.ReLU(inplace=True),
            nn.Conv2d(head_hidden, num_classes, 1),
        )
        kaiming_init(self)

    def _encode(self, x):
        feats = []
        for stage in self.stages:
            x = stage(x)
            feats.append(x)
        return feats

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        fa = self._encode(xa)
        fb = self._encode(xb)
        x = self.bottleneck(torch.cat([fa[-1], fb[-1]], dim=1))
        for conv, level in zip(self.dec_convs, reversed(range(len(self.mambs)))):
            x = resize_to(x, fa[level].shape[-2:])
            x = x * self.mambs[level](fa[level], fb[level])
            x = conv(x)
        logits = self.head(resize_to(x, xa.shape[-2:]))
        return logits
