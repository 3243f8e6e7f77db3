"""Residual encoder (18-layer flavor) built from basic blocks.

Implemented locally so stage outputs are exposed one by one; detectors that
interleave bi-temporal operators between stages step through
``forward_stem`` / ``forward_stage`` themselves.
"""

import torch.nn as nn

from ..registry import MODELS
from .blocks import kaiming_init


class BasicBlock(nn.Module):
    def __init__(self, in_channels, out_channels, stride=1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, 3, stride=stride,
                               padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, 3, padding=1,
                               bias=False)
        self.bn2 = nn.BatchNorm2d(out_channels)
        self.relu = nn.ReLU(inplace=True)
        if stride != 1 or in_channels != out_channels:
            self.downsample = nn.Sequential(
                nn.Conv2d(in_channels, out_channels, 1, stride=stride,
                          bias=False),
                nn.BatchNorm2d(out_channels),
            )
        else:
            self.downsample = None

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


@MODELS.register
class ResNetEncoder(nn.Module):
    """Stem + up to four basic-block stages; returns per-stage features.

    Default geometry matches the common 18-layer encoder: widths
    (64, 128, 256, 512) at strides (4, 8, 16, 32) with two blocks per stage.
    """

    def __init__(self, in_channels=3, widths=(64, 128, 256, 512),
                 blocks=(2, 2, 2, 2)):
        super().__init__()
        if len(widths) != len(blocks):
            raise ValueError("widths and blocks must have equal length")
        self.out_channels = tuple(widths)
        self.strides = tuple(4 * 2 ** i for i in range(len(widths)))
        self.stem = nn.Sequential(
            nn.Conv2d(in_channels, widths[0], 7, stride=2, padding=3,
                      bias=False),
            nn.BatchNorm2d(widths[0]),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(3, stride=2, padding=1),
        )
        stages = []
        prev = widths[0]
        for i, (width, n) in enumerate(zip(widths, blocks)):
            stride = 1 if i == 0 else 2
            layers = [BasicBlock(prev, width, stride=stride)]
            layers += [BasicBlock(width, width) for _ in range(n - 1)]
            stages.append(nn.Sequential(*layers))
            prev = width
        self.stages = nn.ModuleList(stages)
        kaiming_init(self)

    def forward_stem(self, x):
        return self.stem(x)

    def forward_stage(self, x, i):
        return self.stages[i](x)

    def forward(self, x):
        x = self.forward_stem(x)
        feats = []
        for stage in self.stages:
            x = stage(x)
            feats.append(x)
        return feats
