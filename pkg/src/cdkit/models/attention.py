"""Attention modules: non-local spatial-temporal attention (basic and
pyramid variants) and ensemble channel attention.

The spatial-temporal modules expect the bi-temporal features concatenated
along width (N x C x H x 2W) so one attention spans both dates. Modules
accumulate their matmul MAC counts into ``last_extra_macs`` for the analytic
FLOP counter.
"""

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..registry import MODELS
from .blocks import kaiming_init, zero_init


@MODELS.register
class BAM(nn.Module):
    """Non-local self-attention with a residual, zero-initialized output.

    Query/key/value are 1x1 projections; similarity is softmax-normalized
    over all positions. With the output projection at zero the module is the
    identity.
    """

    def __init__(self, in_channels, key_channels=None, value_channels=None):
        super().__init__()
        self.key_channels = key_channels or max(in_channels // 8, 1)
        self.value_channels = value_channels or in_channels
        self.query = nn.Conv2d(in_channels, self.key_channels, 1)
        self.key = nn.Conv2d(in_channels, self.key_channels, 1)
        self.value = nn.Conv2d(in_channels, self.value_channels, 1)
        self.out = nn.Conv2d(self.value_channels, in_channels, 1)
        kaiming_init(self)
        zero_init(self.out)
        self.last_extra_macs = 0

    def attention(self, x):
        """Row-stochastic attention over all H*W positions."""
        q = self.query(x).flatten(2).transpose(1, 2)
        k = self.key(x).flatten(2)
        return torch.softmax(q @ k / math.sqrt(self.key_channels), dim=-1)

    def forward(self, x):
        n, _, h, w = x.shape
        hw = h * w
        attn = self.attention(x)
        v = self.value(x).flatten(2).transpose(1, 2)
        y = (attn @ v).transpose(1, 2).reshape(n, self.value_channels, h, w)
        self.last_extra_macs += n * hw * hw * (self.key_channels
                                               + self.value_channels)
        return x + self.out(y)


@MODELS.register
class PAM(nn.Module):
    """Pyramid attention: region-wise BAM at several scales.

    For scale s the map is split into s x s equal regions and the shared BAM
    runs within each; per-scale outputs are channel-concatenated and
    projected back to C channels.
    """

    def __init__(self, in_channels, scales=(1, 2, 4, 8), key_channels=None,
                 value_channels=None):
        super().__init__()
        self.scales = tuple(scales)
        self.bam = BAM(in_channels, key_channels, value_channels)
        self.proj = nn.Conv2d(len(self.scales) * in_channels, in_channels, 1)
        kaiming_init(self.proj)

    def forward(self, x):
        n, c, h, w = x.shape
        outs = []
        for s in self.scales:
            if h % s or w % s:
                raise ValueError(f"scale {s} does not divide map size {h}x{w}")
            rh, rw = h // s, w // s
            regions = (x.reshape(n, c, s, rh, s, rw)
                       .permute(0, 2, 4, 1, 3, 5)
                       .reshape(n * s * s, c, rh, rw))
            attended = self.bam(regions)
            outs.append(attended.reshape(n, s, s, c, rh, rw)
                        .permute(0, 3, 1, 4, 2, 5)
                        .reshape(n, c, h, w))
        return self.proj(torch.cat(outs, dim=1))


class ChannelAttentionLogits(nn.Module):
    """CBAM-style channel attention, returned before the sigmoid."""

    def __init__(self, channels, reduction=16):
        super().__init__()
        hidden = max(channels // reduction, 1)
        self.mlp = nn.Sequential(
            nn.Conv2d(channels, hidden, 1, bias=False),
            nn.ReLU(inplace=True),
            nn.Conv2d(hidden, channels, 1, bias=False),
        )
        kaiming_init(self)

    def forward(self, x):
        return self.mlp(F.adaptive_avg_pool2d(x, 1)) + \
            self.mlp(F.adaptive_max_pool2d(x, 1))


@MODELS.register
class ECAM(nn.Module):
    """Ensemble channel attention over K same-shape decoder-group outputs.

    Gates are sigmoid(CAM(concat) + CAM(sum) replicated K times); the output
    is the gated K*C-channel concatenation, ready for a 1x1 classifier.
    """

    def __init__(self, in_channels, groups=4, reduction=16):
        super().__init__()
        self.in_channels = in_channels
        self.groups = groups
        self.cam_concat = ChannelAttentionLogits(in_channels * groups, reduction)
        self.cam_intra = ChannelAttentionLogits(
            in_channels, max(reduction // groups, 1))

    def gates(self, group_feats):
        concat = torch.cat(group_feats, dim=1)
        intra = torch.stack(group_feats, dim=0).sum(dim=0)
        logits = self.cam_concat(concat) + \
            self.cam_intra(intra).repeat(1, self.groups, 1, 1)
        return torch.sigmoid(logits)

    def forward(self, group_feats):
        group_feats = list(group_feats)
        if len(group_feats) != self.groups:
            raise ValueError(
                f"expected {self.groups} group maps, got {len(group_feats)}")
        if len(group_feats) < 2:
            raise ValueError("ECAM needs at least two group maps")
        shapes = {tuple(f.shape) for f in group_feats}
        if len(shapes) != 1:
            raise ValueError(f"group maps disagree in shape: {shapes}")
        return torch.cat(group_feats, dim=1) * self.gates(group_feats)
