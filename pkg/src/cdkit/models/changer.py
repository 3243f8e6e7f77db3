"""Residual siamese detector with parameter-free bi-temporal feature
exchange inside the encoder and flow-based dual-alignment fusion on top.

Channel exchange runs after one configured stage and spatial exchange after
another (both overridable). Per-stage linear embeddings are resized to 1/4
resolution, concatenated per date, fused by FDAF, and classified.
"""

import torch
import torch.nn as nn

from ..registry import MODELS
from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init
from .fusion import FDAF, ChannelExchange, SpatialExchange
from .resnet import ResNetEncoder


@MODELS.register
class Changer(BaseDetector):
    def __init__(self, in_channels=3, embed_dim=96, fused_dim=192,
                 channel_exchange_stage=1, spatial_exchange_stage=2,
                 exchange_ratio=0.5, num_classes=2, ignore_value=255,
                 loss_spec=None):
        super().__init__(num_classes, ignore_value, loss_spec, "none")
        self.backbone = ResNetEncoder(in_channels)
        self.exchanges = nn.ModuleDict()
        if channel_exchange_stage is not None:
            self.exchanges[str(channel_exchange_stage)] = \
                ChannelExchange(exchange_ratio)
        if spatial_exchange_stage is not None:
            if str(spatial_exchange_stage) in self.exchanges:
                raise ValueError("exchange stages must differ")
            self.exchanges[str(spatial_exchange_stage)] = \
                SpatialExchange(exchange_ratio)

        self.embeds = nn.ModuleList([
            nn.Conv2d(c, embed_dim, 1) for c in self.backbone.out_channels
        ])
        self.merge = nn.Conv2d(embed_dim * len(self.embeds), fused_dim, 1)
        self.fdaf = FDAF(fused_dim, fused_dim)
        self.fuse_conv = ConvBNReLU(fused_dim, fused_dim)
        self.classifier = nn.Conv2d(fused_dim, num_classes, 1)
        kaiming_init(self.embeds)
        kaiming_init(self.merge)
        kaiming_init(self.fuse_conv)
        kaiming_init(self.classifier)

    def _encode_pair(self, xa, xb):
        fa = self.backbone.forward_stem(xa)
        fb = self.backbone.forward_stem(xb)
        feats_a, feats_b = [], []
        for i in range(len(self.backbone.stages)):
            fa = self.backbone.forward_stage(fa, i)
            fb = self.backbone.forward_stage(fb, i)
            if str(i) in self.exchanges:
                fa, fb = self.exchanges[str(i)](fa, fb)
            feats_a.append(fa)
            feats_b.append(fb)
        return feats_a, feats_b

    def _merge_stages(self, feats):
        size = feats[0].shape[-2:]
        embedded = [resize_to(e(f), size) for e, f in zip(self.embeds, feats)]
        return self.merge(torch.cat(embedded, dim=1))

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        feats_a, feats_b = self._encode_pair(xa, xb)
        ma = self._merge_stages(feats_a)
        mb = self._merge_stages(feats_b)
        fused = self.fuse_conv(self.fdaf(ma, mb))
        return resize_to(self.classifier(fused), xa.shape[-2:])
