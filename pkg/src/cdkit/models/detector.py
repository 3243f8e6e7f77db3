"""Generic siamese detector assembled from config, plus the U-Net style
encoder and decode head used by the feature-fusion baselines.

The encoder runs both dates through literally the same module (shared
weights). Optional per-stage interaction operators (e.g. feature exchange)
transform the feature pair before a fusion operator merges the streams; the
decode head turns the fused per-stage features into logits.
"""

import torch
import torch.nn as nn

from ..registry import MODELS, build_component
from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init


@MODELS.register
class UNetEncoder(nn.Module):
    """Stage-wise conv encoder: ``convs[i]`` 3x3 convs at width ``widths[i]``,
    max-pool between stages. ``stem_stride`` puts the first stage at stride
    1 or 2. Returns pre-pool features per stage.
    """

    def __init__(self, in_channels=3, widths=(16, 32, 64, 128),
                 convs=(2, 2, 3, 3), stem_stride=1):
        super().__init__()
        if len(widths) != len(convs):
            raise ValueError("widths and convs must have equal length")
        if stem_stride not in (1, 2):
            raise ValueError(f"stem_stride must be 1 or 2, got {stem_stride}")
        self.in_channels = in_channels
        self.out_channels = tuple(widths)
        self.strides = tuple(stem_stride * 2 ** i for i in range(len(widths)))
        self.pool = nn.MaxPool2d(2)
        stages = []
        prev = in_channels
        for i, (width, n) in enumerate(zip(widths, convs)):
            layers = []
            for j in range(n):
                stride = stem_stride if (i == 0 and j == 0) else 1
                layers.append(ConvBNReLU(prev, width, stride=stride))
                prev = width
            stages.append(nn.Sequential(*layers))
        self.stages = nn.ModuleList(stages)
        kaiming_init(self)

    def forward(self, x):
        feats = []
        for i, stage in enumerate(self.stages):
            if i > 0:
                x = self.pool(x)
            x = stage(x)
            feats.append(x)
        return feats


@MODELS.register
class UNetDecodeHead(nn.Module):
    """Decode head over fused per-stage features.

    The deepest feature is pooled into a wide context block, then a
    transposed-conv ladder climbs back up, concatenating the fused skip at
    each stage. Output logits sit at the stride of the shallowest feature.
    """

    def __init__(self, in_channels, num_classes=2, context_channels=512,
                 widths=(128, 64, 32, 16)):
        super().__init__()
        if len(widths) != len(in_channels):
            raise ValueError("widths and in_channels must have equal length")
        self.in_channels = tuple(in_channels)
        self.context = nn.Sequential(
            nn.MaxPool2d(2),
            ConvBNReLU(in_channels[-1], context_channels),
            ConvBNReLU(context_channels, context_channels),
        )
        ups, convs = [], []
        prev = context_channels
        for skip_ch, width in zip(reversed(in_channels), widths):
            ups.append(nn.ConvTranspose2d(prev, width, 2, stride=2))
            convs.append(nn.Sequential(
                ConvBNReLU(width + skip_ch, width),
                ConvBNReLU(width, width),
            ))
            prev = width
        self.ups = nn.ModuleList(ups)
        self.convs = nn.ModuleList(convs)
        self.classifier = nn.Conv2d(widths[-1], num_classes, 1)
        kaiming_init(self)

    def forward(self, feats):
        if len(feats) != len(self.in_channels):
            raise ValueError(
                f"expected {len(self.in_channels)} stage features, got {len(feats)}")
        x = self.context(feats[-1])
        for up, conv, skip in zip(self.ups, self.convs, reversed(feats)):
            x = resize_to(up(x), skip.shape[-2:])
            x = conv(torch.cat([x, skip], dim=1))
        return self.classifier(x)


@MODELS.register
class ChangeDetector(BaseDetector):
    """Config-composed siamese detector: encoder, optional per-stage
    interactions, per-stage fusion, decode head."""

    def __init__(self, encoder, decode_head, fusion=None, interactions=None,
                 num_classes=2, ignore_value=255, loss_spec=None,
                 temporal_symmetry="none", aux_heads=None, aux_weight=0.4):
        super().__init__(num_classes, ignore_value, loss_spec, temporal_symmetry)
        self.encoder = self._as_module(encoder)
        self.decode_head = self._as_module(decode_head)
        self.fusion = self._as_module(fusion) if fusion is not None else None
        if interactions is None:
            self.interactions = None
        else:
            self.interactions = nn.ModuleList(
                [self._as_module(m) if m is not None else nn.Identity()
                 for m in interactions])
        if aux_heads is None:
            self.aux_heads = None
        else:
            self.aux_heads = nn.ModuleList(
                [self._as_module(h) for h in aux_heads])
        self.aux_weight = aux_weight

    @staticmethod
    def _as_module(obj):
        if isinstance(obj, dict):
            return build_component(obj, MODELS)
        return obj

    def _fused_stages(self, xa, xb):
        self.check_pair(xa, xb)
        feats_a = self.encoder(xa)
        feats_b = self.encoder(xb)
        if self.interactions is not None:
            for i, op in enumerate(self.interactions):
                if isinstance(op, nn.Identity) or i >= len(feats_a):
                    continue
                feats_a[i], feats_b[i] = op(feats_a[i], feats_b[i])
        if self.fusion is None:
            raise ValueError("ChangeDetector needs a fusion component")
        return [self.fusion(fa, fb) for fa, fb in zip(feats_a, feats_b)]

    def forward(self, xa, xb):
        fused = self._fused_stages(xa, xb)
        logits = self.decode_head(fused)
        return resize_to(logits, xa.shape[-2:])

    def loss(self, batch):
        xa, xb, label = batch["image_a"], batch["image_b"], batch["label"]
        fused = self._fused_stages(xa, xb)
        logits = resize_to(self.decode_head(fused), xa.shape[-2:])
        out = {name: fn(logits, label) for name, fn in self.loss_fns.items()}
        if self.aux_heads is not None:
            ce = self.loss_fns[next(iter(self.loss_fns))]
            for i, head in enumerate(self.aux_heads):
                aux = resize_to(head(fused), xa.shape[-2:])
                out[f"loss_aux{i}"] = self.aux_weight * ce(aux, label)
        return out
