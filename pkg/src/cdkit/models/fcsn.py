"""Early-fusion fully convolutional change detector.

The two dates are concatenated as color channels and pushed through a
U-Net: 4 encoder stages (widths 16..128, conv counts 2,2,3,3) and a
mirrored transposed-conv decoder whose stages consume the concatenated
encoder skips.
"""

import torch
import torch.nn as nn

from ..registry import MODELS
from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init
from .detector import UNetEncoder
from .fusion import early_fuse


@MODELS.register
class FCEF(BaseDetector):
    def __init__(self, in_channels=3, widths=(16, 32, 64, 128),
                 convs=(2, 2, 3, 3), num_classes=2, ignore_value=255,
                 loss_spec=None):
        super().__init__(num_classes, ignore_value, loss_spec, "none")
        self.encoder = UNetEncoder(2 * in_channels, widths, convs, stem_stride=1)
        self.pool = nn.MaxPool2d(2)

        widths = list(widths)
        dec_convs = list(reversed(convs))
        ups, stages = [], []
        prev = widths[-1]
        for i, skip_ch in enumerate(reversed(widths)):
            # deepest stage keeps its width, then each stage hands the next
            # shallower width (or the class count at the very end) onward
            ups.append(nn.ConvTranspose2d(
                prev, skip_ch, 3, stride=2, padding=1, output_padding=1))
            n = dec_convs[i]
            next_ch = widths[-i - 2] if i < len(widths) - 1 else num_classes
            layers = []
            ch = 2 * skip_ch
            for j in range(n):
                if j < n - 1:
                    layers.append(ConvBNReLU(ch, skip_ch))
                    ch = skip_ch
                elif i < len(widths) - 1:
                    layers.append(ConvBNReLU(ch, next_ch))
                else:
                    layers.append(nn.Conv2d(ch, num_classes, 3, padding=1))
            stages.append(nn.Sequential(*layers))
            prev = next_ch
        self.ups = nn.ModuleList(ups)
        self.dec_stages = nn.ModuleList(stages)
        kaiming_init(self.ups)
        kaiming_init(self.dec_stages)

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        feats = self.encoder(early_fuse(xa, xb))
        x = self.pool(feats[-1])
        for up, stage, skip in zip(self.ups, self.dec_stages, reversed(feats)):
            x = resize_to(up(x), skip.shape[-2:])
            x = stage(torch.cat([x, skip], dim=1))
        return resize_to(x, xa.shape[-2:])
