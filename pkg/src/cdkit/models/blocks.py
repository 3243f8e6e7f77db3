"""Shared building blocks and weight init helpers."""

import torch.nn as nn


class ConvBNReLU(nn.Sequential):
    """3x3 (by default) conv + BN + ReLU; conv bias folded into BN."""

    def __init__(self, in_channels, out_channels, kernel_size=3, stride=1,
                 dilation=1):
        padding = dilation * (kernel_size - 1) // 2
        super().__init__(
            nn.Conv2d(in_channels, out_channels, kernel_size, stride=stride,
                      padding=padding, dilation=dilation, bias=False),
            nn.BatchNorm2d(out_channels),
            nn.ReLU(inplace=True),
        )


def kaiming_init(module):
    """Fan-out normal init for convs, unit BN, small-normal linears."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.kaiming_normal_(m.weight, mode="fan_out", nonlinearity="relu")
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, (nn.BatchNorm2d, nn.GroupNorm, nn.LayerNorm)):
            nn.init.ones_(m.weight)
            nn.init.zeros_(m.bias)
        elif isinstance(m, nn.Linear):
            nn.init.normal_(m.weight, std=0.01)
            if m.bias is not None:
                nn.init.zeros_(m.bias)


def zero_init(module):
    """Zero a projection so its residual branch starts as the identity."""
    for p in module.parameters():
        nn.init.zeros_(p)
    return module
