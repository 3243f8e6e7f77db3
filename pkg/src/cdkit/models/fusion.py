"""Bi-temporal fusion and interaction operators.

Covers channel concatenation of the raw pair (early fusion), per-stage
feature concat / absolute difference, the parameter-free spatial and channel
exchanges, and flow-based dual-alignment fusion (FDAF).
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..registry import MODELS
from .blocks import ConvBNReLU, kaiming_init, zero_init


def _check_same_shape(fa, fb):
    if fa.shape != fb.shape:
        raise ValueError(f"shape mismatch: {tuple(fa.shape)} vs {tuple(fb.shape)}")


def early_fuse(xa, xb):
    """Concatenate the two dates as color channels (A first)."""
    _check_same_shape(xa, xb)
    return torch.cat([xa, xb], dim=1)


def fuse_concat(fa, fb):
    _check_same_shape(fa, fb)
    return torch.cat([fa, fb], dim=1)


def fuse_absdiff(fa, fb):
    _check_same_shape(fa, fb)
    return (fa - fb).abs()


def _exchange_modulus(p):
    m = round(1.0 / p)
    if m < 2 or abs(1.0 / m - p) > 1e-9:
        raise ValueError(f"exchange ratio must be 1/m for integer m >= 2, got {p}")
    return m


def spatial_exchange(fa, fb, p=0.5):
    """Swap values between the pair on columns where w mod m == 0 (p = 1/m)."""
    _check_same_shape(fa, fb)
    m = _exchange_modulus(p)
    mask = torch.arange(fa.shape[-1], device=fa.device) % m == 0
    out_a = torch.where(mask, fb, fa)
    out_b = torch.where(mask, fa, fb)
    return out_a, out_b


def channel_exchange(fa, fb, p=0.5):
    """Swap values between the pair on channels where c mod m == 0 (p = 1/m)."""
    _check_same_shape(fa, fb)
    m = _exchange_modulus(p)
    mask = (torch.arange(fa.shape[1], device=fa.device) % m == 0).view(1, -1, 1, 1)
    out_a = torch.where(mask, fb, fa)
    out_b = torch.where(mask, fa, fb)
    return out_a, out_b


@MODELS.register
class ConcatFusion(nn.Module):
    """Channel-concat fusion; output has 2C channels."""

    def forward(self, fa, fb):
        return fuse_concat(fa, fb)

    @staticmethod
    def out_channels(c):
        return 2 * c


@MODELS.register
class AbsDiffFusion(nn.Module):
    """Absolute-difference fusion; output keeps C channels."""

    def forward(self, fa, fb):
        return fuse_absdiff(fa, fb)

    @staticmethod
    def out_channels(c):
        return c


@MODELS.register
class SpatialExchange(nn.Module):
    def __init__(self, p=0.5):
        super().__init__()
        _exchange_modulus(p)
        self.p = p

    def forward(self, fa, fb):
        return spatial_exchange(fa, fb, self.p)


@MODELS.register
class ChannelExchange(nn.Module):
    def __init__(self, p=0.5):
        super().__init__()
        _exchange_modulus(p)
        self.p = p

    def forward(self, fa, fb):
        return channel_exchange(fa, fb, self.p)


def flow_warp(x, flow):
    """Bilinear backward warp: out(p) = x(p + flow(p)).

    flow is N x 2 x H x W in pixel units, channel 0 = dx, channel 1 = dy.
    Samples outside the image read as 0.
    """
    n, _, h, w = flow.shape
    ys, xs = torch.meshgrid(
        torch.arange(h, dtype=x.dtype, device=x.device),
        torch.arange(w, dtype=x.dtype, device=x.device),
        indexing="ij",
    )
    sx = xs.unsqueeze(0) + flow[:, 0]
    sy = ys.unsqueeze(0) + flow[:, 1]
    gx = 2.0 * sx / max(w - 1, 1) - 1.0
    gy = 2.0 * sy / max(h - 1, 1) - 1.0
    grid = torch.stack([gx, gy], dim=-1)
    return F.grid_sample(x, grid, mode="bilinear", padding_mode="zeros",
                         align_corners=True)


@MODELS.register
class FDAF(nn.Module):
    """Flow-based dual-alignment fusion.

    A small conv stack on concat(fa, fb) predicts a 2-channel flow field; it
    runs once per ordering of the pair, so each date gets a flow that warps
    the other date toward it. The module projects the channel-concat of
    (fa - warp(fb)) and (fb - warp(fa)). The flow predictor and the
    projection start at zero, so the module begins as zero flow with zero
    output.
    """

    def __init__(self, in_channels, out_channels=None, flow_kernel=3):
        super().__init__()
        out_channels = out_channels or in_channels
        self.in_channels = in_channels
        self.out_channels_ = out_channels
        self.flow_conv = ConvBNReLU(2 * in_channels, in_channels)
        self.flow_pred = nn.Conv2d(in_channels, 2, flow_kernel,
                                   padding=flow_kernel // 2)
        self.proj = nn.Conv2d(2 * in_channels, out_channels, 1)
        kaiming_init(self)
        zero_init(self.flow_pred)
        zero_init(self.proj)

    def _flow(self, ref, other):
        return self.flow_pred(self.flow_conv(torch.cat([ref, other], dim=1)))

    def difference_features(self, fa, fb):
        """Pre-projection concat [fa - warp(fb); fb - warp(fa)].

        The shared flow predictor sees both orderings, so swapping (fa, fb)
        swaps the two channel halves of this tensor exactly.
        """
        _check_same_shape(fa, fb)
        da = fa - flow_warp(fb, self._flow(fa, fb))
        db = fb - flow_warp(fa, self._flow(fb, fa))
        return torch.cat([da, db], dim=1)

    def forward(self, fa, fb):
        return self.proj(self.difference_features(fa, fb))
