"""Token-based transformer detector.

Each date's feature map is abstracted into a few visual tokens via softmax
spatial-attention pooling; the concatenated token sets pass through a
transformer encoder to build spatio-temporal context, and a shared
cross-attention decoder enhances each date's pixel features with its own
token half. Prediction uses the absolute difference of the enhanced pair.
All residual output projections start at zero, so tokenize+refine is the
identity at init.
"""

import math

import torch
import torch.nn as nn

from ..registry import MODELS
from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init, zero_init
from .fusion import fuse_absdiff
from .resnet import ResNetEncoder


class MultiHeadAttention(nn.Module):
    """Minimal multi-head attention; the output projection is zero-init."""

    def __init__(self, dim_q, dim_kv, embed_dim, heads):
        super().__init__()
        if embed_dim % heads:
            raise ValueError(f"embed_dim {embed_dim} not divisible by {heads} heads")
        self.heads = heads
        self.head_dim = embed_dim // heads
        self.q = nn.Linear(dim_q, embed_dim)
        self.k = nn.Linear(dim_kv, embed_dim)
        self.v = nn.Linear(dim_kv, embed_dim)
        self.out = nn.Linear(embed_dim, dim_q)
        kaiming_init(self)
        zero_init(self.out)
        self.last_extra_macs = 0

    def forward(self, query, kv):
        n, lq, _ = query.shape
        lk = kv.shape[1]
        def split(x):
            return x.reshape(n, -1, self.heads, self.head_dim).transpose(1, 2)
        q, k, v = split(self.q(query)), split(self.k(kv)), split(self.v(kv))
        attn = torch.softmax(q @ k.transpose(-1, -2) / math.sqrt(self.head_dim),
                             dim=-1)
        y = (attn @ v).transpose(1, 2).reshape(n, lq, -1)
        self.last_extra_macs += 2 * n * self.heads * lq * lk * self.head_dim
        return self.out(y)


class TransformerBlock(nn.Module):
    """Pre-norm residual attention + MLP; identity when projections are 0."""

    def __init__(self, dim, embed_dim, heads, kv_dim=None, mlp_ratio=2):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.norm_kv = nn.LayerNorm(kv_dim) if kv_dim is not None else None
        self.attn = MultiHeadAttention(dim, kv_dim or dim, embed_dim, heads)
        self.norm2 = nn.LayerNorm(dim)
        hidden = dim * mlp_ratio
        self.mlp = nn.Sequential(nn.Linear(dim, hidden), nn.GELU(),
                                 nn.Linear(hidden, dim))
        kaiming_init(self.mlp)
        zero_init(self.mlp[-1])

    def forward(self, x, kv=None):
        if kv is None:
            x = x + self.attn(self.norm1(x), self.norm1(x))
        else:
            x = x + self.attn(self.norm1(x), self.norm_kv(kv))
        return x + self.mlp(self.norm2(x))


class Tokenizer(nn.Module):
    """L softmax spatial-attention maps pool projected pixels into L tokens."""

    def __init__(self, in_channels, token_count, embed_dim):
        super().__init__()
        self.token_count = token_count
        self.spatial_attn = nn.Conv2d(in_channels, token_count, 1)
        self.proj = nn.Conv2d(in_channels, embed_dim, 1)
        kaiming_init(self)
        self.last_extra_macs = 0

    def attention_maps(self, f):
        n = f.shape[0]
        return torch.softmax(
            self.spatial_attn(f).reshape(n, self.token_count, -1), dim=-1)

    def forward(self, f):
        n, _, h, w = f.shape
        attn = self.attention_maps(f)
        values = self.proj(f).reshape(n, -1, h * w).transpose(1, 2)
        self.last_extra_macs += n * self.token_count * h * w * values.shape[-1]
        return attn @ values


@MODELS.register
class BIT(BaseDetector):
    def __init__(self, in_channels=3, feat_channels=32, token_count=4,
                 embed_dim=64, encoder_depth=1, decoder_depth=8, heads=8,
                 num_classes=2, ignore_value=255, loss_spec=None):
        if token_count < 1:
            raise ValueError("token_count must be >= 1")
        super().__init__(num_classes, ignore_value, loss_spec, "invariant")
        self.backbone = ResNetEncoder(in_channels, widths=(64, 128, 256),
                                      blocks=(2, 2, 2))
        self.reduce_low = nn.Conv2d(64, feat_channels, 1)
        self.reduce_high = nn.Conv2d(256, feat_channels, 1)
        kaiming_init(self.reduce_low)
        kaiming_init(self.reduce_high)

        self.tokenizer = Tokenizer(feat_channels, token_count, embed_dim)
        self.token_encoder = nn.ModuleList([
            TransformerBlock(embed_dim, embed_dim, heads)
            for _ in range(encoder_depth)
        ])
        self.pixel_decoder = nn.ModuleList([
            TransformerBlock(feat_channels, embed_dim, heads, kv_dim=embed_dim)
            for _ in range(decoder_depth)
        ])
        self.head = nn.Sequential(
            ConvBNReLU(feat_channels, feat_channels),
            nn.Conv2d(feat_channels, num_classes, 1),
        )
        kaiming_init(self.head)

    def extract_feat(self, x):
        low, _, high = self.backbone(x)
        return self.reduce_low(low) + resize_to(self.reduce_high(high),
                                                low.shape[-2:])

    def tokenize(self, f):
        return self.tokenizer(f)

    def refine(self, fa, fb, tokens_a, tokens_b):
        """Encode the concatenated token sets, then let each date's pixels
        cross-attend to its own token half. Output shapes match the inputs."""
        tokens = torch.cat([tokens_a, tokens_b], dim=1)
        for block in self.token_encoder:
            tokens = block(tokens)
        l = tokens_a.shape[1]
        tokens_a, tokens_b = tokens[:, :l], tokens[:, l:]

        def decode(f, toks):
            n, c, h, w = f.shape
            pixels = f.reshape(n, c, h * w).transpose(1, 2)
            for block in self.pixel_decoder:
                pixels = block(pixels, kv=toks)
            return pixels.transpose(1, 2).reshape(n, c, h, w)

        return decode(fa, tokens_a), decode(fb, tokens_b)

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        fa = self.extract_feat(xa)
        fb = self.extract_feat(xb)
        fa, fb = self.refine(fa, fb, self.tokenize(fa), self.tokenize(fb))
        logits = self.head(fuse_absdiff(fa, fb))
        return resize_to(logits, xa.shape[-2:])
