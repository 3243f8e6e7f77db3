from .base import BaseDetector, resize_to
from .blocks import ConvBNReLU, kaiming_init, zero_init
from .fusion import (FDAF, AbsDiffFusion, ChannelExchange, ConcatFusion,
                     SpatialExchange, channel_exchange, early_fuse, flow_warp,
                     fuse_absdiff, fuse_concat, spatial_exchange)
from .attention import BAM, ECAM, PAM, ChannelAttentionLogits
from .losses import BCLLoss, CrossEntropyLoss
from .detector import ChangeDetector, UNetDecodeHead, UNetEncoder
from .resnet import BasicBlock, ResNetEncoder
from .fcsn import FCEF
from .snunet import SNUNet
from .stanet import STANet
from .bit import BIT, MultiHeadAttention, Tokenizer, TransformerBlock
from .changer import Changer
from .tinycd import MAMB, TinyCD

__all__ = [
    "BaseDetector", "resize_to", "ConvBNReLU", "kaiming_init", "zero_init",
    "early_fuse", "fuse_concat", "fuse_absdiff", "spatial_exchange",
    "channel_exchange", "flow_warp", "ConcatFusion", "AbsDiffFusion",
    "SpatialExchange", "ChannelExchange", "FDAF", "BAM", "PAM", "ECAM",
    "ChannelAttentionLogits", "CrossEntropyLoss", "BCLLoss",
    "ChangeDetector", "UNetEncoder", "UNetDecodeHead", "ResNetEncoder",
    "BasicBlock", "FCEF", "SNUNet", "STANet", "BIT", "MultiHeadAttention",
    "Tokenizer", "TransformerBlock", "Changer", "MAMB", "TinyCD",
]
