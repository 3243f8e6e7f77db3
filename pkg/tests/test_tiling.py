"""Sliding-window inference: tile placement, overlap averaging, and the
tiled == untiled consistency oracle on translation-invariant stubs."""

import numpy as np
import pytest
import torch
import torch.nn as nn

from cdkit.models.base import BaseDetector
from cdkit.tools import image_to_tensor, predict_full, predict_tiled, tile_starts


class ConstantLogitModel(BaseDetector):
    """Ignores input content; emits fixed per-class logits everywhere."""

    def __init__(self, values=(0.25, 0.75)):
        super().__init__(num_classes=len(values))
        self.values = torch.tensor(values).view(1, -1, 1, 1)
        self._token = nn.Parameter(torch.zeros(1))  # keep optimizer-friendly

    def forward(self, xa, xb):
        n, _, h, w = xa.shape
        return self.values.expand(n, -1, h, w).clone()


class PixelwiseModel(BaseDetector):
    """1x1 convs only: fully translation invariant, content dependent."""

    def __init__(self, seed=0):
        super().__init__()
        g = torch.Generator().manual_seed(seed)
        self.net = nn.Sequential(nn.Conv2d(6, 8, 1), nn.Tanh(),
                                 nn.Conv2d(8, 2, 1))
        with torch.no_grad():
            for p in self.net.parameters():
                p.copy_(torch.randn(p.shape, generator=g) * 0.5)

    def forward(self, xa, xb):
        return self.net(torch.cat([xa, xb], dim=1))


def _scene(h, w, seed=0):
    g = torch.Generator().manual_seed(seed)
    return (torch.randn(1, 3, h, w, generator=g),
            torch.randn(1, 3, h, w, generator=g))


class TestTileStarts:
    def test_exact_cover_no_clamp(self):
        assert tile_starts(10, 4, 3) == [0, 3, 6]

    def test_clamped_final_tile(self):
        assert tile_starts(700, 256, 192) == [0, 192, 384, 444]

    def test_single_tile_when_equal(self):
        assert tile_starts(256, 256, 192) == [0]

    def test_stride_larger_than_tile_rejected(self):
        # stride > tile would leave uncovered pixels between tiles
        with pytest.raises(ValueError, match="no prediction"):
            tile_starts(20, 4, 6)

    def test_full_coverage_property(self):
        for length, tile, stride in [(700, 256, 192), (65, 32, 32),
                                     (100, 33, 7), (13, 13, 5)]:
            covered = np.zeros(length, dtype=bool)
            for s in tile_starts(length, tile, stride):
                assert 0 <= s <= length - tile
                covered[s:s + tile] = True
            assert covered.all(), (length, tile, stride)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            tile_starts(10, 0, 3)
        with pytest.raises(ValueError, match="positive"):
            tile_starts(10, 4, 0)

    def test_tile_larger_than_image_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            tile_starts(10, 11, 3)


class TestPredictTiled:
    def test_constant_logit_model_consistency_700(self):
        model = ConstantLogitModel()
        xa, xb = _scene(700, 700)
        pred_t, logits_t = predict_tiled(model, xa, xb, tile=256, stride=192)
        pred_f, logits_f = predict_full(model, xa, xb)
        assert torch.equal(pred_t, pred_f)
        assert torch.equal(logits_t, logits_f)
        assert torch.equal(pred_t, torch.ones(1, 700, 700, dtype=torch.int64))

    def test_translation_invariant_model_consistency_700(self):
        model = PixelwiseModel(seed=3)
        xa, xb = _scene(700, 700, seed=1)
        pred_t, logits_t = predict_tiled(model, xa, xb, tile=256, stride=192)
        pred_f, logits_f = predict_full(model, xa, xb)
        assert torch.equal(pred_t, pred_f)
        # overlap averaging of identical per-tile logits is exact in float64
        assert torch.allclose(logits_t, logits_f, atol=1e-6)

    def test_non_square_scene(self):
        model = PixelwiseModel(seed=4)
        xa, xb = _scene(300, 500, seed=2)
        pred_t, _ = predict_tiled(model, xa, xb, tile=256, stride=192)
        pred_f, _ = predict_full(model, xa, xb)
        assert torch.equal(pred_t, pred_f)

    def test_output_shapes_and_dtypes(self):
        model = ConstantLogitModel()
        xa, xb = _scene(300, 300)
        pred, logits = predict_tiled(model, xa, xb, tile=256, stride=192)
        assert pred.shape == (1, 300, 300) and pred.dtype == torch.int64
        assert logits.shape == (1, 2, 300, 300)
        assert logits.dtype == torch.float32

    def test_shape_mismatch_rejected(self):
        model = ConstantLogitModel()
        with pytest.raises(ValueError, match="share a shape"):
            predict_tiled(model, torch.zeros(1, 3, 300, 300),
                          torch.zeros(1, 3, 300, 299), tile=256, stride=192)

    def test_eval_mode_restored(self):
        model = PixelwiseModel()
        model.train()
        xa, xb = _scene(300, 300)
        predict_tiled(model, xa, xb, tile=256, stride=192)
        assert model.training
        predict_full(model, xa, xb)
        assert model.training

    def test_overlap_blending_averages_logits(self):
        # a model whose logits depend on absolute tile content: blending of
        # disagreeing tiles must equal the mean of contributions
        class MeanModel(BaseDetector):
            def __init__(self):
                super().__init__()
                self._token = nn.Parameter(torch.zeros(1))

            def forward(self, xa, xb):
                n, _, h, w = xa.shape
                mean = xa.mean()  # differs per tile
                out = torch.zeros(n, 2, h, w)
                out[:, 1] = mean
                return out

        model = MeanModel()
        g = torch.Generator().manual_seed(0)
        xa = torch.randn(1, 3, 6, 10, generator=g)
        xb = xa.clone()
        _, logits = predict_tiled(model, xa, xb, tile=6, stride=4)
        # columns 4..5 are covered by both tiles (starts 0 and 4)
        m0 = xa[:, :, :, 0:6].mean()
        m1 = xa[:, :, :, 4:10].mean()
        both = (m0 + m1) / 2
        assert torch.allclose(logits[0, 1, :, 5], both.expand(6), atol=1e-6)
        assert torch.allclose(logits[0, 1, :, 0], m0.expand(6), atol=1e-6)
        assert torch.allclose(logits[0, 1, :, 9], m1.expand(6), atol=1e-6)


class TestImageToTensor:
    def test_layout_and_dtype(self):
        array = np.arange(24, dtype=np.float32).reshape(2, 4, 3)
        tensor = image_to_tensor(array)
        assert tensor.shape == (1, 3, 2, 4)
        assert tensor.dtype == torch.float32
        assert tensor[0, 2, 1, 3].item() == array[1, 3, 2]
