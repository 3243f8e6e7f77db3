import os

import pytest
import torch
import torch.nn as nn

import cdkit
from cdkit.data import generate_synthetic_dataset
from cdkit.models.base import BaseDetector
from cdkit.models.fusion import early_fuse
from cdkit.registry import MODELS

MODEL_CONFIGS = ["fc_ef", "fc_siam_diff", "fc_siam_conc", "stanet_pam",
                 "snunet_c16", "bit_r18", "changer_r18", "tinycd"]


@MODELS.register
class ToyDetector(BaseDetector):
    """Two-conv early-fusion stub: fast enough for engine/CLI plumbing tests."""

    def __init__(self, channels=8, force_nan_loss=False, num_classes=2,
                 ignore_value=255, loss_spec=None):
        super().__init__(num_classes, ignore_value, loss_spec, "none")
        self.net = nn.Sequential(
            nn.Conv2d(6, channels, 3, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(channels, num_classes, 1),
        )
        self.force_nan_loss = force_nan_loss

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        return self.net(early_fuse(xa, xb))

    def loss(self, batch):
        if self.force_nan_loss:
            anchor = next(self.parameters()).sum()
            return {"loss_ce": anchor * torch.nan}
        return super().loss(batch)


@MODELS.register
class AbsDiffOracle(BaseDetector):
    """Parameter-free rule model: change wherever mean |A-B| > threshold.

    Useful as a perfect predictor on datasets whose labels were built from
    the same rule, so evaluation commands can be checked against f1_c == 1.
    """

    def __init__(self, threshold=127.0, num_classes=2, ignore_value=255):
        super().__init__(num_classes, ignore_value, None, "invariant")
        self.threshold = threshold

    def forward(self, xa, xb):
        self.check_pair(xa, xb)
        diff = (xa - xb).abs().mean(dim=1, keepdim=True)
        return torch.cat([self.threshold - diff, diff - self.threshold], dim=1)


def toy_dataset_cfg(root, split="train"):
    return {
        "type": "FolderPairDataset",
        "root": root,
        "split": split,
        "task": "binary",
        "classes": ["unchanged", "change"],
        "ignore_value": 255,
        "pipeline": [{"type": "Normalize",
                      "mean": [127.5, 127.5, 127.5],
                      "std": [127.5, 127.5, 127.5]}],
    }


def toy_train_cfg(root, work_dir=None, hooks=None, **train_overrides):
    """A complete, fast training config over the toy detector."""
    train = {
        "max_iters": 4,
        "val_interval": 2,
        "batch_size": 2,
        "seed": 0,
        "optimizer": {"type": "SGD", "lr": 0.05, "momentum": 0.9},
        "scheduler": {"policy": "constant", "warmup_iters": 0},
    }
    train.update(train_overrides)
    cfg = {
        "model": {"type": "ToyDetector", "channels": 8},
        "data": {"train": toy_dataset_cfg(root), "val": toy_dataset_cfg(root)},
        "train": train,
        "hooks": hooks if hooks is not None else [],
    }
    if work_dir is not None:
        cfg["work_dir"] = work_dir
    return cfg


def model_config_path(name):
    return cdkit.config_path(f"models/{name}.yaml")


def synthetic_config_path(name):
    return cdkit.config_path(f"synthetic/{name}_synthetic.yaml")


@pytest.fixture(scope="session")
def synth_root(tmp_path_factory):
    """A 20-pair 64x64 synthetic corpus shared across the session."""
    root = tmp_path_factory.mktemp("synth")
    manifest = generate_synthetic_dataset(str(root), n_pairs=20, size=64,
                                          seed=0)
    return str(root), manifest


@pytest.fixture(scope="session")
def small_synth_root(tmp_path_factory):
    """A 6-pair corpus for cheap dataset/engine tests."""
    root = tmp_path_factory.mktemp("synth_small")
    manifest = generate_synthetic_dataset(str(root), n_pairs=6, size=64,
                                          seed=7)
    return str(root), manifest


def synthetic_train_overrides(root, **extra):
    """Config overrides pointing a synthetic training config at ``root``."""
    overrides = {"data.train.root": root, "data.val.root": root}
    overrides.update(extra)
    return overrides


@pytest.fixture()
def work_dir(tmp_path):
    d = tmp_path / "work"
    os.makedirs(d, exist_ok=True)
    return str(d)
