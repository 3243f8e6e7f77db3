"""The unit flowing through the data pipeline: one aligned image pair."""

import copy
from dataclasses import dataclass, field

import numpy as np


@dataclass
class BiTemporalSample:
    """Aligned bi-temporal pair with a change label and bookkeeping meta.

    image_a / image_b are H x W x C float32 rasters (8-bit intensity range
    before Normalize, real-valued after). label is an H x W integer map with
    values in {0..K-1} plus the reserved ignore value. The three arrays always
    share spatial dims; every geometric transform is applied identically to
    all of them and logged in meta["transforms"].
    """

    image_a: np.ndarray
    image_b: np.ndarray
    label: np.ndarray
    meta: dict = field(default_factory=dict)

    def validate(self):
        ha, wa = self.image_a.shape[:2]
        hb, wb = self.image_b.shape[:2]
        hl, wl = self.label.shape[:2]
        if not (ha, wa) == (hb, wb) == (hl, wl):
            raise ValueError(
                f"misaligned sample: A {ha}x{wa}, B {hb}x{wb}, label {hl}x{wl}"
            )
        return self

    def copy(self):
        return BiTemporalSample(
            image_a=self.image_a.copy(),
            image_b=self.image_b.copy(),
            label=self.label.copy(),
            meta=copy.deepcopy(self.meta),
        )

    def log_transform(self, name, **params):
        self.meta.setdefault("transforms", []).append({"name": name, **params})
