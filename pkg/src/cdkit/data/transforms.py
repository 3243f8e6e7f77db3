"""Pair-consistent augmentation transforms.

Geometric transforms (crop, flip, rotate) draw one decision and apply it
identically to image_a, image_b and label, so the pair stays co-registered.
Photometric jitter is drawn independently per temporal image to mimic
differing acquisition conditions and never touches the label. Every transform
takes an explicit numpy Generator; the pipeline derives it per sample from
(seed, epoch, sample id) so results do not depend on loader scheduling.
"""

import hashlib

import cv2
import numpy as np

from ..registry import TRANSFORMS
from .sample import BiTemporalSample


def derive_rng(seed, epoch, sample_id):
    """Per-sample RNG: a pure function of (seed, epoch, sample id)."""
    key = f"{seed}|{epoch}|{sample_id}".encode()
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "little"))


class Pipeline:
    """Ordered transform list applied with a derived per-sample RNG."""

    def __init__(self, transforms):
        self.transforms = list(transforms)

    def __call__(self, sample, seed=0, epoch=0, sample_id=""):
        rng = derive_rng(seed, epoch, sample_id)
        sample.meta["rng_key"] = {"seed": seed, "epoch": epoch, "id": sample_id}
        for t in self.transforms:
            sample = t(sample, rng)
        return sample.validate()


def build_pipeline(cfgs):
    from ..registry import build_component

    built = []
    for cfg in cfgs or []:
        built.append(build_component(cfg, TRANSFORMS) if isinstance(cfg, dict) else cfg)
    return Pipeline(built)


@TRANSFORMS.register
class RandomCrop:
    """Crop an identical window from both images and the label."""

    def __init__(self, size):
        self.size = (size, size) if isinstance(size, int) else tuple(size)

    def __call__(self, sample, rng):
        ch, cw = self.size
        h, w = sample.label.shape[:2]
        if ch > h or cw > w:
            raise ValueError(f"crop {self.size} larger than image {(h, w)}")
        oy = int(rng.integers(0, h - ch + 1))
        ox = int(rng.integers(0, w - cw + 1))
        sample.image_a = sample.image_a[oy:oy + ch, ox:ox + cw].copy()
        sample.image_b = sample.image_b[oy:oy + ch, ox:ox + cw].copy()
        sample.label = sample.label[oy:oy + ch, ox:ox + cw].copy()
        sample.meta["crop_offset"] = (oy, ox)
        sample.log_transform("random_crop", offset=(oy, ox), size=self.size)
        return sample


@TRANSFORMS.register
class RandomFlip:
    """Horizontal flip applied jointly with probability ``prob``."""

    def __init__(self, prob=0.5):
        self.prob = prob

    def __call__(self, sample, rng):
        flip = bool(rng.random() < self.prob)
        if flip:
            sample.image_a = np.ascontiguousarray(sample.image_a[:, ::-1])
            sample.image_b = np.ascontiguousarray(sample.image_b[:, ::-1])
            sample.label = np.ascontiguousarray(sample.label[:, ::-1])
        sample.log_transform("random_flip", applied=flip)
        return sample


@TRANSFORMS.register
class RandomRotate:
    """Joint rotation about the image center.

    Images are resampled bilinearly with 0 fill; the label uses
    nearest-neighbor and out-of-bounds pixels get the ignore value, so
    rotation never fabricates change labels.
    """

    def __init__(self, angle_range=(-180, 180), prob=0.75, ignore_value=255):
        lo, hi = angle_range
        if not (-180 <= lo <= hi <= 180):
            raise ValueError(f"angle_range {angle_range} outside (-180, 180]")
        self.angle_range = (float(lo), float(hi))
        self.prob = prob
        self.ignore_value = ignore_value

    def __call__(self, sample, rng):
        apply = bool(rng.random() < self.prob)
        angle = float(rng.uniform(*self.angle_range))
        if apply:
            h, w = sample.label.shape[:2]
            center = ((w - 1) / 2.0, (h - 1) / 2.0)
            mat = cv2.getRotationMatrix2D(center, angle, 1.0)
            sample.image_a = self._warp_image(sample.image_a, mat, (w, h))
            sample.image_b = self._warp_image(sample.image_b, mat, (w, h))
            label_dtype = sample.label.dtype
            warped = cv2.warpAffine(
                sample.label.astype(np.float64), mat, (w, h),
                flags=cv2.INTER_NEAREST, borderMode=cv2.BORDER_CONSTANT,
                borderValue=float(self.ignore_value),
            )
            sample.label = warped.astype(label_dtype)
        sample.log_transform("random_rotate", applied=apply,
                             angle=angle if apply else 0.0)
        return sample

    @staticmethod
    def _warp_image(img, mat, size_wh):
        return cv2.warpAffine(
            img, mat, size_wh, flags=cv2.INTER_LINEAR,
            borderMode=cv2.BORDER_CONSTANT, borderValue=0,
        )


@TRANSFORMS.register
class PhotoMetricDistortion:
    """Photometric jitter drawn independently for each temporal image.

    Order is fixed: brightness shift, contrast scale, saturation scale, hue
    shift. Works on 8-bit intensity range (pre-Normalize); outputs are clipped
    to [0, 255]. The label is never touched.
    """

    def __init__(self, brightness_delta=32, contrast_range=(0.5, 1.5),
                 saturation_range=(0.5, 1.5), hue_delta=18):
        self.brightness_delta = brightness_delta
        self.contrast_range = tuple(contrast_range)
        self.saturation_range = tuple(saturation_range)
        self.hue_delta = hue_delta

    def __call__(self, sample, rng):
        sample.image_a = self._jitter(sample.image_a, rng)
        sample.image_b = self._jitter(sample.image_b, rng)
        sample.log_transform("photometric_distortion")
        return sample

    def _jitter(self, img, rng):
        img = img.astype(np.float32)
        delta = float(rng.uniform(-self.brightness_delta, self.brightness_delta))
        alpha = float(rng.uniform(*self.contrast_range))
        beta = float(rng.uniform(*self.saturation_range))
        dhue = float(rng.uniform(-self.hue_delta, self.hue_delta))
        if delta != 0.0:
            img = np.clip(img + delta, 0, 255)
        if alpha != 1.0:
            img = np.clip(img * alpha, 0, 255)
        if img.ndim == 3 and img.shape[2] == 3 and (beta != 1.0 or dhue != 0.0):
            hsv = cv2.cvtColor(img / 255.0, cv2.COLOR_RGB2HSV)
            if beta != 1.0:
                hsv[..., 1] = np.clip(hsv[..., 1] * beta, 0, 1)
            if dhue != 0.0:
                hsv[..., 0] = (hsv[..., 0] + dhue) % 360.0
            img = np.clip(cv2.cvtColor(hsv, cv2.COLOR_HSV2RGB) * 255.0, 0, 255)
        return img


@TRANSFORMS.register
class Normalize:
    """(x - mean) / std per channel, same constants for both images."""

    def __init__(self, mean, std):
        self.mean = np.asarray(mean, dtype=np.float32)
        self.std = np.asarray(std, dtype=np.float32)
        if np.any(self.std <= 0):
            raise ValueError(f"std must be positive, got {std}")

    def __call__(self, sample, rng):
        sample.image_a = (sample.image_a - self.mean) / self.std
        sample.image_b = (sample.image_b - self.mean) / self.std
        sample.meta["img_norm"] = {"mean": self.mean.tolist(), "std": self.std.tolist()}
        sample.log_transform("normalize")
        return sample

    def inverse(self, img):
        return img * self.std + self.mean
