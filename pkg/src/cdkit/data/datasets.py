"""Bi-temporal folder datasets.

On-disk layout: ``{root}/{split}/A``, ``/B`` and ``/label`` holding
identically named rasters. Binary change labels are stored as {0, 255} and
mapped to class indices {0, 1} on load; semantic labels keep raw indices.
"""

import os

import numpy as np
from PIL import Image

from ..errors import DataError
from ..registry import DATASETS
from .sample import BiTemporalSample
from .transforms import Pipeline, build_pipeline

SUBDIRS = ("A", "B", "label")


def index_dataset(root, split):
    """List sample ids (file names) in lexicographic order.

    Every id must have all three files with matching dimensions; violations
    raise at indexing time.
    """
    dirs = {}
    for sub in SUBDIRS:
        d = os.path.join(root, split, sub)
        if not os.path.isdir(d):
            raise DataError(f"missing dataset directory: {d}")
        dirs[sub] = d
    names = sorted(
        n for n in os.listdir(dirs["A"])
        if os.path.isfile(os.path.join(dirs["A"], n))
    )
    for name in names:
        sizes = {}
        for sub in SUBDIRS:
            path = os.path.join(dirs[sub], name)
            if not os.path.isfile(path):
                raise DataError(f"missing counterpart file: {path}")
            with Image.open(path) as im:
                sizes[sub] = im.size
        if len(set(sizes.values())) != 1:
            raise DataError(f"dimension mismatch for sample '{name}': {sizes}")
    return names


@DATASETS.register
class FolderPairDataset:
    """Descriptor-backed dataset yielding BiTemporalSample instances."""

    def __init__(self, root, split="train", task="binary", pipeline=(),
                 classes=("unchanged", "change"), ignore_value=255):
        if task not in ("binary", "semantic"):
            raise DataError(f"unknown task '{task}'")
        self.root = root
        self.split = split
        self.task = task
        self.classes = tuple(classes)
        self.ignore_value = ignore_value
        if isinstance(pipeline, Pipeline):
            self.pipeline = pipeline
        else:
            self.pipeline = build_pipeline(pipeline)
        self.ids = index_dataset(root, split)

    def __len__(self):
        return len(self.ids)

    @property
    def num_classes(self):
        return len(self.classes)

    def _path(self, sub, sample_id):
        return os.path.join(self.root, self.split, sub, sample_id)

    def load_raw(self, sample_id):
        """Decode one triple without running the transform pipeline."""
        if isinstance(sample_id, int):
            sample_id = self.ids[sample_id]
        pa, pb, pl = (self._path(s, sample_id) for s in SUBDIRS)
        image_a = self._read_image(pa)
        image_b = self._read_image(pb)
        label = self._read_label(pl)
        native = label.shape[:2]
        meta = {
            "id": sample_id,
            "paths": {"A": pa, "B": pb, "label": pl},
            "native_size": native,
            "ignore_value": self.ignore_value,
        }
        return BiTemporalSample(image_a, image_b, label, meta).validate()

    def get(self, sample_id, seed=0, epoch=0):
        if isinstance(sample_id, int):
            sample_id = self.ids[sample_id]
        sample = self.load_raw(sample_id)
        return self.pipeline(sample, seed=seed, epoch=epoch, sample_id=sample_id)

    @staticmethod
    def _read_image(path):
        try:
            with Image.open(path) as im:
                return np.asarray(im.convert("RGB"), dtype=np.float32)
        except (OSError, ValueError) as e:
            raise DataError(f"unreadable raster {path}: {e}") from e

    def _read_label(self, path):
        try:
            with Image.open(path) as im:
                arr = np.asarray(im.convert("L") if im.mode not in ("L", "I", "P")
                                 else im)
        except (OSError, ValueError) as e:
            raise DataError(f"unreadable raster {path}: {e}") from e
        if arr.ndim == 3:
            arr = arr[..., 0]
        arr = arr.astype(np.int64)
        if self.task == "binary":
            values = set(np.unique(arr).tolist())
            if not values <= {0, 255}:
                raise DataError(
                    f"binary label {path} has values {sorted(values)}, "
                    "expected subset of {0, 255}"
                )
            arr = (arr == 255).astype(np.int64)
        return arr
