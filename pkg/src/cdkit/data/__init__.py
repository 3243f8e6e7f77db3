from .sample import BiTemporalSample
from .transforms import (Normalize, PhotoMetricDistortion, Pipeline,
                         RandomCrop, RandomFlip, RandomRotate, build_pipeline,
                         derive_rng)
from .datasets import FolderPairDataset, index_dataset
from .synthetic import count_instances_bruteforce, generate_synthetic_dataset
from .stats import dataset_stats, format_stats, count_change_instances

__all__ = [
    "BiTemporalSample", "Pipeline", "build_pipeline", "derive_rng",
    "RandomCrop", "RandomFlip", "RandomRotate", "PhotoMetricDistortion",
    "Normalize", "FolderPairDataset", "index_dataset",
    "generate_synthetic_dataset", "count_instances_bruteforce",
    "dataset_stats", "format_stats", "count_change_instances",
]
