"""Dataset statistics: pair counts, change pixels/instances, CAR histogram.

Change instances are 8-connected components of the change class. The
change-area ratio (CAR) of a pair is changed pixels / total pixels; the
histogram buckets pairs by CAR, so bucket counts always sum to pair_count.
"""

from collections import Counter

import numpy as np
from scipy import ndimage

DEFAULT_CAR_EDGES = (0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0)

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def count_change_instances(mask):
    """8-connected component count of a boolean change mask."""
    _, n = ndimage.label(np.asarray(mask, dtype=bool), structure=_EIGHT_CONNECTED)
    return int(n)


def dataset_stats(dataset, car_edges=DEFAULT_CAR_EDGES):
    """Scan raw labels (no augmentation pipeline) and build a StatsReport."""
    edges = [float(e) for e in car_edges]
    sizes = Counter()
    change_pixels = 0
    change_instances = 0
    cars = []
    for sample_id in dataset.ids:
        sample = dataset.load_raw(sample_id)
        h, w = sample.label.shape[:2]
        sizes[(h, w)] += 1
        mask = sample.label == 1
        pixels = int(mask.sum())
        change_pixels += pixels
        change_instances += count_change_instances(mask)
        cars.append(min(max(pixels / float(h * w), 0.0), 1.0))

    counts, _ = np.histogram(cars, bins=edges) if cars else (
        np.zeros(len(edges) - 1, dtype=int), edges)
    histogram = []
    for i, count in enumerate(counts):
        right = "]" if i == len(counts) - 1 else ")"
        histogram.append({
            "bucket": f"[{edges[i]:.3f}, {edges[i + 1]:.3f}{right}",
            "count": int(count),
        })

    mode_size = sizes.most_common(1)[0][0] if sizes else None
    return {
        "pair_count": len(dataset.ids),
        "image_size": list(mode_size) if mode_size else None,
        "change_pixels": change_pixels,
        "change_instances": change_instances,
        "car_histogram": histogram,
    }


def format_stats(report):
    """Render a StatsReport as a small aligned text table."""
    size = report["image_size"]
    lines = [
        f"pairs:            {report['pair_count']}",
        f"image size:       {size[0]}x{size[1]}" if size else "image size:       n/a",
        f"change pixels:    {report['change_pixels']}",
        f"change instances: {report['change_instances']}",
        "CAR histogram:",
    ]
    for entry in report["car_histogram"]:
        lines.append(f"  {entry['bucket']:>16}  {entry['count']}")
    return "\n".join(lines)
