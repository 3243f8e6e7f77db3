"""Synthetic bi-temporal scene generator for desk-scale verification.

Each pair starts from a shared smooth background; image B differs from A by
shapes that were added, removed or moved. Shapes never overlap each other
(a moved shape may overlap its own previous footprint), so the change label,
the exact symmetric difference of the two shape-union masks, is also exactly
the set of pixels where A and B differ. The generator keeps its own
bookkeeping (change pixels, brute-force instance counts, change-area ratio)
to serve as an oracle for the stats tooling.
"""

import json
import os

import cv2
import numpy as np
from PIL import Image

MAX_TRIES = 80


def count_instances_bruteforce(mask):
    """8-connected component count by explicit flood fill."""
    mask = np.asarray(mask, dtype=bool)
    visited = np.zeros_like(mask)
    h, w = mask.shape
    count = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or visited[sy, sx]:
                continue
            count += 1
            stack = [(sy, sx)]
            visited[sy, sx] = True
            while stack:
                y, x = stack.pop()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] \
                                and not visited[ny, nx]:
                            visited[ny, nx] = True
                            stack.append((ny, nx))
    return count


def _random_shape_mask(rng, size):
    """One disk or axis-aligned rectangle, fully inside the image."""
    mask = np.zeros((size, size), dtype=bool)
    if rng.random() < 0.5:
        r = int(rng.integers(3, max(4, size // 8) + 1))
        cy = int(rng.integers(r, size - r))
        cx = int(rng.integers(r, size - r))
        yy, xx = np.ogrid[:size, :size]
        mask[(yy - cy) ** 2 + (xx - cx) ** 2 <= r * r] = True
    else:
        h = int(rng.integers(5, max(6, size // 5) + 1))
        w = int(rng.integers(5, max(6, size // 5) + 1))
        y0 = int(rng.integers(0, size - h))
        x0 = int(rng.integers(0, size - w))
        mask[y0:y0 + h, x0:x0 + w] = True
    return mask


def _place_disjoint(rng, size, occupancy, allow=None):
    """Draw a shape mask disjoint from occupancy (minus ``allow``)."""
    blocked = occupancy if allow is None else (occupancy & ~allow)
    for _ in range(MAX_TRIES):
        mask = _random_shape_mask(rng, size)
        if not (mask & blocked).any():
            return mask
    return None


def _shape_color(rng):
    """High-contrast color against the mid-range background."""
    lo = rng.uniform(0, 50, size=3)
    hi = rng.uniform(205, 255, size=3)
    pick = rng.random(3) < 0.5
    return np.where(pick, lo, hi).astype(np.float32)


def _background(rng, size):
    coarse = rng.uniform(95.0, 160.0, size=(8, 8, 3)).astype(np.float32)
    return cv2.resize(coarse, (size, size), interpolation=cv2.INTER_LINEAR)


def _render(background, shapes):
    img = background.copy()
    for mask, color in shapes:
        img[mask] = color
    return np.clip(img, 0, 255).astype(np.uint8)


def generate_synthetic_dataset(out_dir, n_pairs=20, size=64, shapes_per_image=4,
                               change_rate=0.5, seed=0, split="train"):
    """Write A/B/label triples under ``out_dir`` and return the manifest.

    change_rate=0 yields B identical to A and all-zero labels. Generation is
    deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    dirs = {sub: os.path.join(out_dir, split, sub) for sub in ("A", "B", "label")}
    for d in dirs.values():
        os.makedirs(d, exist_ok=True)

    pairs = []
    for idx in range(n_pairs):
        background = _background(rng, size)
        occupancy = np.zeros((size, size), dtype=bool)

        shapes_a = []
        for _ in range(shapes_per_image):
            mask = _place_disjoint(rng, size, occupancy)
            if mask is None:
                continue
            occupancy |= mask
            shapes_a.append((mask, _shape_color(rng)))

        shapes_b = list(shapes_a)
        for i, (mask, color) in enumerate(shapes_a):
            if rng.random() >= change_rate:
                continue
            if rng.random() < 0.5:
                shapes_b[i] = None
            else:
                moved = _place_disjoint(rng, size, occupancy, allow=mask)
                if moved is not None:
                    occupancy |= moved
                    shapes_b[i] = (moved, color)
                else:
                    shapes_b[i] = None
        shapes_b = [s for s in shapes_b if s is not None]

        n_add = int(rng.binomial(shapes_per_image, change_rate))
        for _ in range(n_add):
            mask = _place_disjoint(rng, size, occupancy)
            if mask is None:
                continue
            occupancy |= mask
            shapes_b.append((mask, _shape_color(rng)))

        union_a = np.zeros((size, size), dtype=bool)
        for mask, _ in shapes_a:
            union_a |= mask
        union_b = np.zeros((size, size), dtype=bool)
        for mask, _ in shapes_b:
            union_b |= mask
        change = union_a ^ union_b

        name = f"pair_{idx:03d}.png"
        Image.fromarray(_render(background, shapes_a)).save(
            os.path.join(dirs["A"], name))
        Image.fromarray(_render(background, shapes_b)).save(
            os.path.join(dirs["B"], name))
        Image.fromarray((change.astype(np.uint8) * 255)).save(
            os.path.join(dirs["label"], name))

        pixels = int(change.sum())
        pairs.append({
            "id": name,
            "change_pixels": pixels,
            "change_instances": count_instances_bruteforce(change),
            "car": pixels / float(size * size),
        })

    manifest = {
        "root": out_dir,
        "split": split,
        "pair_count": n_pairs,
        "image_size": [size, size],
        "change_pixels": sum(p["change_pixels"] for p in pairs),
        "change_instances": sum(p["change_instances"] for p in pairs),
        "pairs": pairs,
        "spec": {
            "n_pairs": n_pairs, "size": size,
            "shapes_per_image": shapes_per_image,
            "change_rate": change_rate, "seed": seed,
        },
    }
    with open(os.path.join(out_dir, f"manifest_{split}.json"), "w") as f:
        json.dump(manifest, f, indent=2)
    return manifest
