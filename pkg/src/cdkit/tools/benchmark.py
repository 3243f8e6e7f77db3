"""Model cost accounting: parameter counts, analytic MACs, wall-clock fps.

Compute is counted analytically from layer shapes, not sampled from a
profiler. Conv / transposed-conv / linear layers are covered by forward
hooks; modules with data-dependent matmuls (attention) accumulate their own
counts in a ``last_extra_macs`` attribute which is reset before the measured
forward and collected after it. One multiply-accumulate is reported as one
FLOP unit; elementwise ops, normalization, pooling and interpolation are not
counted.
"""

import statistics
import time

import torch
from torch import nn

FLOP_CONVENTION = ("FLOPs counted as multiply-accumulates "
                   "(1 MAC = 1 FLOP unit); conv/deconv/linear/attention "
                   "matmuls only")


def count_params(model):
    return int(sum(p.numel() for p in model.parameters()))


def _conv2d_macs(module, inputs, output):
    kh, kw = module.kernel_size
    cin_per_group = module.in_channels // module.groups
    return output.numel() * kh * kw * cin_per_group


def _conv_transpose2d_macs(module, inputs, output):
    kh, kw = module.kernel_size
    cout_per_group = module.out_channels // module.groups
    return inputs[0].numel() * kh * kw * cout_per_group


def _linear_macs(module, inputs, output):
    return output.numel() * module.in_features


def count_macs(model, image_a, image_b):
    """Analytic multiply-accumulate count for one forward pass."""
    total = [0]

    def make_hook(counter):
        def hook(module, inputs, output):
            total[0] += int(counter(module, inputs, output))
        return hook

    handles = []
    for module in model.modules():
        if isinstance(module, nn.ConvTranspose2d):
            handles.append(module.register_forward_hook(
                make_hook(_conv_transpose2d_macs)))
        elif isinstance(module, nn.Conv2d):
            handles.append(module.register_forward_hook(
                make_hook(_conv2d_macs)))
        elif isinstance(module, nn.Linear):
            handles.append(module.register_forward_hook(
                make_hook(_linear_macs)))
        if hasattr(module, "last_extra_macs"):
            module.last_extra_macs = 0

    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            model(image_a, image_b)
    finally:
        for h in handles:
            h.remove()
        model.train(was_training)

    extra = sum(int(m.last_extra_macs) for m in model.modules()
                if hasattr(m, "last_extra_macs"))
    return total[0] + extra


def count_flops(model, size=256, in_channels=3):
    """MACs (reported as FLOP units) at 1 x C x size x size per branch."""
    image_a = torch.zeros(1, in_channels, size, size)
    image_b = torch.zeros(1, in_channels, size, size)
    return count_macs(model, image_a, image_b)


def measure_fps(model, size=256, in_channels=3, repeats=5, warmup=2):
    """Single-image throughput: mean and stdev over timed repeats."""
    image_a = torch.randn(1, in_channels, size, size)
    image_b = torch.randn(1, in_channels, size, size)
    was_training = model.training
    model.eval()
    times = []
    try:
        with torch.no_grad():
            for _ in range(warmup):
                model(image_a, image_b)
            for _ in range(repeats):
                start = time.perf_counter()
                model(image_a, image_b)
                times.append(time.perf_counter() - start)
    finally:
        model.train(was_training)
    fps = [1.0 / t for t in times]
    mean = statistics.fmean(fps)
    std = statistics.stdev(fps) if len(fps) > 1 else 0.0
    return mean, std


def benchmark_model(model, name, size=256, repeats=5):
    params = count_params(model)
    flops = count_flops(model, size=size)
    fps_mean, fps_std = measure_fps(model, size=size, repeats=repeats)
    return {
        "name": name,
        "params": params,
        "gflops": flops / 1e9,
        "fps": fps_mean,
        "fps_std": fps_std,
    }


def render_table_markdown(rows, size):
    lines = [
        f"Input: 1x3x{size}x{size} per temporal branch. {FLOP_CONVENTION}.",
        "",
        "| name | params | GFLOPs | fps |",
        "| --- | ---: | ---: | ---: |",
    ]
    for r in rows:
        lines.append(
            f"| {r['name']} | {r['params'] / 1e6:.3f}M | "
            f"{r['gflops']:.3f} | {r['fps']:.2f} ± {r['fps_std']:.2f} |")
    return "\n".join(lines) + "\n"


def render_table_json(rows, size):
    return {
        "convention": FLOP_CONVENTION,
        "input_size": size,
        "columns": ["name", "params", "GFLOPs", "fps"],
        "rows": [
            {"name": r["name"], "params": r["params"],
             "GFLOPs": r["gflops"], "fps": r["fps"],
             "fps_std": r["fps_std"]}
            for r in rows
        ],
    }
