"""Command-line entry points.

Subcommands: train, test, infer, analyze, benchmark. Exit codes: 0 on
success, 2 for configuration errors, 3 for runtime failures, 4 for data
errors.
"""

import argparse
import json
import os
import sys

import numpy as np
import torch
from PIL import Image

from ..config import parse_cfg_options, parse_config
from ..data.stats import dataset_stats, format_stats
from ..data.transforms import build_pipeline
from ..engine.checkpoint import load_checkpoint
from ..engine.runner import collate, run_training
from ..errors import ConfigError, DataError
from ..metrics import ChangeMetrics
from ..registry import DATASETS, MODELS, build_component
from .benchmark import (benchmark_model, render_table_json,
                        render_table_markdown)
from .tiling import image_to_tensor, predict_full, predict_tiled
from .visualize import save_change_map


def _config_name(path):
    return os.path.splitext(os.path.basename(path))[0]


def _load_config(path, cfg_options):
    overrides = parse_cfg_options(cfg_options or [])
    return parse_config(path, overrides=overrides)


def _load_model(cfg, checkpoint_path=None):
    model = build_component(cfg["model"], MODELS)
    if checkpoint_path:
        load_checkpoint(checkpoint_path, model=model)
    model.eval()
    return model


def _write_json(payload, path):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)


# ---- subcommands ---------------------------------------------------------

def cmd_train(args):
    cfg = _load_config(args.config, args.cfg_options)
    runner = run_training(cfg, name=_config_name(args.config),
                          work_dir=args.work_dir, seed=args.seed,
                          resume_from=args.resume)
    print(f"finished at iter {runner.iteration}; work dir {runner.work_dir}")
    return 0


def cmd_test(args):
    cfg = _load_config(args.config, args.cfg_options)
    data = cfg.get("data", {})
    split_cfg = data.get("test") or data.get("val")
    if split_cfg is None:
        raise ConfigError("config defines neither data.test nor data.val")
    model = _load_model(cfg, args.checkpoint)
    dataset = build_component(split_cfg, DATASETS)
    if len(dataset) == 0:
        raise DataError("evaluation dataset is empty")
    evaluator = ChangeMetrics(num_classes=model.num_classes,
                              ignore_value=dataset.ignore_value)
    with torch.no_grad():
        for sample_id in dataset.ids:
            sample = dataset.get(sample_id)
            batch = collate([sample])
            pred = model.predict(batch["image_a"], batch["image_b"])
            evaluator.update(pred[0].cpu().numpy(), sample.label)
    report = evaluator.compute()
    report["num_images"] = len(dataset)
    print(json.dumps(report, indent=2))
    if args.out:
        _write_json(report, args.out)
        print(f"report written to {args.out}")
    return 0


def _load_image(path):
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.float32)
    except FileNotFoundError as e:
        raise DataError(f"image not found: {path}") from e


def cmd_infer(args):
    cfg = _load_config(args.config, args.cfg_options)
    model = _load_model(cfg, args.checkpoint)

    image_a = _load_image(args.a)
    image_b = _load_image(args.b)
    if image_a.shape != image_b.shape:
        raise DataError("temporal images differ in shape: "
                        f"{image_a.shape} vs {image_b.shape}")

    # apply the evaluation pipeline (normalization) if the config has one
    data = cfg.get("data", {})
    eval_cfg = data.get("test") or data.get("val") or {}
    pipeline_cfg = eval_cfg.get("pipeline")
    if pipeline_cfg:
        from ..data.sample import BiTemporalSample
        sample = BiTemporalSample(
            image_a=image_a, image_b=image_b,
            label=np.zeros(image_a.shape[:2], dtype=np.int64),
            meta={"id": "infer"})
        sample = build_pipeline(pipeline_cfg)(sample, seed=0, epoch=0,
                                              sample_id="infer")
        image_a, image_b = sample.image_a, sample.image_b

    ta, tb = image_to_tensor(image_a), image_to_tensor(image_b)
    if args.tile:
        stride = args.stride or args.tile
        pred, _ = predict_tiled(model, ta, tb, tile=args.tile, stride=stride)
    else:
        pred, _ = predict_full(model, ta, tb)
    pred = pred[0].cpu().numpy()
    mask = np.where(pred > 0, 255, 0).astype(np.uint8)

    os.makedirs(args.out, exist_ok=True)
    pred_path = os.path.join(args.out, "pred.png")
    Image.fromarray(mask, mode="L").save(pred_path)
    map_path = os.path.join(args.out, "change_map.png")
    save_change_map(map_path, pred)
    print(f"wrote {pred_path} and {map_path}")
    return 0


def cmd_analyze(args):
    cfg = _load_config(args.config, args.cfg_options)
    data = cfg.get("data", {})
    if args.split not in data:
        raise ConfigError(f"config defines no data.{args.split}")
    dataset = build_component(data[args.split], DATASETS)
    report = dataset_stats(dataset)
    print(format_stats(report))
    if args.out:
        _write_json(report, args.out)
        print(f"report written to {args.out}")
    return 0


def cmd_benchmark(args):
    rows = []
    for path in args.configs:
        cfg = _load_config(path, args.cfg_options)
        model = build_component(cfg["model"], MODELS)
        rows.append(benchmark_model(model, _config_name(path),
                                    size=args.size, repeats=args.repeats))
    markdown = render_table_markdown(rows, args.size)
    print(markdown)
    if args.out:
        if args.out.endswith(".json"):
            _write_json(render_table_json(rows, args.size), args.out)
        else:
            with open(args.out, "w") as f:
                f.write(markdown)
        print(f"table written to {args.out}")
    return 0


# ---- argument parsing ----------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="cdkit",
        description="bi-temporal change detection toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_cfg_options(p):
        p.add_argument("--cfg-options", nargs="*", default=[],
                       metavar="KEY=VALUE",
                       help="dotted-path config overrides")

    p = sub.add_parser("train", help="train a model from a config")
    p.add_argument("config")
    p.add_argument("--work-dir", default=None)
    p.add_argument("--resume", default=None, metavar="CKPT")
    p.add_argument("--seed", type=int, default=None)
    add_cfg_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("test", help="evaluate a checkpoint on a dataset")
    p.add_argument("config")
    p.add_argument("checkpoint")
    p.add_argument("--out", default=None, metavar="REPORT_JSON")
    add_cfg_options(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("infer", help="predict change for one image pair")
    p.add_argument("config")
    p.add_argument("checkpoint")
    p.add_argument("--a", required=True, metavar="IMG")
    p.add_argument("--b", required=True, metavar="IMG")
    p.add_argument("--tile", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--out", required=True, metavar="DIR")
    add_cfg_options(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("analyze", help="dataset statistics for a config")
    p.add_argument("config")
    p.add_argument("--split", default="train")
    p.add_argument("--out", default=None, metavar="REPORT_JSON")
    add_cfg_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("benchmark",
                       help="params / FLOPs / fps table for model configs")
    p.add_argument("configs", nargs="+")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", default=None, metavar="TABLE")
    add_cfg_options(p)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 4
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
