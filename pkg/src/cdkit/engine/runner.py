"""Iteration-based training runner.

One logical thread owns the loop: sample batch, forward, loss, backward,
wrapper step, hooks, periodic validation and checkpointing. Batch sampling is
an infinite cycling shuffle computed statelessly from (seed, position), and
per-sample augmentation RNG derives from (seed, iteration, sample id), so a
resumed run sees exactly the batches the uninterrupted run would have seen.
"""

import hashlib
import json
import os
import random

import numpy as np
import torch

from ..config import dump_config
from ..errors import ConfigError, DataError
from ..metrics import ChangeMetrics
from ..registry import DATASETS, HOOKS, METRICS, MODELS, build_component
from . import checkpoint as ckpt
from .hooks import EVENTS
from .optim import OptimizerWrapper, ParamScheduler, build_optimizer

DEFAULT_HOOKS = ({"type": "LoggerHook", "interval": 50},
                 {"type": "CheckpointHook", "interval": 4000})


def seed_everything(seed):
    random.seed(seed)
    np.random.seed(seed % 2 ** 32)
    torch.manual_seed(seed)


def collate(samples):
    def stack_images(key):
        arrs = [getattr(s, key).transpose(2, 0, 1) for s in samples]
        return torch.from_numpy(np.ascontiguousarray(np.stack(arrs))).float()

    return {
        "image_a": stack_images("image_a"),
        "image_b": stack_images("image_b"),
        "label": torch.from_numpy(
            np.stack([s.label for s in samples])).long(),
    }


class IterRunner:
    def __init__(self, cfg, name="run", work_dir=None, seed=None,
                 resume_from=None):
        self.cfg = cfg
        tcfg = cfg.get("train", {})
        if tcfg.get("amp"):
            raise ConfigError("mixed precision (train.amp) is unsupported")
        if "model" not in cfg or "data" not in cfg:
            raise ConfigError("config must define 'model' and 'data'")

        self.seed = seed if seed is not None else tcfg.get("seed", 0)
        seed_everything(self.seed)

        self.model = build_component(cfg["model"], MODELS)
        self.train_ds = build_component(cfg["data"]["train"], DATASETS)
        self.val_ds = (build_component(cfg["data"]["val"], DATASETS)
                       if "val" in cfg["data"] else None)

        self.max_iters = int(tcfg.get("max_iters", 40000))
        self.val_interval = int(tcfg.get("val_interval", 4000))
        self.batch_size = int(tcfg.get("batch_size", 8))

        opt_cfg = tcfg.get("optimizer", {"type": "SGD", "lr": 0.01,
                                         "momentum": 0.9,
                                         "weight_decay": 5e-4})
        self.optim = OptimizerWrapper(
            build_optimizer(self.model.parameters(), opt_cfg),
            accumulate_every=int(tcfg.get("accumulate_every", 1)),
            clip_norm=tcfg.get("clip_norm"),
        )
        sched_cfg = tcfg.get("scheduler", {"policy": "poly",
                                           "warmup_iters": 1000,
                                           "warmup_floor": 1e-3,
                                           "power": 1.0})
        self.scheduler = ParamScheduler(max_iters=self.max_iters, **sched_cfg)

        hook_cfgs = cfg.get("hooks", list(DEFAULT_HOOKS))
        self.hooks = [build_component(h, HOOKS) for h in hook_cfgs]

        if "evaluator" in cfg:
            self.evaluator = build_component(cfg["evaluator"], METRICS)
        else:
            ignore = (self.val_ds or self.train_ds).ignore_value
            self.evaluator = ChangeMetrics(
                num_classes=self.model.num_classes, ignore_value=ignore)

        root = work_dir or cfg.get("work_dir", "./work_dirs")
        self.work_dir = os.path.join(root, name)
        os.makedirs(self.work_dir, exist_ok=True)
        self._log_path = os.path.join(self.work_dir, "log.txt")
        self._metrics_path = os.path.join(self.work_dir, "metrics.jsonl")

        self.iteration = 0
        self.history = []
        self.loss_log = []
        self.best_f1 = None
        self.lr_scale = 1.0
        self.last_losses = {}
        self.final_bundle = None
        self.stop_requested = False
        self._perm_cache = {}

        if resume_from:
            self._resume(resume_from)

    # ---- plumbing -------------------------------------------------------

    def log(self, message):
        with open(self._log_path, "a") as f:
            f.write(message + "\n")
        print(message)

    def call_hooks(self, event):
        if event not in EVENTS:
            raise ValueError(f"unknown hook event '{event}'")
        for hook in self.hooks:
            try:
                getattr(hook, event)(self)
            except Exception as e:
                raise RuntimeError(
                    f"hook {type(hook).__name__} failed during {event}: {e}"
                ) from e

    def _epoch_perm(self, epoch):
        if epoch not in self._perm_cache:
            key = f"{self.seed}|sampler|{epoch}".encode()
            digest = hashlib.blake2b(key, digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            self._perm_cache[epoch] = rng.permutation(len(self.train_ds))
        return self._perm_cache[epoch]

    def _sample_id(self, position):
        n = len(self.train_ds)
        epoch, offset = divmod(position, n)
        return self.train_ds.ids[self._epoch_perm(epoch)[offset]]

    def next_batch(self):
        base = self.iteration * self.batch_size
        ids = [self._sample_id(base + j) for j in range(self.batch_size)]
        samples = [self.train_ds.get(i, seed=self.seed, epoch=self.iteration)
                   for i in ids]
        return collate(samples)

    # ---- training -------------------------------------------------------

    def train_iter(self, batch):
        self.model.train()
        self.lr_scale = self.scheduler.value(self.iteration)
        self.optim.set_lr_scale(self.lr_scale)
        losses = self.model.loss(batch)
        total = sum(losses.values())
        if not torch.isfinite(total):
            parts = {k: float(v.detach()) for k, v in losses.items()}
            raise RuntimeError(
                f"non-finite loss at iter {self.iteration}: {parts}")
        self.optim.backward(total)
        self.optim.maybe_step()
        floats = {k: float(v.detach()) for k, v in losses.items()}
        floats["loss_total"] = float(total.detach())
        self.last_losses = floats
        self.loss_log.append(floats["loss_total"])
        return losses

    def train(self):
        if len(self.train_ds) == 0:
            raise DataError("training dataset is empty")
        dump_config(self.cfg, os.path.join(self.work_dir, "config.yaml"))
        self.call_hooks("before_run")
        while self.iteration < self.max_iters:
            batch = self.next_batch()
            self.call_hooks("before_train_iter")
            self.train_iter(batch)
            self.iteration += 1
            self.call_hooks("after_train_iter")
            due = (self.val_interval
                   and (self.iteration % self.val_interval == 0
                        or self.iteration == self.max_iters))
            if due and self.val_ds is not None:
                self.run_validation()
            if self.stop_requested:
                break
        self.call_hooks("after_run")
        if self.final_bundle is None:
            self.final_bundle = self._bundle()
        return self.final_bundle, self.history

    # ---- validation -----------------------------------------------------

    def run_validation(self):
        if self.val_ds is None or len(self.val_ds) == 0:
            raise DataError("validation dataset is empty")
        self.call_hooks("before_val")
        self.model.eval()
        self.evaluator.reset()
        with torch.no_grad():
            for sample_id in self.val_ds.ids:
                sample = self.val_ds.get(sample_id, seed=self.seed, epoch=0)
                batch = collate([sample])
                pred = self.model.predict(batch["image_a"], batch["image_b"])
                self.evaluator.update(pred[0].cpu().numpy(), sample.label)
        report = self.evaluator.compute()
        entry = {"iter": self.iteration, **report}
        self.history.append(entry)
        with open(self._metrics_path, "a") as f:
            f.write(json.dumps(entry) + "\n")
        self.call_hooks("after_val")
        f1 = report["f1_c"]
        if f1 is not None and (self.best_f1 is None or f1 > self.best_f1):
            self.best_f1 = f1
            self.save_checkpoint("best.ckpt")
        return report

    # ---- checkpointing --------------------------------------------------

    def _bundle_extra(self):
        return {"history": self.history, "best_f1": self.best_f1,
                "loss_log": self.loss_log}

    def _bundle(self):
        return {
            "format_version": ckpt.FORMAT_VERSION,
            "model": self.model.state_dict(),
            "optimizer": self.optim.state_dict(),
            "scheduler": self.scheduler.state_dict(),
            "iter": self.iteration,
            "rng": ckpt.rng_states(),
            "config": self.cfg,
            "extra": self._bundle_extra(),
        }

    def save_checkpoint(self, filename):
        path = os.path.join(self.work_dir, filename)
        self.final_bundle = ckpt.save_checkpoint(
            path, self.model, self.optim, self.scheduler, self.iteration,
            config=self.cfg, extra=self._bundle_extra())
        self.call_hooks("after_save_checkpoint")
        return path

    def _resume(self, path):
        bundle = ckpt.load_checkpoint(path, self.model, self.optim,
                                      self.scheduler, restore_rng=True)
        self.iteration = bundle["iter"]
        extra = bundle.get("extra", {})
        self.history = list(extra.get("history", []))
        self.best_f1 = extra.get("best_f1")
        self.loss_log = list(extra.get("loss_log", []))
        self.log(f"resumed from {path} at iter {self.iteration}")


def run_training(cfg, name="run", work_dir=None, seed=None, resume_from=None):
    """Build a runner from config, train to completion, return the runner."""
    runner = IterRunner(cfg, name=name, work_dir=work_dir, seed=seed,
                        resume_from=resume_from)
    runner.train()
    return runner
