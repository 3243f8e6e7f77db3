"""Checkpoint bundles: model/optimizer/scheduler/iteration/RNG/config.

A loaded bundle restores bitwise-equal weights; with RNG states restored a
resumed run continues exactly as the uninterrupted one.
"""

import random

import numpy as np
import torch

FORMAT_VERSION = 1


def rng_states():
    return {
        "torch": torch.get_rng_state(),
        "numpy": np.random.get_state(),
        "python": random.getstate(),
    }


def restore_rng_states(states):
    torch.set_rng_state(states["torch"])
    np.random.set_state(states["numpy"])
    random.setstate(states["python"])


def save_checkpoint(path, model, optimizer=None, scheduler=None, iteration=0,
                    config=None, extra=None):
    bundle = {
        "format_version": FORMAT_VERSION,
        "model": model.state_dict(),
        "optimizer": optimizer.state_dict() if optimizer is not None else None,
        "scheduler": scheduler.state_dict() if scheduler is not None else None,
        "iter": iteration,
        "rng": rng_states(),
        "config": config,
        "extra": extra or {},
    }
    torch.save(bundle, path)
    return bundle


def _check_model_state(model, state):
    own = model.state_dict()
    for name, tensor in state.items():
        if name not in own:
            raise RuntimeError(f"checkpoint tensor '{name}' not in model")
        if tuple(own[name].shape) != tuple(tensor.shape):
            raise RuntimeError(
                f"shape mismatch for tensor '{name}': checkpoint "
                f"{tuple(tensor.shape)} vs model {tuple(own[name].shape)}")
    for name in own:
        if name not in state:
            raise RuntimeError(f"model tensor '{name}' missing from checkpoint")


def load_checkpoint(path, model=None, optimizer=None, scheduler=None,
                    restore_rng=False):
    bundle = torch.load(path, map_location="cpu", weights_only=False)
    version = bundle.get("format_version")
    if version != FORMAT_VERSION:
        raise RuntimeError(
            f"checkpoint format_version {version} unsupported "
            f"(expected {FORMAT_VERSION})")
    if model is not None:
        _check_model_state(model, bundle["model"])
        model.load_state_dict(bundle["model"])
    if optimizer is not None and bundle.get("optimizer") is not None:
        optimizer.load_state_dict(bundle["optimizer"])
    if scheduler is not None and bundle.get("scheduler") is not None:
        stored = bundle["scheduler"]
        if stored != scheduler.state_dict():
            raise RuntimeError(
                f"scheduler mismatch: checkpoint {stored} vs "
                f"configured {scheduler.state_dict()}")
    if restore_rng:
        restore_rng_states(bundle["rng"])
    return bundle
