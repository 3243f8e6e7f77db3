from .checkpoint import (FORMAT_VERSION, load_checkpoint, restore_rng_states,
                         rng_states, save_checkpoint)
from .hooks import EVENTS, CheckpointHook, EarlyStopHook, Hook, LoggerHook
from .optim import OptimizerWrapper, ParamScheduler, build_optimizer
from .runner import IterRunner, collate, run_training, seed_everything

__all__ = [
    "FORMAT_VERSION", "load_checkpoint", "restore_rng_states", "rng_states",
    "save_checkpoint", "EVENTS", "CheckpointHook", "EarlyStopHook", "Hook",
    "LoggerHook",
    "OptimizerWrapper", "ParamScheduler", "build_optimizer", "IterRunner",
    "collate", "run_training", "seed_everything",
]
