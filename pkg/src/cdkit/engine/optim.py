"""Optimizer wrapper (accumulation + clipping) and the parameter scheduler."""

import torch

from ..errors import ConfigError


def build_optimizer(params, cfg):
    """Instantiate a torch.optim optimizer named by ``type``."""
    cfg = dict(cfg)
    name = cfg.pop("type", None)
    if not name:
        raise ConfigError("optimizer config needs a 'type' key")
    cls = getattr(torch.optim, name, None)
    if cls is None or not (isinstance(cls, type)
                           and issubclass(cls, torch.optim.Optimizer)):
        raise ConfigError(f"unknown optimizer '{name}'")
    try:
        return cls(params, **cfg)
    except TypeError as e:
        raise ConfigError(f"bad optimizer arguments for '{name}': {e}") from e


class OptimizerWrapper:
    """Gradient accumulation and global-norm clipping around an optimizer.

    ``backward(loss)`` scales by 1/accumulate_every so accumulating k
    micro-batches equals one step on the k-fold batch. ``maybe_step()``
    clips, steps, and zeroes gradients on every accumulate_every-th call.
    """

    def __init__(self, optimizer, accumulate_every=1, clip_norm=None):
        if accumulate_every < 1:
            raise ConfigError("accumulate_every must be >= 1")
        if clip_norm is not None and clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")
        self.optimizer = optimizer
        self.accumulate_every = accumulate_every
        self.clip_norm = clip_norm
        self._calls = 0
        for group in self.optimizer.param_groups:
            group.setdefault("initial_lr", group["lr"])

    def backward(self, loss):
        (loss / self.accumulate_every).backward()

    def maybe_step(self):
        self._calls += 1
        if self._calls % self.accumulate_every != 0:
            return False
        if self.clip_norm is not None:
            params = [p for group in self.optimizer.param_groups
                      for p in group["params"]]
            torch.nn.utils.clip_grad_norm_(params, self.clip_norm)
        self.optimizer.step()
        self.optimizer.zero_grad(set_to_none=False)
        return True

    def set_lr_scale(self, scale):
        for group in self.optimizer.param_groups:
            group["lr"] = group["initial_lr"] * scale

    def state_dict(self):
        return {"optimizer": self.optimizer.state_dict(), "calls": self._calls}

    def load_state_dict(self, state):
        self.optimizer.load_state_dict(state["optimizer"])
        self._calls = state["calls"]


class ParamScheduler:
    """Pure learning-rate multiplier: linear warmup, then polynomial decay
    rebased onto the post-warmup span, so the multiplier is exactly 1.0 when
    warmup ends and decays to 0 at max_iters."""

    def __init__(self, max_iters, policy="poly", warmup_iters=0,
                 warmup_floor=1e-3, power=1.0):
        if policy not in ("poly", "constant"):
            raise ConfigError(f"unknown scheduler policy '{policy}'")
        if warmup_iters >= max_iters and policy == "poly" and max_iters > 0:
            raise ConfigError("warmup_iters must be < max_iters")
        self.max_iters = max_iters
        self.policy = policy
        self.warmup_iters = warmup_iters
        self.warmup_floor = warmup_floor
        self.power = power

    def value(self, iteration):
        if self.policy == "constant":
            return 1.0
        w = self.warmup_iters
        if w > 0 and iteration < w:
            frac = iteration / w
            return self.warmup_floor + (1.0 - self.warmup_floor) * frac
        if self.max_iters <= w:
            return 1.0
        progress = (iteration - w) / (self.max_iters - w)
        return (1.0 - progress) ** self.power

    def state_dict(self):
        return {"max_iters": self.max_iters, "policy": self.policy,
                "warmup_iters": self.warmup_iters,
                "warmup_floor": self.warmup_floor, "power": self.power}
