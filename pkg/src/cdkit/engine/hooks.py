"""Hook protocol and the default observing hooks.

Hooks fire synchronously, in registration order, exactly once per event.
The events are fixed: before_run, before_train_iter, after_train_iter,
before_val, after_val, after_save_checkpoint, after_run.
"""

import time

from ..registry import HOOKS

EVENTS = (
    "before_run", "before_train_iter", "after_train_iter",
    "before_val", "after_val", "after_save_checkpoint", "after_run",
)


class Hook:
    """No-op base; subclasses override the events they observe."""

    def before_run(self, runner):
        pass

    def before_train_iter(self, runner):
        pass

    def after_train_iter(self, runner):
        pass

    def before_val(self, runner):
        pass

    def after_val(self, runner):
        pass

    def after_save_checkpoint(self, runner):
        pass

    def after_run(self, runner):
        pass


@HOOKS.register
class LoggerHook(Hook):
    """Writes one log line per interval: iter, lr multiplier, loss
    components, and training throughput."""

    def __init__(self, interval=50):
        self.interval = interval
        self._t0 = None
        self._last_iter = 0

    def before_run(self, runner):
        self._t0 = time.perf_counter()
        self._last_iter = runner.iteration

    def after_train_iter(self, runner):
        it = runner.iteration
        if it % self.interval and it != runner.max_iters:
            return
        now = time.perf_counter()
        span = max(now - self._t0, 1e-9)
        ips = (it - self._last_iter) / span
        self._t0, self._last_iter = now, it
        losses = " ".join(f"{k}: {v:.4f}" for k, v in runner.last_losses.items())
        runner.log(f"iter {it}/{runner.max_iters} "
                   f"lr_mult {runner.lr_scale:.4g} {losses} ({ips:.1f} it/s)")

    def after_val(self, runner):
        report = runner.history[-1]
        parts = []
        for key in ("precision_c", "recall_c", "f1_c", "iou_c"):
            v = report[key]
            parts.append(f"{key}: " + (f"{v:.4f}" if v is not None else "undefined"))
        runner.log(f"val @ iter {runner.iteration} " + " ".join(parts))


@HOOKS.register
class CheckpointHook(Hook):
    """Saves iter_{N}.ckpt every ``interval`` iterations and at run end."""

    def __init__(self, interval=4000):
        self.interval = interval

    def after_train_iter(self, runner):
        if self.interval and runner.iteration % self.interval == 0:
            runner.save_checkpoint(f"iter_{runner.iteration}.ckpt")

    def after_run(self, runner):
        runner.save_checkpoint(f"iter_{runner.iteration}.ckpt")


@HOOKS.register
class EarlyStopHook(Hook):
    """Requests a stop once a validation metric reaches a threshold."""

    def __init__(self, metric="f1_c", threshold=0.97):
        self.metric = metric
        self.threshold = threshold

    def after_val(self, runner):
        value = runner.history[-1].get(self.metric)
        if value is not None and value >= self.threshold:
            runner.stop_requested = True
            runner.log(f"early stop: {self.metric} {value:.4f} >= "
                       f"{self.threshold} at iter {runner.iteration}")
