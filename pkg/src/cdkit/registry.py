"""Component registries and config-driven construction.

Each kind of component (model, dataset, transform, hook, loss, metric) has its
own registry so the same name may exist for different kinds. A config node
names a component with the reserved key ``type``; every other key is passed to
the constructor. Nested ``type``-bearing mappings are built first, bottom-up,
so whole detectors can be assembled from config alone.
"""

import difflib
import inspect

from .errors import ConfigError

# All registries ever created, used for nested lookups and near-miss hints.
_ALL_REGISTRIES = []


class Registry:
    """Name -> constructor table for one kind of component."""

    def __init__(self, name):
        self.name = name
        self._table = {}
        _ALL_REGISTRIES.append(self)

    def register(self, obj=None, *, name=None):
        """Register a class or callable, usable as a decorator.

        Duplicate names within one registry are an error.
        """

        def _do_register(o):
            key = name or o.__name__
            if key in self._table:
                raise ConfigError(
                    f"duplicate registration of '{key}' in registry '{self.name}'"
                )
            self._table[key] = o
            return o

        if obj is None:
            return _do_register
        return _do_register(obj)

    def get(self, name):
        if name not in self._table:
            raise ConfigError(
                f"unknown type '{name}' in registry '{self.name}'"
                + _near_miss_hint(name)
            )
        return self._table[name]

    def __contains__(self, name):
        return name in self._table

    def names(self):
        return list(self._table)

    def build(self, cfg):
        return build_component(cfg, self)


MODELS = Registry("models")
DATASETS = Registry("datasets")
TRANSFORMS = Registry("transforms")
HOOKS = Registry("hooks")
LOSSES = Registry("losses")
METRICS = Registry("metrics")


def _near_miss_hint(name):
    pool = sorted({n for r in _ALL_REGISTRIES for n in r._table})
    close = difflib.get_close_matches(name, pool, n=3, cutoff=0.5)
    return f"; close matches: {close}" if close else ""


def _lookup(name, registry):
    """Find a constructor, preferring ``registry`` for collisions."""
    if name in registry:
        return registry._table[name]
    holders = [r for r in _ALL_REGISTRIES if name in r]
    if len(holders) == 1:
        return holders[0]._table[name]
    if len(holders) > 1:
        raise ConfigError(
            f"type '{name}' is ambiguous across registries "
            f"{[r.name for r in holders]}; not found in '{registry.name}'"
        )
    raise ConfigError(
        f"unknown type '{name}' in registry '{registry.name}'" + _near_miss_hint(name)
    )


def _build_value(value, registry):
    if isinstance(value, dict) and "type" in value:
        return build_component(value, registry)
    if isinstance(value, dict):
        return {k: _build_value(v, registry) for k, v in value.items()}
    if isinstance(value, list):
        return [_build_value(v, registry) for v in value]
    return value


def build_component(cfg, registry):
    """Construct a component from a ``type``-bearing config mapping.

    Nested mappings that carry ``type`` are built recursively before the
    parent, in declaration order. Keyword arguments are validated against the
    constructor signature so typos fail with the key and component named.
    """
    if not isinstance(cfg, dict):
        raise ConfigError(f"component config must be a mapping, got {type(cfg).__name__}")
    if "type" not in cfg:
        raise ConfigError(f"component config has no 'type' key: {sorted(cfg)}")
    name = cfg["type"]
    ctor = _lookup(name, registry)

    kwargs = {}
    for key, value in cfg.items():
        if key == "type":
            continue
        kwargs[key] = _build_value(value, registry)

    _check_signature(ctor, name, kwargs)
    return ctor(**kwargs)


def _check_signature(ctor, name, kwargs):
    try:
        sig = inspect.signature(ctor)
    except (TypeError, ValueError):
        return
    params = sig.parameters
    accepts_kwargs = any(
        p.kind is inspect.Parameter.VAR_KEYWORD for p in params.values()
    )
    if not accepts_kwargs:
        for key in kwargs:
            if key not in params:
                raise ConfigError(
                    f"unexpected parameter '{key}' for component '{name}'"
                )
    for pname, p in params.items():
        if p.kind in (inspect.Parameter.VAR_POSITIONAL, inspect.Parameter.VAR_KEYWORD):
            continue
        if p.default is inspect.Parameter.empty and pname not in kwargs:
            raise ConfigError(
                f"missing required parameter '{pname}' for component '{name}'"
            )
