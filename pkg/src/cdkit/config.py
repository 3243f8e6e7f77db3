"""Hierarchical YAML configs with inheritance and dotted-key overrides.

A config file may list parent files under the reserved key ``inherit``;
parents are resolved depth-first and merged in order, then the child is
merged on top. Maps merge recursively, scalars and lists replace wholesale.
CLI overrides (``--cfg-options key.path=value``) apply after resolution.
"""

import copy
import os

import yaml

from .errors import ConfigError

INHERIT_KEY = "inherit"


def merge_config(base, override):
    """Merge ``override`` onto ``base`` without mutating either.

    Nested maps merge key-by-key; any other value in ``override`` replaces
    the one in ``base``.
    """
    if not isinstance(base, dict) or not isinstance(override, dict):
        return copy.deepcopy(override)
    merged = {k: copy.deepcopy(v) for k, v in base.items()}
    for key, value in override.items():
        if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _load_file(path):
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r") as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"failed to parse config {path}: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"top level of config {path} must be a mapping")
    return raw


def _resolve(path, stack):
    path = os.path.abspath(path)
    if path in stack:
        cycle = " -> ".join(list(stack[stack.index(path):]) + [path])
        raise ConfigError(f"inheritance cycle: {cycle}")
    raw = _load_file(path)
    parents = raw.pop(INHERIT_KEY, [])
    if isinstance(parents, str):
        parents = [parents]
    if not isinstance(parents, list):
        raise ConfigError(f"'{INHERIT_KEY}' in {path} must be a path or list of paths")
    base = {}
    here = os.path.dirname(path)
    for parent in parents:
        parent_path = parent if os.path.isabs(parent) else os.path.join(here, parent)
        base = merge_config(base, _resolve(parent_path, stack + [path]))
    return merge_config(base, raw)


def parse_config(path, overrides=None):
    """Load a config file, resolve inheritance, apply dotted-key overrides.

    ``overrides`` is an ordered mapping or sequence of (dotted_key, value).
    Resolution is deterministic and the result carries no ``inherit`` keys.
    """
    cfg = _resolve(path, [])
    if overrides:
        items = overrides.items() if isinstance(overrides, dict) else overrides
        for key, value in items:
            cfg = apply_override(cfg, key, value)
    return cfg


def apply_override(cfg, dotted_key, value):
    """Return a new tree with the leaf at ``dotted_key`` replaced.

    Missing intermediate maps are created; traversing a non-map is a
    type-conflict error. The input tree is left unmodified.
    """
    new = copy.deepcopy(cfg)
    keys = dotted_key.split(".")
    node = new
    for key in keys[:-1]:
        if key not in node:
            node[key] = {}
        if not isinstance(node[key], dict):
            raise ConfigError(
                f"override '{dotted_key}' traverses non-map value at '{key}'"
            )
        node = node[key]
    if not isinstance(node, dict):
        raise ConfigError(f"override '{dotted_key}' traverses a non-map value")
    node[keys[-1]] = value
    return new


def parse_cfg_options(pairs):
    """Parse repeatable ``key.path=value`` strings from the CLI.

    Values go through the YAML scalar parser so ``1``, ``1e-3``, ``true`` and
    ``[1,2]`` become typed values; anything unparsable stays a string.
    """
    out = []
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"bad --cfg-options entry '{pair}', expected key=value")
        key, raw = pair.split("=", 1)
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        out.append((key, value))
    return out


def dump_config(cfg, path=None):
    """Serialize a resolved config; parsing the output reproduces the tree."""
    text = yaml.safe_dump(cfg, sort_keys=False, default_flow_style=False)
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text
