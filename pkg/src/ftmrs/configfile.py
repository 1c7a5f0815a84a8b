"""Plain-text scenario files: one ``key = value`` per line.

Top-level keys are the ``ScenarioConfig`` fields; radio constants and the
fault campaign use ``energy.`` and ``faults.`` prefixes. ``#`` starts a
comment. The fault mix is written as ``class:weight`` pairs separated by
commas. ``dump_config`` writes every key, and parsing its output gives back
an equal config.

    node_count = 200
    radio_range = 80.0
    energy.alpha2 = 1e-11
    faults.node_fault_fraction = 0.4
    faults.fault_mix = battery_ok:0.5, receiver_ok:0.5
"""
from __future__ import annotations

import dataclasses
import types
import typing

from .core import FAULT_CLASSES, EnergyParams
from .engine import ScenarioConfig
from .faults import FaultCampaign

_NESTED = {"energy": EnergyParams, "faults": FaultCampaign}


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _field_types(cls):
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


def _keys():
    out = {}
    for name, tp in _field_types(ScenarioConfig).items():
        if name in _NESTED:
            for sub, sub_tp in _field_types(_NESTED[name]).items():
                out[f"{name}.{sub}"] = sub_tp
        else:
            out[name] = tp
    return out


KEYS = _keys()


def _parse_mix(text):
    mix = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, weight = part.partition(":")
        name = name.strip()
        if not sep:
            raise ValueError(f"expected class:weight, got {part!r}")
        if name not in FAULT_CLASSES:
            raise ValueError(f"unknown fault class {name!r}")
        mix[name] = float(weight)
    return mix


def _parse_value(tp, text):
    if tp is dict:
        return _parse_mix(text)
    if typing.get_origin(tp) in (typing.Union, types.UnionType):
        if text.lower() == "none":
            return None
        tp = next(a for a in typing.get_args(tp) if a is not type(None))
    if tp is bool:
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if tp is int:
        return int(text)
    if tp is float:
        return float(text)
    if tp is str:
        return text
    raise ValueError(f"unsupported type {tp!r}")


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, dict):
        return ", ".join(f"{k}:{value[k]!r}" for k in sorted(value))
    return str(value)


def parse_assignments(text):
    """``{key: raw_value_text}`` with line numbers checked, no type conversion."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        out[key] = (value, lineno)
    return out


def apply_overrides(config: ScenarioConfig, values) -> ScenarioConfig:
    """Return ``config`` with ``{key: text or (text, line)}`` applied."""
    top, nested = {}, {name: {} for name in _NESTED}
    for key, item in values.items():
        text, lineno = item if isinstance(item, tuple) else (item, None)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            value = _parse_value(KEYS[key], text)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
        head, _, sub = key.partition(".")
        if sub:
            nested[head][sub] = value
        else:
            top[key] = value
    try:
        for name, changes in nested.items():
            if changes:
                top[name] = dataclasses.replace(getattr(config, name), **changes)
        return dataclasses.replace(config, **top).validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text, base=None) -> ScenarioConfig:
    return apply_overrides(base or ScenarioConfig(), parse_assignments(text))


def load_config(path, base=None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


def dump_config(config: ScenarioConfig) -> str:
    lines = []
    for key in KEYS:
        head, _, sub = key.partition(".")
        value = getattr(getattr(config, head), sub) if sub else getattr(config, key)
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
