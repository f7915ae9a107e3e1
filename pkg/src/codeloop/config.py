"""Run configuration: defaults < config file < command-line flags.

The config file is YAML with nested sections. Secrets never appear
here; tokens come from environment variables so manifests stay
shareable.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml

DEFAULTS: dict[str, Any] = {
    "retrieval": {"k": 1, "strategy": "token"},
    "embedding": {"endpoint": None, "dim": 256},
    "repair": {"max_rounds": 1},
    "sampling": {"max_tokens": 512, "temperature": 0.0},
    "sandbox": {"timeout_secs": 10.0, "interpreter": None, "temp_root": None},
    "workers": 4,
    "backend": {"kind": "scripted", "endpoint": None, "model": None, "script": None},
    "max_infra_failures": 0,
}


def _deep_merge(base: dict, overlay: dict) -> dict:
    merged = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        elif value is not None:
            merged[key] = value
    return merged


def load_config_file(path: str | Path) -> dict:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    return data


def resolve_config(file_path: str | Path | None, overrides: dict) -> dict:
    """Apply precedence: flags > file > defaults. ``overrides`` uses the
    same nesting as the file; None values mean 'not set'."""
    resolved = DEFAULTS
    if file_path:
        resolved = _deep_merge(resolved, load_config_file(file_path))
    return _deep_merge(resolved, overrides)
