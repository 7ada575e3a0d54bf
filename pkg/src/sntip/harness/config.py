"""JSON run configuration."""
from __future__ import annotations

import json
from pathlib import Path

__all__ = ["ConfigError", "load_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def load_config(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    return doc
