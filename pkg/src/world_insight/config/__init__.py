"""
Configuration for world_insight.

Defaults come from ``defaults.yaml`` next to this module, environment
variables prefixed ``WORLD_INSIGHT_`` override them (a ``.env`` file is
honoured), and explicit keyword overrides (the CLI flags) win over both.
"""

import logging
import os
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, IO, Optional

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).with_name("defaults.yaml")
ENV_PREFIX = "WORLD_INSIGHT_"
UNPREDICTABLE_MODES = ("uniform", "drifting")


class DocumentLoader(yaml.SafeLoader):
    """
    SafeLoader that reads only true/false as booleans.

    YAML 1.1 also turns on/off and yes/no into booleans, which are ordinary
    value names in world signatures (``light: off``).
    """


_BOOL_TAG = "tag:yaml.org,2002:bool"
DocumentLoader.yaml_implicit_resolvers = {
    first: [(tag, pattern) for tag, pattern in resolvers if tag != _BOOL_TAG]
    for first, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
DocumentLoader.add_implicit_resolver(
    _BOOL_TAG, re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"), list("tTfF")
)


def parse_yaml(stream: str | IO[str]) -> Any:
    """Parse YAML text with DocumentLoader."""
    return yaml.load(stream, Loader=DocumentLoader)


def load_yaml_config(path: str | Path) -> Dict[str, Any]:
    """Load a YAML configuration file."""
    logger.debug(f"Loading config from: {path}")
    with open(path, "r", encoding="utf-8") as f:
        config = parse_yaml(f) or {}
    logger.debug(f"Config loaded: {list(config.keys())}")
    return config


@dataclass(frozen=True)
class Settings:
    """Every tunable number of the library in one immutable place."""

    c0: float = 10
    half_life: float = 3
    adaptive_half_life: bool = False
    reach_cap: int = 1_000_000
    property_cap: int = 200_000
    noise_color_volume: float = 0.10
    noise_chessman_volume: float = 0.10
    noise_king_volume: float = 0.05
    move_cap: int = 200
    opponent_policy: str = "greedy-capture"
    unpredictable_mode: str = "uniform"
    log_dir: str = "logs"
    log_level: str = "INFO"

    def __post_init__(self) -> None:
        if self.c0 <= 0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.half_life <= 0:
            raise ValueError(f"half_life must be positive, got {self.half_life}")
        for name in ("noise_color_volume", "noise_chessman_volume", "noise_king_volume"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.unpredictable_mode not in UNPREDICTABLE_MODES:
            raise ValueError(
                f"unpredictable_mode must be one of {UNPREDICTABLE_MODES}, "
                f"got {self.unpredictable_mode!r}"
            )

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Return a copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _flatten_defaults(raw: Dict[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    flat.update(raw.get("theory", {}))
    flat.update(raw.get("limits", {}))
    flat.update(raw.get("chess", {}))
    flat.update(raw.get("streams", {}))
    logging_section = raw.get("logging", {})
    if "log_dir" in logging_section:
        flat["log_dir"] = logging_section["log_dir"]
    if "level" in logging_section:
        flat["log_level"] = logging_section["level"]
    return flat


def _coerce(kind: type, text: str) -> Any:
    if kind is bool:
        return text.strip().lower() in ("1", "true", "yes", "on")
    return kind(text)


def _environment_overrides() -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for f in fields(Settings):
        text = os.getenv(ENV_PREFIX + f.name.upper())
        if text is None:
            continue
        kind = type(f.default)
        overrides[f.name] = _coerce(float if kind is int and "." in text else kind, text)
    return overrides


def load_settings(path: Optional[str | Path] = None, **overrides: Any) -> Settings:
    """
    Build Settings from defaults.yaml (or ``path``), the environment, then overrides.

    Args:
        path: Alternative YAML file with the same sections as defaults.yaml
        **overrides: Explicit values (None means "not given")
    """
    load_dotenv()
    known = {f.name for f in fields(Settings)}
    values = {
        k: v
        for k, v in _flatten_defaults(load_yaml_config(path or DEFAULTS_PATH)).items()
        if k in known
    }
    values.update(_environment_overrides())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


__all__ = ["DocumentLoader", "Settings", "load_settings", "load_yaml_config", "parse_yaml", "DEFAULTS_PATH"]
