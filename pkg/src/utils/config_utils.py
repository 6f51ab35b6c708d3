"""
Config file utilities - `key = value` files that seed CLI defaults.
"""

import argparse
import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

from core.errors import ConfigurationError
from models.manifest import parse_key_values

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def load_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read `key = value` lines; keys may be spelled with dashes or underscores."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError("Cannot read config file", {"path": str(path), "reason": str(e)})
    try:
        entries = parse_key_values(text)
    except ValueError as e:
        raise ConfigurationError(str(e), {"path": str(path)})
    logger.info(f"[CLI] Loaded {len(entries)} settings from {path}")
    return {key.replace("-", "_"): value for key, value in entries.items()}


def _convert(action: argparse.Action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        lowered = raw.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ConfigurationError("Expected a boolean", {"option": action.dest, "value": raw})
    if action.type is not None:
        try:
            return action.type(raw)
        except (TypeError, ValueError) as e:
            raise ConfigurationError("Invalid value in config file", {"option": action.dest, "value": raw, "reason": str(e)})
    return raw


def apply_config_defaults(
    parser: argparse.ArgumentParser,
    entries: Dict[str, str],
    ignore: Optional[Iterable[str]] = None,
) -> None:
    """Install file values as parser defaults so explicit flags still win.

    Unknown keys are a ConfigurationError.
    """
    ignore = set(ignore or ())
    actions = {action.dest: action for action in parser._actions}
    defaults = {}
    for key, raw in entries.items():
        if key in ignore:
            continue
        action = actions.get(key)
        if action is None:
            raise ConfigurationError("Unknown config key", {"key": key})
        if action.choices is not None:
            value = _convert(action, raw)
            if value not in action.choices:
                raise ConfigurationError("Config value not among the choices", {"key": key, "value": raw})
        else:
            value = _convert(action, raw)
        defaults[key] = value
    parser.set_defaults(**defaults)
