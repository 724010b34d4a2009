"""Toolkit configuration loaded from a JSON file."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import FormatError

DEFAULT_CONFIG_PATHS = [Path("linkshadows.json")]

DEFAULTS: dict[str, dict[str, Any]] = {
    "search": {"depth_cap": 64, "state_cap": 20000, "tots_depth_cap": 14, "tots_state_cap": 20000},
    "orbit": {"depth_limit": None, "reflection_fold": True},
    "brute_force": {"max_n": 8},
}


@dataclass(frozen=True)
class ToolkitConfig:
    """Settings for the command-line tools.

    Attributes:
        log_level: Logging level name.
        depth_cap: Depth cap of the graph-level region emptying search.
        state_cap: State cap of the graph-level region emptying search.
        tots_depth_cap: Depth cap of the diagram-level mirroring search.
        tots_state_cap: State cap of the diagram-level mirroring search.
        orbit_depth_limit: Breadth-first levels expanded by orbit enumeration, ``None`` for all.
        reflection_fold: Identify mirror images in canonical codes.
        brute_force_max_n: Largest crossing count the exhaustive generator accepts.
        source: The file the values came from, if any.
    """

    log_level: str = "INFO"
    depth_cap: int = 64
    state_cap: int = 20000
    tots_depth_cap: int = 14
    tots_state_cap: int = 20000
    orbit_depth_limit: int | None = None
    reflection_fold: bool = True
    brute_force_max_n: int = 8
    source: Path | None = None

    def search_caps(self) -> dict[str, int]:
        return {
            "depth_cap": self.depth_cap,
            "state_cap": self.state_cap,
            "tots_depth_cap": self.tots_depth_cap,
            "tots_state_cap": self.tots_state_cap,
        }


def _section(data: dict[str, Any], name: str, logger: logging.Logger) -> dict[str, Any]:
    values = dict(DEFAULTS[name])
    given = data.get(name, {})
    if not isinstance(given, dict):
        raise FormatError(f"config section '{name}' must be an object")
    for key, value in given.items():
        if key not in values:
            logger.warning(f"Ignoring unknown config key '{name}.{key}'")
            continue
        values[key] = value
    return values


def load_config(path: str | Path | None = None, logger: logging.Logger | None = None) -> ToolkitConfig:
    """Load configuration.

    Args:
        path: Explicit config file. When omitted, ``./linkshadows.json`` is used if present, otherwise
            the built-in defaults.
        logger: Logger for warnings about unknown keys.

    Returns:
        The configuration.

    Raises:
        FileNotFoundError: If an explicit path does not exist.
        FormatError: If the file is not a JSON object or a section has the wrong shape.
    """
    logger = logger or logging.getLogger(__name__)
    if path is not None:
        config_path: Path | None = Path(path)
        if not config_path.is_file():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")
    else:
        config_path = next((p for p in DEFAULT_CONFIG_PATHS if p.is_file()), None)
    if config_path is None:
        return ToolkitConfig()

    try:
        with open(config_path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{config_path}: {e}") from e
    if not isinstance(data, dict):
        raise FormatError(f"{config_path}: configuration must be a JSON object")

    for key in data:
        if key not in DEFAULTS and key != "log_level":
            logger.warning(f"Ignoring unknown config key '{key}'")
    search = _section(data, "search", logger)
    orbit = _section(data, "orbit", logger)
    brute_force = _section(data, "brute_force", logger)
    logger.debug(f"Configuration loaded from {config_path}")
    return ToolkitConfig(
        log_level=str(data.get("log_level", "INFO")),
        depth_cap=int(search["depth_cap"]),
        state_cap=int(search["state_cap"]),
        tots_depth_cap=int(search["tots_depth_cap"]),
        tots_state_cap=int(search["tots_state_cap"]),
        orbit_depth_limit=None if orbit["depth_limit"] is None else int(orbit["depth_limit"]),
        reflection_fold=bool(orbit["reflection_fold"]),
        brute_force_max_n=int(brute_force["max_n"]),
        source=config_path,
    )
