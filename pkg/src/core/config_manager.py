"""
Run configuration manager.

Loads a JSON configuration file, merges it over the defaults, applies
command-line overrides, validates the result against the run-config schema
and writes the effective-config snapshot that makes every report reproducible.
"""

from __future__ import annotations

import copy
import json
import logging
from pathlib import Path
from typing import Any

import jsonschema

from .config import DEFAULT_CONFIG, RUN_CONFIG_JSON_SCHEMA, get_default_data_dir
from .container import atomic_write_bytes
from .errors import ConfigError, ErrorCode

logger = logging.getLogger(__name__)

SNAPSHOT_NAME = "effective_config.json"


def deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``; override wins on leaves."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_override(assignment: str) -> tuple[str, Any]:
    """
    Parse a ``key.path=value`` override.

    The value is decoded as JSON when possible (numbers, booleans, lists),
    otherwise kept as a plain string.

    Raises:
        ConfigError: If the assignment has no ``=``
    """
    if "=" not in assignment:
        raise ConfigError(
            code=ErrorCode.CONFIG_PARSE_ERROR,
            user_message=f"Override '{assignment}' must look like key.path=value",
            path=assignment,
        )
    key, raw = assignment.split("=", 1)
    try:
        value: Any = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


class RunConfigManager:
    """
    Schema-validated run configuration with defaults and overrides.

    Provides dotted-path access to configuration values and rejects unknown
    keys or out-of-range values with the offending path.
    """

    def __init__(self, data: dict[str, Any] | None = None) -> None:
        """Initialize from an optional partial configuration dictionary."""
        self._config = deep_merge(DEFAULT_CONFIG, data or {})
        if not self._config["paths"]["data_dir"]:
            self._config["paths"]["data_dir"] = str(get_default_data_dir())
        self.validate()

    @classmethod
    def from_file(cls, path: Path | str | None, overrides: list[str] | None = None) -> RunConfigManager:
        """
        Load a configuration file and apply ``key.path=value`` overrides.

        Args:
            path: JSON configuration file, or None for defaults only
            overrides: Dotted assignments applied after the file

        Returns:
            Validated manager

        Raises:
            ConfigError: If the file is missing, unparsable or invalid
        """
        data: dict[str, Any] = {}
        if path is not None:
            config_path = Path(path)
            if not config_path.exists():
                raise ConfigError(
                    code=ErrorCode.CONFIG_MISSING, user_message=f"Config file not found: {config_path}", path=str(config_path)
                )
            try:
                data = json.loads(config_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as e:
                raise ConfigError(
                    code=ErrorCode.CONFIG_PARSE_ERROR,
                    user_message=f"Config file {config_path} is not valid JSON: {e}",
                    technical_message=str(e),
                ) from e
            if not isinstance(data, dict):
                raise ConfigError(code=ErrorCode.CONFIG_INVALID, user_message="Config root must be an object")
        for assignment in overrides or []:
            key, value = parse_override(assignment)
            data = deep_merge(data, _nest(key, value))
        return cls(data)

    def validate(self) -> None:
        """
        Validate the merged configuration against the schema.

        Raises:
            ConfigError: With the dotted path of the first violation
        """
        validator = jsonschema.Draft7Validator(RUN_CONFIG_JSON_SCHEMA)
        errors = sorted(validator.iter_errors(self._config), key=lambda e: list(e.absolute_path))
        if errors:
            error = errors[0]
            location = ".".join(str(p) for p in error.absolute_path)
            if error.validator == "additionalProperties" and isinstance(error.instance, dict):
                allowed = set(error.schema.get("properties", {}))
                extra = sorted(set(error.instance) - allowed)
                location = ".".join([location, extra[0]] if location else [extra[0]]) if extra else location
            raise ConfigError(
                code=ErrorCode.CONFIG_INVALID,
                user_message=f"Invalid configuration at '{location or '<root>'}': {error.message}",
                path=location or "<root>",
                technical_message=str(error),
            )
        pipeline = self._config["pipeline"]
        if pipeline["crop_start_s"] >= pipeline["crop_end_s"]:
            raise ConfigError(
                code=ErrorCode.CONFIG_INVALID,
                user_message="pipeline.crop_start_s must be below pipeline.crop_end_s",
                path="pipeline.crop_start_s",
            )

    def get(self, key: str, default: Any | None = None) -> Any:
        """
        Get a configuration value by dotted path.

        Args:
            key: Dotted path such as ``synth.separability``
            default: Returned when the path does not exist

        Returns:
            The stored value (a deep copy for containers)
        """
        node: Any = self._config
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return copy.deepcopy(node)

    def set(self, key: str, value: Any) -> None:
        """
        Set a value by dotted path and revalidate.

        Raises:
            ConfigError: If the resulting configuration is invalid
        """
        previous = self._config
        self._config = deep_merge(self._config, _nest(key, value))
        try:
            self.validate()
        except ConfigError:
            self._config = previous
            raise

    def section(self, name: str) -> dict[str, Any]:
        """Copy of one top-level section."""
        value = self.get(name)
        if not isinstance(value, dict):
            raise ConfigError(code=ErrorCode.CONFIG_MISSING, user_message=f"No config section '{name}'", path=name)
        return value

    def export_config(self) -> dict[str, Any]:
        """Deep copy of the full effective configuration."""
        return copy.deepcopy(self._config)

    def write_snapshot(self, output_dir: Path | str) -> Path:
        """
        Write the effective configuration next to a run's outputs.

        Args:
            output_dir: Directory receiving ``effective_config.json``

        Returns:
            Path to the snapshot file
        """
        path = Path(output_dir) / SNAPSHOT_NAME
        text = json.dumps(self._config, sort_keys=True, indent=2) + "\n"
        atomic_write_bytes(path, text.encode("utf-8"))
        logger.info(f"Effective configuration written to {path}")
        return path


def _nest(dotted: str, value: Any) -> dict[str, Any]:
    result: dict[str, Any] = {}
    node = result
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return result
