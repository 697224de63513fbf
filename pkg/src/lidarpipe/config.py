"""Pipeline configuration tree and live patching.

The on-disk form is a single ``base_config.yml`` with top-level keys
``data``, ``proc``, ``visualization`` and ``logging``; each entry under
``proc.<category>`` is a function with ``enabled``, ``priority`` and any
number of live-editable parameters.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError, PatchError
from .frame import PROCESS_CATEGORIES


@dataclass
class FunctionEntry:
    """One function in a process category; lower priority runs earlier."""

    name: str
    enabled: bool = False
    priority: int = 100
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"enabled": self.enabled, "priority": self.priority}
        d.update(self.params)
        return d

    @staticmethod
    def from_dict(name: str, d: dict[str, Any]) -> "FunctionEntry":
        d = dict(d or {})
        enabled = bool(d.pop("enabled", False))
        priority = int(d.pop("priority", 100))
        return FunctionEntry(name=name, enabled=enabled, priority=priority, params=d)


@dataclass
class DataConfig:
    """Where frames come from and which streams are read."""

    main_dir: str = ""
    lidar_dir: str = "lidar"
    camera_dir: str = "camera"
    calib_dir: str = "calib"
    label_dir: str = "label"
    pcd_type: str = ".bin"
    img_type: str = ".png"
    calib_type: str = ".txt"
    label_type: str = ".txt"
    lidar_enabled: bool = True
    camera_enabled: bool = False
    calib_enabled: bool = False
    label_enabled: bool = False
    replay_hz: float = 10.0

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "DataConfig":
        known = {f.name for f in fields(DataConfig)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown data keys: {sorted(unknown)}")
        return DataConfig(**d)


DEFAULT_VISUALIZATION: dict[str, Any] = {
    "enabled": True,
    "point_size": 2.0,
    "show_box_labels": True,
    "trail_length": 10,
    "max_points": 200000,
}

DEFAULT_LOGGING: dict[str, Any] = {
    "level": "info",
    "path": "logs",
}


@dataclass
class PipelineConfig:
    """The shared configuration tree steering a running pipeline."""

    data: DataConfig = field(default_factory=DataConfig)
    proc: dict[str, list[FunctionEntry]] = field(
        default_factory=lambda: {c: [] for c in PROCESS_CATEGORIES}
    )
    visualization: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_VISUALIZATION))
    logging: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_LOGGING))

    def __post_init__(self):
        for cat in PROCESS_CATEGORIES:
            self.proc.setdefault(cat, [])
        bad = set(self.proc) - set(PROCESS_CATEGORIES)
        if bad:
            raise ConfigError(
                f"unknown process categories {sorted(bad)}; valid: {list(PROCESS_CATEGORIES)}"
            )
        for cat, entries in self.proc.items():
            names = [e.name for e in entries]
            if len(names) != len(set(names)):
                raise ConfigError(f"duplicate function names in category '{cat}': {names}")

    # -- lookup ------------------------------------------------------------

    def find(self, category: str, name: str) -> Optional[FunctionEntry]:
        for entry in self.proc.get(category, []):
            if entry.name == name:
                return entry
        return None

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "data": self.data.to_dict(),
            "proc": {
                cat: {e.name: e.to_dict() for e in entries}
                for cat, entries in self.proc.items()
            },
            "visualization": dict(self.visualization),
            "logging": dict(self.logging),
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "PipelineConfig":
        if not isinstance(d, dict):
            raise ConfigError(f"config root must be a mapping, got {type(d).__name__}")
        data = DataConfig.from_dict(d.get("data", {}) or {})
        proc_raw = d.get("proc", {}) or {}
        proc: dict[str, list[FunctionEntry]] = {}
        for cat, entries in proc_raw.items():
            proc[cat] = [
                FunctionEntry.from_dict(name, spec) for name, spec in (entries or {}).items()
            ]
        vis = dict(DEFAULT_VISUALIZATION)
        vis.update(d.get("visualization", {}) or {})
        log = dict(DEFAULT_LOGGING)
        log.update(d.get("logging", {}) or {})
        return PipelineConfig(data=data, proc=proc, visualization=vis, logging=log)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)

    @staticmethod
    def from_yaml(text: str) -> "PipelineConfig":
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from exc
        return PipelineConfig.from_dict(raw or {})

    def save(self, path: Path | str) -> None:
        Path(path).write_text(self.to_yaml())

    @staticmethod
    def load(path: Path | str) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return PipelineConfig.from_yaml(path.read_text())

    def copy(self) -> "PipelineConfig":
        return copy.deepcopy(self)


def _coerce(value: Any, current: Any, path: str) -> Any:
    """Type-check a patch value against the current one. bool is not int."""
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise PatchError(f"{path}: expected bool, got {type(value).__name__}")
        return value
    if isinstance(current, int) and not isinstance(current, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise PatchError(f"{path}: expected int, got {type(value).__name__}")
        return value
    if isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise PatchError(f"{path}: expected number, got {type(value).__name__}")
        return float(value)
    if isinstance(current, str):
        if not isinstance(value, str):
            raise PatchError(f"{path}: expected string, got {type(value).__name__}")
        return value
    if isinstance(current, list):
        if not isinstance(value, list):
            raise PatchError(f"{path}: expected list, got {type(value).__name__}")
        return value
    if current is None:
        return value
    raise PatchError(f"{path}: unsupported value type {type(current).__name__}")


def apply_config_patch(
    config: PipelineConfig,
    path: str,
    value: Any,
    schema: Any = None,
) -> PipelineConfig:
    """New config with one dotted-path edit applied; rejects bad patches.

    ``schema``, when given, is a FunctionRegistry consulted for numeric
    min/max bounds of built-in parameters. The input config is never
    mutated: on rejection a PatchError is raised and the caller keeps the
    original.
    """
    parts = path.split(".")
    new = config.copy()
    if not parts or parts[0] not in ("data", "proc", "visualization", "logging"):
        raise PatchError(f"unknown config path: {path}")

    section = parts[0]
    if section == "data":
        if len(parts) != 2:
            raise PatchError(f"data paths have the form data.<key>: {path}")
        key = parts[1]
        if not hasattr(new.data, key):
            raise PatchError(f"unknown data key: {key}")
        setattr(new.data, key, _coerce(value, getattr(new.data, key), path))
        return new

    if section in ("visualization", "logging"):
        if len(parts) != 2:
            raise PatchError(f"{section} paths have the form {section}.<key>: {path}")
        mapping = getattr(new, section)
        key = parts[1]
        if key not in mapping:
            raise PatchError(f"unknown {section} key: {key}")
        mapping[key] = _coerce(value, mapping[key], path)
        return new

    # proc.<category>.<fn>.<field>
    if len(parts) != 4:
        raise PatchError(f"proc paths have the form proc.<category>.<fn>.<field>: {path}")
    _, category, fn_name, fld = parts
    if category not in PROCESS_CATEGORIES:
        raise PatchError(f"unknown category '{category}'; valid: {list(PROCESS_CATEGORIES)}")
    entry = new.find(category, fn_name)
    if entry is None:
        raise PatchError(f"no function '{fn_name}' in category '{category}'")

    if fld == "enabled":
        if not isinstance(value, bool):
            raise PatchError(f"{path}: expected bool, got {type(value).__name__}")
        entry.enabled = value
        return new
    if fld == "priority":
        if isinstance(value, bool) or not isinstance(value, int):
            raise PatchError(f"{path}: expected int, got {type(value).__name__}")
        entry.priority = value
        return new

    if fld not in entry.params:
        raise PatchError(f"{path}: no parameter '{fld}' on {category}.{fn_name}")
    coerced = _coerce(value, entry.params[fld], path)
    if schema is not None:
        spec = schema.param_spec(category, fn_name, fld)
        if spec is not None and isinstance(coerced, (int, float)) and not isinstance(coerced, bool):
            if spec.min is not None and coerced < spec.min:
                raise PatchError(f"{path}: {coerced} below minimum {spec.min}")
            if spec.max is not None and coerced > spec.max:
                raise PatchError(f"{path}: {coerced} above maximum {spec.max}")
    entry.params[fld] = coerced
    if schema is not None:
        fn = schema.resolve(category, fn_name)
        if fn is not None and getattr(fn, "validate", None) is not None:
            merged = {**fn.default_params(), **entry.params}
            problem = fn.validate(merged)
            if problem:
                raise PatchError(f"{path}: {problem}")
    return new
