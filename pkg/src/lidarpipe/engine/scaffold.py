"""Pipeline directory layout: creation, custom-function scaffolding, discovery.

A pipeline directory is self-contained and shareable:

    <dir>/base_config.yml
    <dir>/algo/{pre,lidar,camera,calib,label,post}/<fn>.py + <fn>.yml

Custom functions are plain modules exposing ``def <name>(frame, params,
config)``. They are (re)loaded from source whenever their file changes,
so editing one never requires a restart.
"""

from __future__ import annotations

import importlib.util
import logging
import sys
from pathlib import Path
from typing import Any, Optional

import yaml

from ..config import FunctionEntry, PipelineConfig
from ..errors import ConfigError
from ..frame import PROCESS_CATEGORIES
from .registry import FunctionDef, FunctionRegistry, ParamSpec

logger = logging.getLogger(__name__)

CONFIG_NAME = "base_config.yml"

_STUB_TEMPLATE = '''\
"""Custom {category}-stage function '{name}'.

Enable it from {name}.yml (or live through the control surface) and add
any parameters there; they arrive in ``params``. Read inputs with
``frame.get(<slot>)`` and write results with ``frame.put(<slot>, value)``
so other steps can pick them up. Raising an exception only skips this
function for the current frame.
"""


def {name}(frame, params, config):
    point_cloud = frame.get("point_cloud")
    if point_cloud is None:
        return
    # ... process and frame.put("point_cloud", result)
'''


def default_config(registry: FunctionRegistry) -> PipelineConfig:
    """All built-ins present but disabled, ready for interactive enabling."""
    config = PipelineConfig()
    for fn in registry.functions():
        config.proc[fn.category].append(fn.default_entry())
    return config


def new_pipeline(directory: Path | str, registry: FunctionRegistry) -> Path:
    """Initialize a pipeline directory; refuses to touch a non-empty one."""
    directory = Path(directory)
    if directory.exists() and any(directory.iterdir()):
        raise ConfigError(f"directory not empty: {directory}")
    directory.mkdir(parents=True, exist_ok=True)
    for category in PROCESS_CATEGORIES:
        (directory / "algo" / category).mkdir(parents=True, exist_ok=True)
    config_path = directory / CONFIG_NAME
    default_config(registry).save(config_path)
    return config_path


def scaffold_custom_function(
    pipeline_dir: Path | str,
    category: str,
    name: str,
    registry: Optional[FunctionRegistry] = None,
) -> list[Path]:
    """Create the .py stub and .yml fragment for a new custom function.

    The pipeline's base_config.yml, when present, gains the function's
    entry (disabled, priority 100) so the directory stays self-describing.
    """
    if category not in PROCESS_CATEGORIES:
        raise ConfigError(
            f"unknown category '{category}'; valid: {list(PROCESS_CATEGORIES)}"
        )
    if not name.isidentifier():
        raise ConfigError(f"function name must be a valid identifier: '{name}'")
    if registry is not None and registry.has(category, name):
        raise ConfigError(f"function ({category}, {name}) already exists")
    algo_dir = Path(pipeline_dir) / "algo" / category
    py_path = algo_dir / f"{name}.py"
    yml_path = algo_dir / f"{name}.yml"
    if py_path.exists() or yml_path.exists():
        raise ConfigError(f"function ({category}, {name}) already exists")
    algo_dir.mkdir(parents=True, exist_ok=True)
    py_path.write_text(_STUB_TEMPLATE.format(category=category, name=name))
    yml_path.write_text(yaml.safe_dump(
        {"enabled": False, "priority": 100}, sort_keys=False
    ))

    config_path = Path(pipeline_dir) / CONFIG_NAME
    if config_path.exists():
        config = PipelineConfig.load(config_path)
        if config.find(category, name) is None:
            config.proc[category].append(FunctionEntry(name=name, priority=100))
            config.save(config_path)
    return [py_path, yml_path]


def _infer_param_type(value: Any) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "float"
    if isinstance(value, list):
        return "list"
    return "str"


class CustomFunctionLoader:
    """Watches <pipeline_dir>/algo and keeps the registry in sync."""

    def __init__(self, pipeline_dir: Path | str, registry: FunctionRegistry):
        self.pipeline_dir = Path(pipeline_dir)
        self.registry = registry
        self._mtimes: dict[Path, float] = {}
        self._loaded: set[tuple[str, str]] = set()

    def refresh(self, config: Optional[PipelineConfig] = None) -> list[tuple[str, str]]:
        """(Re)load changed custom functions; returns newly seen (cat, name).

        When a config is given, discovered functions gain a config entry
        seeded from their .yml fragment if they lack one.
        """
        new: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for category in PROCESS_CATEGORIES:
            algo_dir = self.pipeline_dir / "algo" / category
            if not algo_dir.is_dir():
                continue
            for py_path in sorted(algo_dir.glob("*.py")):
                name = py_path.stem
                if not name.isidentifier():
                    continue
                seen.add((category, name))
                mtime = py_path.stat().st_mtime
                if self._mtimes.get(py_path) == mtime:
                    continue
                fn = self._load_one(category, name, py_path)
                if fn is None:
                    continue
                self._mtimes[py_path] = mtime
                if (category, name) not in self._loaded:
                    new.append((category, name))
                self._loaded.add((category, name))
                self.registry.register(fn)
                if config is not None:
                    self._ensure_entry(config, fn)
        for category, name in list(self._loaded):
            if (category, name) not in seen:
                self.registry.unregister(category, name)
                self._loaded.discard((category, name))
        return new

    def _load_one(self, category: str, name: str, py_path: Path) -> Optional[FunctionDef]:
        module_name = f"lidarpipe_custom.{category}.{name}"
        try:
            spec = importlib.util.spec_from_file_location(module_name, py_path)
            module = importlib.util.module_from_spec(spec)
            sys.modules[module_name] = module
            spec.loader.exec_module(module)
            run = getattr(module, name)
        except Exception as exc:
            logger.error("failed to load custom function %s: %s", py_path, exc)
            return None
        if not callable(run):
            logger.error("custom function %s does not define callable '%s'", py_path, name)
            return None

        fragment = self._read_fragment(py_path.with_suffix(".yml"))
        priority = int(fragment.pop("priority", 100))
        fragment.pop("enabled", None)
        params = tuple(
            ParamSpec(key, _infer_param_type(value), value)
            for key, value in fragment.items()
        )
        return FunctionDef(
            category=category,
            name=name,
            run=run,
            params=params,
            default_priority=priority,
            description=f"custom function from {py_path.name}",
        )

    @staticmethod
    def _read_fragment(yml_path: Path) -> dict[str, Any]:
        if not yml_path.exists():
            return {}
        try:
            data = yaml.safe_load(yml_path.read_text())
        except yaml.YAMLError as exc:
            logger.error("bad config fragment %s: %s", yml_path, exc)
            return {}
        return dict(data) if isinstance(data, dict) else {}

    def _ensure_entry(self, config: PipelineConfig, fn: FunctionDef) -> None:
        if config.find(fn.category, fn.name) is None:
            fragment = self._read_fragment(
                self.pipeline_dir / "algo" / fn.category / f"{fn.name}.yml"
            )
            entry = FunctionEntry.from_dict(fn.name, fragment)
            config.proc[fn.category].append(entry)
