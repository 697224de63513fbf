"""Function registry: built-ins plus discovered custom functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..config import FunctionEntry
from ..errors import ConfigError
from ..frame import PROCESS_CATEGORIES, Frame


@dataclass(frozen=True)
class ParamSpec:
    """Declared live-editable parameter with optional numeric bounds."""

    name: str
    type: str  # bool | int | float | str | list
    default: Any
    min: Optional[float] = None
    max: Optional[float] = None


@dataclass
class FunctionDef:
    """A runnable pipeline step: (frame, params, config) -> None."""

    category: str
    name: str
    run: Callable[[Frame, dict, Any], None]
    params: tuple[ParamSpec, ...] = ()
    default_priority: int = 100
    description: str = ""
    # Cross-parameter check used when validating live patches; returns a
    # problem description or None.
    validate: Optional[Callable[[dict], Optional[str]]] = None

    def default_params(self) -> dict[str, Any]:
        return {p.name: p.default for p in self.params}

    def default_entry(self) -> FunctionEntry:
        return FunctionEntry(
            name=self.name,
            enabled=False,
            priority=self.default_priority,
            params=self.default_params(),
        )


class FunctionRegistry:
    """(category, name) -> FunctionDef lookup for schedule building."""

    def __init__(self):
        self._functions: dict[tuple[str, str], FunctionDef] = {}

    def register(self, fn: FunctionDef) -> FunctionDef:
        if fn.category not in PROCESS_CATEGORIES:
            raise ConfigError(
                f"unknown category '{fn.category}'; valid: {list(PROCESS_CATEGORIES)}"
            )
        self._functions[(fn.category, fn.name)] = fn
        return fn

    def unregister(self, category: str, name: str) -> None:
        self._functions.pop((category, name), None)

    def resolve(self, category: str, name: str) -> Optional[FunctionDef]:
        return self._functions.get((category, name))

    def has(self, category: str, name: str) -> bool:
        return (category, name) in self._functions

    def functions(self, category: Optional[str] = None) -> list[FunctionDef]:
        fns = list(self._functions.values())
        if category is not None:
            fns = [f for f in fns if f.category == category]
        return sorted(fns, key=lambda f: (PROCESS_CATEGORIES.index(f.category), f.name))

    def param_spec(self, category: str, name: str, param: str) -> Optional[ParamSpec]:
        fn = self.resolve(category, name)
        if fn is None:
            return None
        for spec in fn.params:
            if spec.name == param:
                return spec
        return None
