"""Per-frame execution order across the six process categories."""

from __future__ import annotations

from dataclasses import dataclass

from ..config import PipelineConfig
from ..errors import ScheduleError
from ..frame import PROCESS_CATEGORIES
from .registry import FunctionRegistry


@dataclass(frozen=True)
class Schedule:
    """Ordered (category, name) pairs; a pure function of config + registry."""

    steps: tuple[tuple[str, str], ...]

    def __iter__(self):
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def build_schedule(config: PipelineConfig, registry: FunctionRegistry) -> Schedule:
    """Enabled entries in fixed category order, then (priority, name).

    Disabled entries are excluded; an enabled entry that resolves to
    nothing is a schedule error.
    """
    steps: list[tuple[str, str]] = []
    for category in PROCESS_CATEGORIES:
        enabled = [e for e in config.proc.get(category, []) if e.enabled]
        for entry in enabled:
            if not registry.has(category, entry.name):
                raise ScheduleError(
                    f"enabled function ({category}, {entry.name}) is not registered"
                )
        enabled.sort(key=lambda e: (e.priority, e.name))
        steps.extend((category, e.name) for e in enabled)
    return Schedule(steps=tuple(steps))
