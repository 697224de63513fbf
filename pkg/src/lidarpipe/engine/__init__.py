"""Schedule building, execution loop, and pipeline-directory management."""

from .builtins import build_default_registry
from .engine import FrameStats, PipelineEngine, RunStats
from .registry import FunctionDef, FunctionRegistry, ParamSpec
from .scaffold import (
    CONFIG_NAME,
    CustomFunctionLoader,
    default_config,
    new_pipeline,
    scaffold_custom_function,
)
from .schedule import Schedule, build_schedule

__all__ = [
    "CONFIG_NAME",
    "CustomFunctionLoader",
    "FrameStats",
    "FunctionDef",
    "FunctionRegistry",
    "ParamSpec",
    "PipelineEngine",
    "RunStats",
    "Schedule",
    "build_default_registry",
    "build_schedule",
    "default_config",
    "new_pipeline",
    "scaffold_custom_function",
]
