"""lidarpipe: config-driven, live-reconfigurable lidar processing pipelines."""

from .config import DataConfig, FunctionEntry, PipelineConfig, apply_config_patch
from .errors import (
    AlgoError,
    ConfigError,
    FrameStoreError,
    MissingInputError,
    ParseError,
    PatchError,
    PipelineError,
    ScheduleError,
)
from .frame import (
    FRAME_SLOTS,
    PROCESS_CATEGORIES,
    Box3D,
    Calibration,
    Frame,
    ImageRaster,
    LogEntry,
    ObjectLabel,
    PointCloud,
)

__version__ = "0.1.0"

__all__ = [
    "AlgoError",
    "Box3D",
    "Calibration",
    "ConfigError",
    "DataConfig",
    "FRAME_SLOTS",
    "Frame",
    "FrameStoreError",
    "FunctionEntry",
    "ImageRaster",
    "LogEntry",
    "MissingInputError",
    "ObjectLabel",
    "ParseError",
    "PatchError",
    "PipelineConfig",
    "PipelineError",
    "PointCloud",
    "PROCESS_CATEGORIES",
    "ScheduleError",
    "apply_config_patch",
]
