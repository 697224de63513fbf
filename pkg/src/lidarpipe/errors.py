"""Exception types shared across the package."""


class PipelineError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PipelineError):
    """Invalid or missing configuration."""


class PatchError(ConfigError):
    """A live config patch was rejected; the config is unchanged."""


class ParseError(PipelineError):
    """A data file could not be parsed."""


class ScheduleError(PipelineError):
    """A config entry could not be resolved into a runnable function."""


class FrameStoreError(PipelineError):
    """A frame slot write violated a store invariant."""


class MissingInputError(PipelineError):
    """A pipeline function needs a frame slot that is absent.

    The engine turns this into a warning log and skips the function.
    """

    def __init__(self, slot: str):
        super().__init__(f"required input '{slot}' is absent")
        self.slot = slot


class AlgoError(PipelineError):
    """A pipeline function failed on valid-looking input."""
