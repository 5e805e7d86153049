"""Exception types shared across the package."""


class CfireError(Exception):
    """Base class for all errors raised by this package."""


class DataError(CfireError):
    """Malformed or unusable input data (files, shapes, values)."""


class ConfigError(CfireError):
    """Invalid parameter or configuration value."""


class CapabilityError(CfireError):
    """A black-box capability (e.g. gradients) is not available."""


class TrainingError(CfireError):
    """Black-box training failed (e.g. non-finite loss)."""


class PipelineError(CfireError):
    """Failure inside the extraction pipeline, tagged with its stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
