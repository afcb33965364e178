"""Exception hierarchy. Every error carries the subsystem it came from and a
CLI category so the command-line harness can print one classified line and
pick an exit code.
"""


class RetrdexError(Exception):
    """Base class; `module` names the subsystem, `category` the CLI class."""

    category = "DataError"

    def __init__(self, message: str, module: str = ""):
        super().__init__(message)
        self.module = module


class ConfigError(RetrdexError):
    category = "ConfigError"


class DataError(RetrdexError):
    category = "DataError"


class NumericalError(RetrdexError):
    category = "NumericalError"


class NonFiniteState(NumericalError):
    """A body state became non-finite during integration; the episode aborts."""


class NonFiniteLoss(NumericalError):
    """A training loss became non-finite; parameters are restored."""


class Unreachable(DataError):
    """DLS IK residual failed to drop below tolerance within the iteration cap."""


class OcclusionUnattainable(DataError):
    """Scene generation could not occlude the target within the attempt cap."""


class TargetOutOfFrame(DataError):
    """Exposure is undefined: the isolated target renders zero pixels."""


class InsufficientData(DataError):
    """Trajectory filtering left a spatial region empty."""


class LengthMismatch(DataError):
    """Sequence arguments disagree on length."""


class EmptyInput(DataError):
    """An aggregate was requested over zero records."""
