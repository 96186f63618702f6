"""Exception hierarchy shared by all skelforge modules."""


class SkelforgeError(Exception):
    """Base class for every error raised by skelforge."""


class ValidationError(SkelforgeError, ValueError):
    """Input failed a precondition (schema, ranges, shapes)."""


class TopologyError(ValidationError):
    pass


class DegenerateBoneError(ValidationError):
    """A bone has (near) zero length, so no direction can be taken from it."""


class VerticalDegenerateError(ValidationError):
    """Azimuth is undefined because the vector is parallel to the z axis."""


class RollUndefinedError(ValidationError):
    """The reference vector cannot fix the roll about the target vector."""


class DegenerateUpError(ValidationError):
    """The camera view direction is parallel to its up hint."""


class ExtrapolationError(ValidationError):
    pass


class FrameError(SkelforgeError):
    """Wraps a per-frame failure with the offending frame index."""

    def __init__(self, frame: int, cause: Exception):
        super().__init__(f"frame {frame}: {cause}")
        self.frame = frame
        self.cause = cause


class StageError(SkelforgeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
