class DmnrLabError(Exception):
    """Base class for all toolkit errors."""
    pass

class EmptyCloudError(DmnrLabError):
    """Raised when an operation needs at least one point."""
    pass

class EmptyNeighborhoodError(DmnrLabError):
    """Raised when a point has no other point to measure against (N < 2)."""
    pass

class TooFewPointsError(DmnrLabError):
    """Raised when a cloud is smaller than the clustering minimum."""
    pass

class LengthMismatchError(DmnrLabError):
    """Raised when per-point sequences do not cover the same cloud."""
    pass

class MissingLabelsError(DmnrLabError):
    """Raised when ground-truth labels are needed but absent."""
    pass

class MalformedFileError(DmnrLabError):
    """Raised when a binary file does not decode to whole records."""
    pass

class NonFiniteError(DmnrLabError):
    """Raised when a point carries NaN or infinite values."""
    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"non-finite value at point {index}")

class InvalidSpecError(DmnrLabError):
    """Raised when a synthetic scene description is inconsistent."""
    pass

class InvalidParameterError(DmnrLabError):
    """Raised when a parameter record is out of range."""
    pass

class EmptyDatasetError(DmnrLabError):
    """Raised when an evaluation is asked to run over zero frames."""
    pass

class UnpairedFileError(DmnrLabError):
    """Raised when a point file has no label file with the same stem, or vice versa."""
    pass

class ConfigError(DmnrLabError):
    """Raised when a configuration file or override cannot be parsed."""
    pass

class FrameError(DmnrLabError):
    """A frame-level failure, tagged with the frame id it came from."""
    def __init__(self, frame_id: str, cause: Exception):
        self.frame_id = frame_id
        self.cause = cause
        super().__init__(f"frame '{frame_id}': {type(cause).__name__}: {cause}")
