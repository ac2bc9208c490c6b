"""Exception types raised across the package."""


class MemspikeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MemspikeError, ValueError):
    """A value is out of its valid domain (non-finite, wrong length, ...)."""


class PerturbingReadError(InvalidInputError):
    """The read voltage would write to the device."""


class NonSettlingError(MemspikeError):
    """Relaxation monitoring exceeded its batch cap.

    The reads collected before giving up are kept on ``trace``.
    """

    def __init__(self, message, trace=None, v_w=None):
        super().__init__(message)
        self.trace = list(trace or [])
        self.v_w = v_w


class InsufficientNoiseError(MemspikeError):
    """Too few usable noise-pair measurements to estimate a noise band."""


class RecordingFormatError(MemspikeError):
    """A recording file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(MemspikeError):
    """Bad configuration: unknown preset, missing key, malformed value."""


class PipelineError(MemspikeError):
    """A pipeline run inside a sweep failed; tagged with the run coordinates."""

    def __init__(self, message, gain=None, repeat=None):
        super().__init__(f"gain={gain} repeat={repeat}: {message}")
        self.gain = gain
        self.repeat = repeat
