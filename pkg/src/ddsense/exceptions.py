"""Exception types shared across the simulator."""


class DDSenseError(Exception):
    """Base class for all simulator errors."""


class LengthMismatch(DDSenseError):
    """Sample buffer does not match the length the operation requires."""


class InvalidRolloff(DDSenseError):
    """RRC roll-off factor outside [0, 1]."""


class DelayOutOfRange(DDSenseError):
    """Target delay outside the fundamental rectangle [0, T)."""


class DopplerOutOfRange(DDSenseError):
    """Target Doppler outside the unambiguous span (-1/(2T), 1/(2T))."""


class AxisOutOfRange(DDSenseError):
    """Ambiguity axis extends beyond the signal support or Nyquist span."""


class MissingOrigin(DDSenseError):
    """Requested cut axis does not contain the zero offset."""


class WindowTooLarge(DDSenseError):
    """CFAR window does not fit inside the map even with circular wrap."""


class ConfigError(DDSenseError):
    """Experiment configuration file is missing or malformed."""
