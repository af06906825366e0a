"""Exception types raised by the simulator and analysis pipeline."""


class ChannelSimError(Exception):
    """Base class for all tcslsim errors."""


class ConfigError(ChannelSimError):
    """A single violated configuration constraint."""


class DistanceOutOfRangeError(ConfigError):
    pass


class NonPositiveDropsError(ConfigError):
    pass


class MalformedOverrideError(ConfigError):
    pass


class ConfigValidationError(ChannelSimError):
    """Aggregate of every constraint violated by a SimConfig.

    `violations` holds one ConfigError per failed check so callers can
    report all problems at once instead of fixing them one by one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid configuration: {lines}")


class InvalidParamsError(ChannelSimError, ValueError):
    """Distribution parameters violate a family constraint."""


class NonPositiveFrequencyError(ChannelSimError, ValueError):
    pass


class DistanceBelowReferenceError(ChannelSimError, ValueError):
    pass


class NonPositiveBinWidthError(ChannelSimError, ValueError):
    pass


class EmptyProfileError(ChannelSimError, ValueError):
    pass


class EmptyInputError(ChannelSimError, ValueError):
    pass


class EmptyGridError(ChannelSimError, ValueError):
    pass


class InsufficientSamplesError(ChannelSimError, ValueError):
    pass


class EmptySamplesError(ChannelSimError, ValueError):
    pass


class NonPositiveSampleError(ChannelSimError, ValueError):
    pass


class TooFewSamplesError(ChannelSimError, ValueError):
    pass
