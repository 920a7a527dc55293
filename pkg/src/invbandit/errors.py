"""Exception types raised across the package.

Every error derives from :class:`InverseBanditError`, which is itself a
``ValueError`` so callers that only care about "bad input" can catch that.
"""


class InverseBanditError(ValueError):
    """Base class for all validation errors raised by invbandit."""


# bandit instances
class EmptyMeansError(InverseBanditError):
    pass


class BernoulliMeanOutOfRangeError(InverseBanditError):
    pass


class NegativeVarianceError(InverseBanditError):
    pass


class NonUniqueBestError(InverseBanditError):
    pass


class ArmIndexOutOfRangeError(InverseBanditError):
    pass


# demonstrators
class HorizonTooSmallError(InverseBanditError):
    pass


class ZeroPullsError(InverseBanditError):
    pass


class ConfigError(InverseBanditError):
    """Invalid demonstrator or experiment configuration."""


# estimators
class EmptyTrajectoryError(InverseBanditError):
    pass


class ArmNeverPulledError(InverseBanditError):
    pass


class ArmStillActiveError(InverseBanditError):
    pass


class NoValidSwitchError(InverseBanditError):
    pass


class AlgorithmMismatchError(InverseBanditError):
    pass


# analysis
class ZeroGapError(InverseBanditError):
    pass


class NonPositiveInputError(InverseBanditError):
    pass


class EmptyRunsError(InverseBanditError):
    pass


class TooFewPointsError(InverseBanditError):
    pass


class NonPositivePointError(InverseBanditError):
    pass


# datasets
class ParseError(InverseBanditError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateArmIdError(InverseBanditError):
    pass


class NegativeStdError(InverseBanditError):
    pass


class MuMaxTooSmallError(InverseBanditError):
    pass


class DegenerateRangeError(InverseBanditError):
    pass


class KTooLargeError(InverseBanditError):
    pass


class UnknownPinnedIdError(InverseBanditError):
    pass
