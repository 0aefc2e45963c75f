"""Exception types shared across the package."""


class ShrinkTargetError(Exception):
    """Base class for package errors."""


class CapExceeded(ShrinkTargetError):
    """A digit stream was asked for more digits than its hard cap allows."""


class Undecidable(ShrinkTargetError):
    """An interval-membership query did not resolve within the digit budget.

    Can only happen when the orbit point agrees with an interval endpoint
    to the full available depth (a measure-zero event for random points).
    """


class SizeExceeded(ShrinkTargetError):
    """An exact computation would exceed its configured size bound."""


class ConditionViolated(ShrinkTargetError):
    """A quantitative hypothesis of a concentration bound does not hold."""


class ConfigInvalid(ShrinkTargetError):
    """An experiment config violates a parameter hypothesis.

    The message names the violated hypothesis.
    """


class PrecisionAbort(ShrinkTargetError):
    """A certified enclosure could not be refined enough to decide a floor/tie."""
