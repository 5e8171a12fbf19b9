"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 2 (handled by click),
DataError exits 3, NoCandidatesError exits 4.
"""


class RuleCoverError(Exception):
    """Base class for errors raised by rulecover."""


class DataError(RuleCoverError):
    """Input data is missing, malformed, or unusable."""


class NoCandidatesError(RuleCoverError):
    """No rule candidates survive mining or threshold validation."""
