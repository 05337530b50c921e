class CoverError(Exception):
    """Base class for every error raised by the cover package."""


class EncodingError(CoverError, ValueError):
    """A code or symbol set cannot be encoded."""


class DegreeError(CoverError, ValueError):
    """The requested degree sequence cannot be realized."""


class StoppingSetError(CoverError, ValueError):
    """A stopping-set computation or claim is not possible."""


class InsufficientChainError(CoverError, LookupError):
    """A header needed for validation is missing from the chain."""


class ConflictingStateError(CoverError):
    """A spent output is already mapped to a different spender."""


class RegimeError(CoverError, ValueError):
    """Parameters fall outside the range where a bound is meaningful."""


class ConfigError(CoverError, ValueError):
    """A scenario configuration failed validation.

    Attributes:

        problems (List[str]):
            Every validation problem found, in field order.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
