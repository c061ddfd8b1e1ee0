"""Exception hierarchy shared by the library and the CLI."""


class KMonotoneError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(KMonotoneError, ValueError):
    """Malformed input: bad lengths, non-finite values, unsorted chains."""


class GuardrailError(KMonotoneError):
    """A size guardrail was exceeded (enumeration size, sampler area, ...)."""


class BudgetExceededError(GuardrailError):
    """The DP solver hit its transition budget.

    ``lower_bound`` is the length of a chain that was certified before the
    solver gave up, so callers still get an honest partial answer.
    """

    def __init__(self, message, lower_bound=0, states_explored=0):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.states_explored = states_explored
