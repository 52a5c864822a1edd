"""Exception hierarchy shared by all modules."""


class PadicError(ValueError):
    """Base class for every error raised by this package."""


class InvalidInputError(PadicError):
    pass


class NonUnitError(PadicError):
    """Raised when inverting an element divisible by p."""


class DomainError(PadicError):
    """Argument outside the domain of a series (e.g. log away from 1 + pZp)."""


class NotInImageError(PadicError):
    pass


class ShapeError(PadicError):
    pass


class CharacterMismatchError(PadicError):
    pass


class UnsupportedCompilationError(PadicError):
    """The character cannot be written as exp_p(c x) with c in qZp."""


class BudgetExceededError(PadicError):
    pass


class FrontierOverflowError(PadicError):
    def __init__(self, message, last_level, frontier_size):
        super().__init__(message)
        self.last_level = last_level
        self.frontier_size = frontier_size


class SchemaError(PadicError):
    """A JSON document does not match the expected file format."""
