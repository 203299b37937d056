class NeuralPersistenceError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgument(NeuralPersistenceError, ValueError):
    pass


class DegenerateNetwork(NeuralPersistenceError, ValueError):
    """Raised when every weight of a network (or filter) is zero."""
