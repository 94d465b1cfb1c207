"""Exception hierarchy shared by the library and the command line."""


class PolytreeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PolytreeError, ValueError):
    """Arguments violate a documented precondition."""


class ConfigurationError(PolytreeError, ValueError):
    """Incompatible combination of settings, e.g. a G-test on exact input."""


class ParseError(PolytreeError, ValueError):
    """A model, distribution, dataset or result file could not be read."""


class DegeneracyError(PolytreeError):
    """No non-degenerate model could be produced within the budget."""
