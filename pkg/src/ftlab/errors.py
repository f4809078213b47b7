"""Exception hierarchy shared across the package."""


class FtlabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FtlabError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigError(FtlabError, ValueError):
    """A configuration value or file is invalid."""


class ParseError(FtlabError, ValueError):
    """A circuit line could not be parsed.

    position: character offset of the offending token in the input line.
    """

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class DataIntegrityError(FtlabError):
    """Shipped or imported data failed an integrity check."""


class NumericsError(FtlabError, RuntimeError):
    """A numerical routine failed to converge or lost precision."""


class FitError(NumericsError):
    """A curve fit could not be carried out on the given data."""


class CompileError(FtlabError):
    """A circuit cannot be lowered to pulses with the given library/device."""


class PostselectionError(FtlabError):
    """Postselection removed all probability mass."""
