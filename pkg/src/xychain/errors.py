"""Exception types shared across the package."""


class XYChainError(Exception):
    """Base class for all package errors."""


class ConfigError(XYChainError, ValueError):
    """Invalid model parameters or run configuration."""


class NumericalIntegrityError(XYChainError, ArithmeticError):
    """A computed quantity violated a bound it must satisfy up to roundoff."""


class DegenerateModeError(NumericalIntegrityError):
    """A Bogoliubov mode of the selected sector has exactly zero energy."""


class OracleMismatchError(XYChainError):
    """Free-fermion and exact-diagonalization results disagree."""
