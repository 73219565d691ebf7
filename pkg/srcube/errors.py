"""
Exception hierarchy for the S-R cube solver.

- Library code raises these; it never prints.
- main.py catches them at the command boundary and maps them to exit codes.
"""


class SRCubeError(Exception):
    """Base class for every solver failure."""


class GeometryError(SRCubeError, ValueError):
    """Point or parameter outside the region an operation accepts."""


class SingularityError(SRCubeError, ValueError):
    """Kernel evaluated on top of a source or image point."""


class TruncationError(SRCubeError, RuntimeError):
    """Series that cannot reach the requested tolerance within its limits."""


class QuadratureError(SRCubeError, ArithmeticError):
    """Non-finite integrand value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SolveError(SRCubeError, RuntimeError):
    """Numerically singular collocation system."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class StepError(SRCubeError):
    """Pipeline failure tagged with the procedure step (1-6) it happened in."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


class ConfigError(SRCubeError, ValueError):
    """Invalid configuration file or command-line value."""


class RangeError(SRCubeError, ValueError):
    """Argument outside the documented supported range of a special function or rule."""
