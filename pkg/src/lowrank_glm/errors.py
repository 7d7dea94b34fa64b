"""Exception types raised by the package.

Each class carries the CLI exit code it maps to.
"""


class LowRankGLMError(Exception):
    exit_code = 1


class InputError(LowRankGLMError, ValueError):
    """Malformed or inconsistent input (shapes, file contents, config values)."""

    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(LowRankGLMError, ArithmeticError):
    """Non-finite values, SVD failure or solver divergence."""

    exit_code = 3

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class DivergenceError(NumericalError):
    pass


class AUCUndefinedError(LowRankGLMError, ValueError):
    exit_code = 4
