"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class CsvParseError(ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class OverShrinkageError(ArithmeticError):
    """The l1 threshold zeroed the whole iterate.

    Carries the threshold ``lambda_t`` and the 1-based ``iteration`` at which it
    happened; ``component`` is filled in when raised from a multi-component fit.
    """

    def __init__(self, lambda_t, iteration, component=None):
        self.lambda_t = lambda_t
        self.iteration = iteration
        self.component = component
        msg = f"iterate collapsed to zero at iteration {iteration} (lambda*t = {lambda_t:.6g})"
        if component is not None:
            msg = f"component {component}: " + msg
        super().__init__(msg)

    def with_component(self, component):
        return OverShrinkageError(self.lambda_t, self.iteration, component)


class NumericalError(ArithmeticError):
    """A linear solve produced non-finite values."""
