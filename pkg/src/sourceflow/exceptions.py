"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """Input lies outside the domain of a model or formula."""


class ModelKindError(ValueError):
    """Operation is not defined for the requested gas model."""


class RegimeError(ValueError):
    """Requested asymptotic regime or calibration is not available."""


class SingularityError(ArithmeticError):
    """A formula would divide by zero (e.g. f'(v0) = 0 or C1 = 0)."""


class NonInvertibleError(ValueError):
    """f(v) = f0 has several roots; ``roots`` lists all of them."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = list(roots)


class BranchLossError(RuntimeError):
    """Branch continuation ran into a fold where the tracked root vanished."""

    def __init__(self, message, fold_r):
        super().__init__(message)
        self.fold_r = fold_r


class NoSolutionError(RuntimeError):
    """The implicit Euler relation has no root at the requested radius."""


class ConvergenceError(RuntimeError):
    """Newton iteration failed; carries the last iterate and residual norm."""

    def __init__(self, message, iterate=None, residual_norm=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual_norm = residual_norm


class NoStepError(ValueError):
    """Profile does not contain a detectable step."""
