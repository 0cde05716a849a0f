# src/errors.py


class StrongDomError(Exception):
    """Base class for every error raised by the strongdom library."""


class FormatError(StrongDomError, ValueError):
    """Input is malformed: wrong shape, non-finite values, bad permutation."""


class DomainError(StrongDomError, ValueError):
    """A mathematical precondition of an operation is violated."""


class NoTransferOperatorError(DomainError):
    def __init__(self, index, lhs, rhs):
        self.index = index
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(
            f"No transfer operator exists: partial sum {index} of g# is {lhs:.12g}, "
            f"which exceeds the partial sum {rhs:.12g} of f#."
        )


class DecompositionError(DomainError):
    """No perfect matching exists on a residual that is not yet zero."""


class EnumerationCapError(DomainError):
    def __init__(self, paths, cap):
        self.paths = paths
        self.cap = cap
        super().__init__(
            f"Exact enumeration needs {paths} paths, above the cap of {cap}. "
            f"Use monte_carlo_lp instead."
        )


class HypothesisCheckError(DomainError):
    """A pair of martingale trees fails the hypothesis it was built for."""


class UsageError(StrongDomError):
    """Command line misuse or an unknown option value."""
