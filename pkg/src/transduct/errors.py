class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BoundaryPriorError(DomainError):
    """r0 == 0 or r0 == n0 under the p^-1 (1-p)^-1 prior: the posterior is improper."""


class ImpossibleDataError(DomainError):
    """Observed data has zero likelihood under every model with nonzero prior."""


class UndefinedOverconfidenceError(DomainError):
    """The plug-in tail probability is zero, so the relative excess has no value."""


class ScenarioError(ValueError):
    """A scenario document failed validation.

    ``path`` names the offending location, e.g. ``parameters.n0[2]``.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
