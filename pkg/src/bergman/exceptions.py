"""Exception hierarchy shared by every evaluator."""


class BergmanError(Exception):
    """Base class for all library errors."""


class TermBudgetExceeded(BergmanError):
    """A series ran out of its term budget before the tail certificate fired."""


class CancellationLoss(BergmanError):
    """A signed sum lost too many digits to cancellation."""


class RegimeOutOfRange(BergmanError):
    """An approximation was requested outside the range where its bound is proven."""


class SlowConvergence(RegimeOutOfRange):
    """The Poisson-side series decays too slowly at this t."""


class ConvexityViolation(BergmanError):
    """A sampled second difference of a model that should be convex came out negative."""


class InapplicableAssumptions(BergmanError):
    """The surface envelope was requested for parameters failing its assumptions."""
