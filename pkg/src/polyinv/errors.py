"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """An iterative numerical routine exceeded its safeguards.

    Raised instead of returning a possibly-wrong answer (simplex cycling
    guard, cutting-plane caps, special-function nonconvergence).
    """


class DegeneracyError(NumericalFailure):
    """Geometric degeneracy beyond the perturbation tolerance.

    Typical causes: input points that are not full-dimensional, or a hull
    whose interior does not strictly contain the origin.
    """


class NonConvergenceError(RuntimeError):
    """A set iteration hit its iteration cap before meeting its tolerance.

    Carries the iteration trace collected so far in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ValidationError(ValueError):
    """A serialized artifact (system, sample set, polytope) is malformed."""
