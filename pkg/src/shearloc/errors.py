"""Exception and warning types raised across the package."""


class ShearlocError(Exception):
    """Base class for all package errors."""


class RangeError(ShearlocError, ValueError):
    """A parameter lies outside its admissible range."""


class DegenerateError(ShearlocError):
    """A formula hits a removable or genuine singularity."""


class SingularGraphError(ShearlocError):
    """The denominator of the critical-manifold graph vanishes."""


class ConvergenceError(ShearlocError):
    """A dense linear-algebra routine failed to converge."""


class IntegratorError(ShearlocError):
    """An ODE integration failed (blow-up or step collapse)."""


class NewtonDivergence(ShearlocError):
    """Newton iteration failed; ``history`` holds residual norms."""

    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = list(history or [])


class MeshError(ShearlocError):
    """Adaptive re-meshing exceeded the node cap."""


class StepSizeCollapse(ShearlocError):
    """Continuation step size fell below its minimum."""

    def __init__(self, msg, last=None):
        super().__init__(msg)
        self.last = last


class TangencyFailure(ShearlocError):
    """An orbit does not leave M0 along the expected eigendirection."""


class DomainError(ShearlocError, ValueError):
    """Input outside the domain of a transformation."""


class ExtrapolationError(ShearlocError):
    """Evaluation requested outside the sampled range."""


class WindowError(ShearlocError):
    """A fitting window holds too few samples."""


class InvarianceViolation(ShearlocError):
    """A flux sign check failed at some sample."""

    def __init__(self, msg, sample=None):
        super().__init__(msg)
        self.sample = sample


class MissingArtifact(ShearlocError, FileNotFoundError):
    """A required input file is absent."""


class SectorExitWarning(UserWarning):
    """Trajectory left the positive sector p, q >= 0; r, s > 0."""
