"""Exception types shared across the laboratory modules."""


class SolitonLabError(Exception):
    """Base class for all laboratory errors."""


class UnsupportedBackend(SolitonLabError):
    """Requested geometry backend id is not implemented."""


class NormalizationFailed(SolitonLabError):
    """A normalization constant could not be computed (non-finite quadrature)."""


class GridMismatch(SolitonLabError):
    """Operands live on different collocation grids."""


class PositivityLost(SolitonLabError):
    """The Kahler condition failed at one or more nodes."""

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value


class DegreeOutOfRange(SolitonLabError):
    """Wedge degree or functional index outside the valid range."""


class PathLeavesCone(SolitonLabError):
    """A path of potentials left the space of Kahler potentials."""


class NewtonDiverged(SolitonLabError):
    """Damped Newton iteration failed to converge."""


class SingularLinearization(SolitonLabError):
    """The Newton linearization was numerically singular."""


class StepUnderflow(SolitonLabError):
    """Continuation step size fell below the minimum; carries the diagnostic tail.

    Attributes
    ----------
    last_t : float
        Largest parameter value with an accepted solution.
    points : list
        Accepted continuation points up to the breakdown.
    history : list of (t, I) pairs
        Growth record of the energy I along the attempted path.
    """

    def __init__(self, message, last_t, points, history):
        super().__init__(message)
        self.last_t = last_t
        self.points = points
        self.history = history


class NoBracket(SolitonLabError):
    """Root scan found no sign change on the search interval."""


class FlowLeftCone(SolitonLabError):
    """Automorphism flow time was too large for the potential to stay admissible."""


class InsufficientPathResolution(SolitonLabError):
    """Path data is too sparse for the requested identity check."""


class ConfigInvalid(SolitonLabError):
    """Run configuration failed validation."""
