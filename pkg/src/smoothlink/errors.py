"""Exception hierarchy for the build and certification pipeline."""


class SmoothLinkError(Exception):
    """Base class for all library errors."""


class InvalidLinkError(SmoothLinkError):
    """Input polygon violates a structural requirement (embeddedness, vertex count)."""


class GeneralPositionError(SmoothLinkError):
    """Edge directions could not be brought into general position."""


class SpeedPositivityError(SmoothLinkError):
    """A synthesized speed function is not certifiably positive."""


class QuadratureError(SmoothLinkError):
    """Adaptive quadrature failed to converge to the requested tolerance."""


class PlannerError(SmoothLinkError):
    """No obstacle-avoiding connector arc was found at the requested clearance."""


class AmplitudeSolveError(SmoothLinkError):
    """An amplitude equation had no admissible root."""


class ClosureError(SmoothLinkError):
    """End-to-end drift could not be cancelled within the coefficient budget."""


class CannotCertifyError(SmoothLinkError):
    """Sampling or margins are too coarse to decide a certification question."""


class SchemaError(SmoothLinkError):
    """A JSON document does not match the expected file schema."""


class StageError(SmoothLinkError):
    """Pipeline failure, tagged with the stage that raised it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
