"""Exception hierarchy shared by all modules."""


class PseudorollError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PseudorollError, ValueError):
    pass


class GroupConstraintError(PseudorollError, ValueError):
    pass


class AlgebraConstraintError(PseudorollError, ValueError):
    pass


class DegenerateBlockError(PseudorollError, ValueError):
    pass


class IndexOrderError(PseudorollError, ValueError):
    pass


class DegenerateSubspaceError(PseudorollError, ValueError):
    pass


class MembershipError(PseudorollError, ValueError):
    """A point is not on the manifold it was supposed to lie on."""


class OrthogonalityError(PseudorollError, ValueError):
    pass


class NormalizationError(PseudorollError, ValueError):
    pass


class GridError(PseudorollError, ValueError):
    """Time grid too short, not strictly increasing, or mismatched with samples."""


class FlavorError(PseudorollError, ValueError):
    pass


class DegenerateTargetError(PseudorollError, ValueError):
    pass


class FrameError(PseudorollError, ValueError):
    pass


class SignatureError(PseudorollError, ValueError):
    pass


class MetricDegeneracyError(PseudorollError, ValueError):
    pass


class ScenarioError(PseudorollError, ValueError):
    """Malformed scenario input; carries a human readable location."""
