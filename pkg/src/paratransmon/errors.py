class PhysicsError(ValueError):
    """Parameters outside the regime where a model or formula applies."""


class JunctionCollapseError(PhysicsError):
    pass


class DispersiveError(PhysicsError):
    pass


class LabelingError(PhysicsError):
    pass


class OracleError(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    pass
