"""Exception types shared across the package."""


class CotransportError(Exception):
    """Base class for all package errors."""


class DomainError(CotransportError, ValueError):
    """Input is outside the mathematical domain of an operation.

    Examples: zero vector passed to signed_angle, object placed exactly on
    an obstacle center, a team state violating the rigid-stick invariants.
    """


class SamplingDensityError(DomainError):
    """A winding update moved by >= 0.5 turns in a single step.

    Principal-value angle accumulation silently aliases rotations of more
    than half a turn, so trajectories must be sampled densely enough that
    no single step spans that much. An exactly antipodal step is the only
    violation that is detectable, and it is rejected.
    """


class CapacityError(CotransportError, ValueError):
    """A request exceeds a hard practical limit (e.g. > 16 obstacles)."""


class ScenarioError(CotransportError, ValueError):
    """A scenario/config document failed to parse or validate."""


class LogIntegrityError(CotransportError):
    """A trial log does not replay to its own recorded states."""


class ProtocolError(CotransportError):
    """A session protocol message violates the wire contract."""
