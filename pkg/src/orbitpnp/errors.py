"""Exception hierarchy shared across the package."""


class OrbitPnPError(Exception):
    """Base class for all package errors."""


# dynamics
class NonPositiveMass(OrbitPnPError, ValueError):
    pass


class AsymmetricInertia(OrbitPnPError, ValueError):
    pass


class InvalidLink(OrbitPnPError, ValueError):
    pass


class DimensionMismatch(OrbitPnPError, ValueError):
    pass


class NonFiniteInput(OrbitPnPError, ValueError):
    pass


class DegenerateGrasp(OrbitPnPError, ValueError):
    pass


# system identification
class NonPositiveEps(OrbitPnPError, ValueError):
    pass


class EmptyDataset(OrbitPnPError, ValueError):
    pass


class DivergedFit(OrbitPnPError, ArithmeticError):
    pass


# debris generation
class InvalidRegion(OrbitPnPError, ValueError):
    pass


class InvalidRadius(OrbitPnPError, ValueError):
    pass


class InvalidGrid(OrbitPnPError, ValueError):
    pass


class InvalidFieldSpec(OrbitPnPError, ValueError):
    pass


# simulation
class EmptyRobots(OrbitPnPError, ValueError):
    pass


class InvalidDt(OrbitPnPError, ValueError):
    pass


class InvalidHorizon(OrbitPnPError, ValueError):
    pass


class DuplicateRobot(OrbitPnPError, ValueError):
    pass


class AssignmentError(OrbitPnPError, ValueError):
    pass


class UnknownDebris(AssignmentError):
    pass


class UnknownRobot(AssignmentError):
    pass


class DoubleClaim(AssignmentError):
    pass


class UnavailableDebris(AssignmentError):
    """Assigned debris is neither Pending nor claimed by the same robot."""


# allocation
class InvalidN(OrbitPnPError, ValueError):
    pass


class InvalidHyper(OrbitPnPError, ValueError):
    pass


class InstanceTooLarge(OrbitPnPError, ValueError):
    pass


# cli / config
class ConfigError(OrbitPnPError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class MissingPolicy(OrbitPnPError):
    pass


class UnknownPolicy(OrbitPnPError, ValueError):
    pass
