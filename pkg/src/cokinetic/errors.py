"""Exception hierarchy shared by all cokinetic modules."""


class CokineticError(Exception):
    """Base class for all errors raised by this package."""


# -- linear algebra ----------------------------------------------------------

class InvalidDimension(CokineticError):
    pass


class NotCosymplectic(CokineticError):
    pass


class NoReebVector(CokineticError):
    pass


class SingularChangeOfBasis(CokineticError):
    pass


# -- flat model fields -------------------------------------------------------

class UnboundedDomain(CokineticError):
    pass


class NotClosed(CokineticError):
    pass


class NonConstantForm(CokineticError):
    pass


# -- isotopies ---------------------------------------------------------------

class KindMismatch(CokineticError):
    pass


class ModelMismatch(CokineticError):
    pass


class NonAutonomous(CokineticError):
    pass


# -- lift --------------------------------------------------------------------

class UnsupportedModel(CokineticError):
    pass


class NotAFixedPoint(CokineticError):
    pass


# -- norms / reparam ---------------------------------------------------------

class NoValidCandidate(CokineticError):
    pass


class RangeViolation(CokineticError):
    pass


class InvalidEpsilon(CokineticError):
    pass


class ConstructionFailed(CokineticError):
    pass


class NotNormalized(CokineticError):
    pass


class NotCauchy(CokineticError):
    pass


# -- scenario / CLI ----------------------------------------------------------

class ScenarioError(CokineticError):
    """Base class for scenario-file problems (exit code 2 territory)."""


class ParseError(ScenarioError):
    pass


class SchemaError(ScenarioError):
    """Carries a JSON-pointer-ish path to the offending element."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")


class UnknownNameError(ScenarioError):
    """A task references an isotopy/curve name that was never declared."""
