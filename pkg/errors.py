"""
Exception types shared across coreforge
"""


class CoreForgeError(Exception):
    """Base class for all coreforge errors"""


class ParameterError(CoreForgeError, ValueError):
    """Invalid sizes, malformed distributions or incomplete inputs"""


class IntegrityError(CoreForgeError):
    """Solver output that violates the constraints of the model it came from"""


class BackendUnavailable(CoreForgeError):
    """The requested solver package cannot be imported"""


class CertificateViolation(CoreForgeError):
    """
    A certificate failed exact verification.

    Attributes:
        ballot: the violating ballot (CandidateSet) or None for global conditions
        load: left-hand side found at the violation
        bound: right-hand side it should not exceed
    """

    def __init__(self, message, ballot=None, load=None, bound=None):
        super().__init__(message)
        self.ballot = ballot
        self.load = load
        self.bound = bound
