class PydonskerError(Exception):
    def __init__(self, msg: str, details: dict | None = None) -> None:
        super().__init__(msg)

        self.details = details or {}


# ----------------------- Domain violations (CLI exit 2)
class DomainError(PydonskerError):
    exit_code = 2


class ZeroScaling(DomainError):
    pass


class SectorViolation(DomainError):
    pass


class NonpositiveTime(DomainError):
    pass


class DivergentTheta(DomainError):
    pass


class DomainViolation(DomainError):
    pass


class RaisedNormOfNonSchwartz(DomainError):
    pass


class InvalidPayload(DomainError):
    pass


# ----------------------- Numerical failures (CLI exit 3)
class NumericalError(PydonskerError):
    exit_code = 3


class QuadratureFailure(NumericalError):
    pass


class SingularGram(NumericalError):
    pass
