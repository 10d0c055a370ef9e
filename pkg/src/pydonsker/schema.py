from typing import Annotated, Any, Optional

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    PositiveFloat,
    PositiveInt,
)

from .functions import FunctionElement, zero
from .oracle import OracleEstimate
from .types import OracleTargetLiteral, SubcommandLiteral, SuiteLiteral, TransformKindLiteral
from .utils import coerce_complex, complex_pair, element_from_json, element_to_json

# --------------- Wire types
Complex = Annotated[
    complex, BeforeValidator(coerce_complex), PlainSerializer(complex_pair, return_type=list)
]
Element = Annotated[
    FunctionElement,
    BeforeValidator(element_from_json),
    PlainSerializer(element_to_json, return_type=dict),
]


class Payload(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ----------------------- Command payloads
class DeltaPayload(Payload):
    t: float
    a: Complex = 0j
    xi: Element = zero()
    kind: TransformKindLiteral = "S"


class ScaledDeltaPayload(Payload):
    eta: Element
    a: Complex = 0j
    z: Complex = 1 + 0j
    alpha: float = 0.0
    xi: Element = zero()
    kind: TransformKindLiteral = "S"


class ApproximantPayload(Payload):
    eta: Element
    n: PositiveInt
    z: Complex = 1 + 0j
    a: Complex = 0j
    alpha: float = 0.0
    xi: Element = zero()


class ProductFactorPayload(Payload):
    f: Element
    a: Complex = 0j


class ProductPayload(Payload):
    z: Complex = 1 + 0j
    alpha: float = 0.0
    factors: list[ProductFactorPayload] = Field(min_length=1)
    xi: Element = zero()
    oracle: bool = False


class SeriesPayload(Payload):
    z: Complex = 1 + 0j
    t: float = 1.0
    a: Complex = 0j
    xi: Element = zero()
    N: Optional[int] = Field(default=None, ge=0)


class ThetaPayload(Payload):
    rho: Complex = 0j
    tau: Complex = 1j
    tol: float = Field(default=1e-16, gt=0, lt=1)


class LocalTimePayload(Payload):
    t: float
    a: Complex
    xi: Element = zero()
    tol: Optional[PositiveFloat] = None


class ResidualGridPayload(Payload):
    phi_points: PositiveInt = 50
    t_points: PositiveInt = 50
    t_max: PositiveFloat = 1.0
    h: PositiveFloat = 1e-3


class CirclePayload(Payload):
    phi0: float = 0.0
    t: float = 1.0
    packet: dict[int, Complex]
    s: PositiveFloat = 1.0
    xi: Element = zero()
    residual: Optional[ResidualGridPayload] = None


class VerifyPayload(Payload):
    suite: SuiteLiteral
    trials: PositiveInt = 1000
    seed: int = 0


class OraclePayload(Payload):
    target: OracleTargetLiteral
    t: PositiveFloat = 1.0
    a: Complex = 0.5 + 0j
    xi: Element = zero()
    factors: list[ProductFactorPayload] = Field(default_factory=list)
    eps: PositiveFloat = 0.05
    samples: PositiveInt = 100_000
    steps: PositiveInt = 1000
    seed: int = 0
    workers: Optional[PositiveInt] = None


# ----------------------- Results and reports
class TransformResult(BaseModel):
    subcommand: SubcommandLiteral
    kind: TransformKindLiteral = "S"
    value: Complex
    extras: dict[str, Any] = Field(default_factory=dict)


class SuiteReport(BaseModel):
    suite: SuiteLiteral
    trials: int
    seed: int
    violations: int
    max_error: float
    verdict: bool


class DivergenceReport(BaseModel):
    diverges: bool
    message: str
    rho: Complex
    tau: Complex
    heat_kernel: Complex
    partial_sum_diverges: bool
    growth_exponent: float
    term_moduli: list[float]


class OracleReport(BaseModel):
    target: OracleTargetLiteral
    estimate: OracleEstimate
    reference: Complex
    bias_bound: float = 0.0
    agrees: bool


class ResidualManifest(BaseModel):
    data: str
    columns: list[str]
    axes: dict[str, str]
    h: float
    rows: int
    max_residual: float
