from typing import Literal

# --------------- Types
NormSignLiteral = Literal["positive", "dual"]
GrowthStyleLiteral = Literal["order-two", "minimal-type"]
TransformKindLiteral = Literal["S", "T"]
OutputFormatLiteral = Literal["csv", "json"]
SuiteLiteral = Literal["homogeneity", "growth", "roundtrip", "sector", "series"]
OracleTargetLiteral = Literal["delta", "product", "localtime"]
SubcommandLiteral = Literal[
    "delta",
    "scaled-delta",
    "approximant",
    "product",
    "series",
    "theta",
    "localtime",
    "circle",
    "verify",
    "oracle",
]
