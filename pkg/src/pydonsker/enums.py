class NormSign:
    positive = "positive"
    dual = "dual"


class GrowthStyle:
    order_two = "order-two"
    minimal_type = "minimal-type"


class TransformKind:
    s = "S"
    t = "T"


class OutputFormat:
    csv = "csv"
    json = "json"


class ExitCode:
    ok = 0
    failed = 1
    domain = 2
    numerical = 3


# ---------------- Random stream identifiers (first spawn-key entry)
class RandomStream:
    probes = 0
    pairings = 1
    paths = 2
