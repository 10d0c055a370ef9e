import re

from .exception import InvalidPayload
from .functions import (
    Combination,
    FunctionElement,
    HermiteSpan,
    Indicator,
    hermite_basis,
    indicator,
    zero,
)


# ---------------- Payload keys of serialized function elements
class ElementKey:
    zero = "zero"
    indicator = "indicator"
    hermite = "hermite"
    combo = "combo"


_HERMITE_SHORTHAND = re.compile(r"^e(\d+)$")


# ---------------- Complex numbers
def parse_complex(text: str) -> complex:
    """
    Parse `re+imi` (also `re`, `imi`, `-i`, `1e-3-2.5j`).

    Raises:
        InvalidPayload: If the text is not a complex literal
    """
    cleaned = text.strip().replace(" ", "")
    if cleaned[-1:] in ("i", "I"):
        cleaned = cleaned[:-1] + "j"

    try:
        return complex(cleaned)
    except ValueError:
        raise InvalidPayload(f"not a complex number: {text!r}") from None


def complex_pair(value: complex) -> list[float]:
    value = complex(value)
    return [value.real, value.imag]


def coerce_complex(value: object) -> complex:
    """Accept [re, im], `re+imi` strings and plain numbers."""
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        return parse_complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise InvalidPayload(f"expected [re, im], got {value!r}")


# ---------------- Function elements
def element_from_json(value: object) -> FunctionElement:
    """
    Decode a function element.

    Accepts "zero", "e<k>", {"indicator": [s, t]}, {"hermite": [[re, im], ...]}
    and {"combo": [[w, element], ...]}; elements pass through unchanged.

    Raises:
        InvalidPayload: If the value matches none of these shapes
    """
    if isinstance(value, FunctionElement):
        return value

    if isinstance(value, str):
        if value == ElementKey.zero:
            return zero()
        if match := _HERMITE_SHORTHAND.match(value):
            return hermite_basis(int(match.group(1)))
        raise InvalidPayload(f"unknown element shorthand {value!r}")

    if isinstance(value, dict) and len(value) == 1:
        key, body = next(iter(value.items()))
        if key == ElementKey.indicator:
            start, end = body
            return indicator(float(end), float(start))
        if key == ElementKey.hermite:
            return HermiteSpan(coeffs=tuple(coerce_complex(c) for c in body))
        if key == ElementKey.combo:
            return Combination(
                terms=tuple((coerce_complex(w), element_from_json(e)) for w, e in body)
            )

    raise InvalidPayload(f"cannot decode function element {value!r}")


def element_to_json(element: FunctionElement) -> dict:
    if isinstance(element, Indicator):
        return {ElementKey.indicator: [element.start, element.end]}
    if isinstance(element, HermiteSpan):
        return {ElementKey.hermite: [complex_pair(c) for c in element.coeffs]}
    if isinstance(element, Combination):
        return {
            ElementKey.combo: [[complex_pair(w), element_to_json(e)] for w, e in element.terms]
        }
    raise InvalidPayload(f"cannot encode {type(element).__name__}")
