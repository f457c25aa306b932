"""
Exact rational helpers
JSON codec for Fraction values and the bridge from solver floats to fractions
"""

from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Union

from errors import ParameterError

RationalLike = Union[Fraction, int, str]


def to_fraction(value: RationalLike) -> Fraction:
    """Accept Fraction, int or a 'p/q' string; floats are rejected"""
    if isinstance(value, bool) or isinstance(value, float):
        raise ParameterError(f"expected an exact rational, got {value!r}")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ParameterError(f"not a rational number: {value!r}")


def fraction_to_pair(value: Fraction) -> List[str]:
    """[num, den] with both as decimal strings"""
    return [str(value.numerator), str(value.denominator)]


def fraction_from_pair(pair) -> Fraction:
    try:
        num, den = pair
        return Fraction(int(num), int(den))
    except (TypeError, ValueError, ZeroDivisionError):
        raise ParameterError(f"rational must be a [num, den] pair, got {pair!r}")


def fraction_to_json(value: Fraction) -> Dict[str, str]:
    return {"num": str(value.numerator), "den": str(value.denominator)}


def fraction_from_json(data: Mapping) -> Fraction:
    try:
        return Fraction(int(data["num"]), int(data["den"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError):
        raise ParameterError(f"rational must carry num/den strings, got {data!r}")


def format_fraction(value: Fraction) -> str:
    """'1/3', '-1/42' or '0'"""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rationalize(value: float, cap: int) -> Fraction:
    """Closest fraction with denominator at most cap (continued-fraction rounding)"""
    return Fraction(value).limit_denominator(cap)


def rationalize_weights(values: Mapping[Hashable, float], cap: int, tolerance: float) -> Dict[Hashable, Fraction]:
    """
    Turn float weights into an exact distribution.

    Entries below -tolerance are rejected, small negatives clipped to zero, the rest
    rounded with rationalize and divided by their exact sum. Zero entries are dropped.

    Raises:
        ParameterError: on a clearly negative entry or a zero total
    """
    rounded = {}
    for key, value in values.items():
        if value < -tolerance:
            raise ParameterError(f"weight {value} is below -{tolerance}")
        fraction = rationalize(max(value, 0.0), cap)
        if fraction > 0:
            rounded[key] = fraction
    total = sum(rounded.values(), Fraction(0))
    if total == 0:
        raise ParameterError("all weights rounded to zero")
    return {key: fraction / total for key, fraction in rounded.items()}
