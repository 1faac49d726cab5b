"""JSON-friendly encodings for exact rational values."""

from __future__ import annotations

from fractions import Fraction


def fraction_fields(value: Fraction) -> dict:
    """Integer numerator/denominator plus a float convenience value.

    The decimal field is informational only; machine consumers should use
    the exact pair.
    """
    return {
        "numerator": value.numerator,
        "denominator": value.denominator,
        "decimal": float(value),
    }


def fraction_pair(value: Fraction) -> list[int]:
    return [value.numerator, value.denominator]
