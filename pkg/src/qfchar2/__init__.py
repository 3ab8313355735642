"""Exact quadratic-form arithmetic over characteristic-2 field towers."""

from .fields import (
    GF,
    FieldElement,
    FiniteField,
    LaurentExt,
    Place,
    RationalExt,
    adic_place,
    coerce,
    describe,
    laurent,
    rational,
)

__version__ = "0.1.0"

__all__ = [
    "GF",
    "FieldElement",
    "FiniteField",
    "LaurentExt",
    "Place",
    "RationalExt",
    "adic_place",
    "coerce",
    "describe",
    "laurent",
    "rational",
    "__version__",
]
