"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` so the CLI can map failures to
deterministic exit statuses and machine-readable reports.
"""

from __future__ import annotations


class QFError(Exception):
    """Base class for all package errors."""

    code = "error"


class DivisionByZero(QFError):
    code = "division-by-zero"


class MixedFields(QFError):
    """Operands belong to incompatible field descriptors."""

    code = "mixed-fields"


class PrecisionExhausted(QFError):
    """A truncated Laurent computation touched unknown coefficients."""

    code = "precision-exhausted"


class UnsupportedField(QFError):
    code = "unsupported-field"


class Unsupported(QFError):
    """Requested operation is outside the supported regimes."""

    code = "unsupported"


class ZeroPolynomial(QFError):
    code = "zero-polynomial"


class NotPolynomial(QFError):
    """A rational element with nontrivial denominator where a polynomial is required."""

    code = "not-polynomial"


class ZeroValuation(QFError):
    """Valuation of the zero element is undefined."""

    code = "zero-valuation"


class NegativeValuationResidue(QFError):
    code = "negative-valuation-residue"


class BudgetExceeded(QFError):
    code = "budget-exceeded"


class DimensionMismatch(QFError):
    code = "dimension-mismatch"


class ZeroScale(QFError):
    code = "zero-scale"


class PreconditionViolated(QFError):
    code = "precondition-violated"


class CertificateInvalid(QFError):
    code = "certificate-invalid"


class MalformedCertificate(QFError):
    code = "malformed-certificate"


class ParseError(QFError):
    """Syntax error with position and expected-token information."""

    code = "parse-error"

    def __init__(self, message: str, position: int, expected: str | None = None):
        super().__init__(message)
        self.position = position
        self.expected = expected


class UnknownVariable(ParseError):
    code = "unknown-variable"


class WrongField(QFError):
    code = "wrong-field"
