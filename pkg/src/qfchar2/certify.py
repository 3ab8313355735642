"""Representation certificates and the constructive one-variable algorithm.

A certificate witnesses ``scalar * prod_i form(vec_i) = target`` with exact
arithmetic; everything downstream (isotropy witnesses over residue fields,
polynomial membership reports) is built from verified certificates, and
verification never trusts the construction path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    CertificateInvalid,
    MixedFields,
    PreconditionViolated,
    Unsupported,
)
from . import factor as _factor
from .fields import (
    Field,
    FieldElement,
    FiniteField,
    RationalExt,
    coerce,
    describe,
    is_polynomial,
    pdeg,
    poly_coeffs,
    poly_divmod,
    rational_num_den,
    residue_field,
)
from .forms import QuadraticForm, dominance_search, iter_vectors, represent_value
from .isotropy import hyperbolic_pair, isotropy_ff, quad_ext_isotropy, witt_decompose


@dataclass(frozen=True, slots=True)
class RepresentationCertificate:
    """Vectors over an extension witnessing scalar * prod form(v_i) = target."""

    form: QuadraticForm
    target: FieldElement
    scalar: FieldElement
    vectors: tuple[tuple[FieldElement, ...], ...]

    @staticmethod
    def make(
        form: QuadraticForm,
        target: FieldElement,
        vectors: Sequence[Sequence],
        scalar=None,
    ) -> "RepresentationCertificate":
        E = target.field
        scal = coerce(scalar, form.field) if scalar is not None else form.field.one
        vecs = tuple(
            tuple(coerce(x, E) if isinstance(x, FieldElement) else (E.one if x % 2 else E.zero) for x in vec)
            for vec in vectors
        )
        for vec in vecs:
            if len(vec) != form.dim:
                raise MixedFields("vector length does not match the form dimension")
        return RepresentationCertificate(form, target, scal, vecs)

    @property
    def power(self) -> int:
        return len(self.vectors)

    def to_json(self) -> dict:
        return {
            "schema": "qfchar2.certificate/1",
            "field": describe(self.target.field),
            "base_field": describe(self.form.field),
            "form": str(self.form),
            "target": str(self.target),
            "scalar": str(self.scalar),
            "power": self.power,
            "vectors": [[str(x) for x in vec] for vec in self.vectors],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True, slots=True)
class VerificationResult:
    ok: bool
    residual: Optional[FieldElement]  # target / computed value when they differ

    def __bool__(self):
        return self.ok


def verify_certificate(cert: RepresentationCertificate) -> VerificationResult:
    """Exact re-evaluation of the certificate identity."""
    E = cert.target.field
    form_E = cert.form.extend_to(E) if cert.form.field != E else cert.form
    value = coerce(cert.scalar, E)
    for vec in cert.vectors:
        value = value * form_E.evaluate(list(vec))
    if value.equals(cert.target):
        return VerificationResult(True, None)
    if value.is_zero():
        return VerificationResult(False, None)
    return VerificationResult(False, cert.target / value)


def universal_vector(form: QuadraticForm, target: FieldElement) -> tuple[FieldElement, ...]:
    """One vector with form value equal to the target, for isotropic
    nondefective forms: shift along a hyperbolic pair."""
    v, u = hyperbolic_pair(form)
    E = target.field
    c = form.evaluate(u)
    shift = target + coerce(c, E)
    return tuple(shift * coerce(v[j], E) + coerce(u[j], E) for j in range(form.dim))


def one_vector(form: QuadraticForm) -> Optional[tuple[FieldElement, ...]]:
    return represent_value(form, form.field.one)


# ---------------------------------------------------------------------------
# Certificate -> isotropy witness over the residue field
# ---------------------------------------------------------------------------


def certificate_to_isotropy_witness(cert: RepresentationCertificate):
    """Isotropy witness of the form over F[X]/(target), from a certificate.

    The target must be monic irreducible in one variable over a finite
    base.  Vectors are cleared to polynomial entries, factors fully
    divisible by the target are stripped, and the factor whose value the
    target divides reduces to a nonzero residue vector with value zero.
    """
    if not verify_certificate(cert).ok:
        raise CertificateInvalid("certificate does not verify")
    f = cert.target
    R = f.field
    if not (isinstance(R, RationalExt) and isinstance(R.base, FiniteField) and is_polynomial(f)):
        raise Unsupported("witness extraction needs a polynomial target over a finite base")
    fpl = f.payload[0]
    B = R.base
    if not B.is_zero_p(B.add_p(fpl[-1], B.one_p())) or not _factor.is_irreducible(f):
        raise PreconditionViolated("the target must be monic irreducible")
    E, to_res, _from = residue_field(R, fpl)
    phi_E = cert.form.extend_to(E)
    vectors = []
    for vec in cert.vectors:
        cleared = _clear_denominators(R, vec)
        vectors.append(list(cleared))
    for _round in range(64):
        progress = False
        for i, vec in enumerate(vectors):
            if all(_divides(f, x) for x in vec) and any(not x.is_zero() for x in vec):
                vectors[i] = [poly_divmod(x, f)[0] if not x.is_zero() else x for x in vec]
                progress = True
        if not progress:
            break
    for vec in vectors:
        value = cert.form.extend_to(R).evaluate(vec) if cert.form.field != R else cert.form.evaluate(vec)
        if value.is_zero() or not _divides(f, value):
            continue
        res_vec = tuple(to_res(x.payload[0]) for x in vec)
        if all(x.is_zero() for x in res_vec):
            continue
        check = phi_E.evaluate(list(res_vec))
        if not check.is_zero():
            raise CertificateInvalid("reduced vector does not vanish (internal)")
        return E, res_vec
    raise CertificateInvalid("no factor reduces to a nonzero residue witness")


def _clear_denominators(R: RationalExt, vec) -> list[FieldElement]:
    den = R.one
    for x in vec:
        _n, d = rational_num_den(coerce(x, R))
        den = den * d
    return [coerce(x, R) * den for x in vec]


def _divides(p: FieldElement, x: FieldElement) -> bool:
    if x.is_zero():
        return True
    if not is_polynomial(x):
        return False
    return poly_divmod(x, p)[1].is_zero()


# ---------------------------------------------------------------------------
# Constructive representation of monic irreducibles (one variable)
# ---------------------------------------------------------------------------


def represent_irreducible(
    phi: QuadraticForm,
    f: FieldElement,
    pad_to: Optional[int] = None,
) -> Optional[RepresentationCertificate]:
    """Certificate f = prod phi(vec_i) with at most deg f factors, or None.

    None is exact NOT_REPRESENTABLE and happens precisely when phi stays
    anisotropic over the residue field of f.  The construction lifts a
    residue isotropy witness, divides out the cofactor, strips square
    factors shared by all coordinates, and recurses on the remaining
    irreducible cofactor factors, inverting their certificates entrywise.
    """
    R = f.field
    F = phi.field
    if not (isinstance(R, RationalExt) and R.base == F and isinstance(F, FiniteField)):
        raise PreconditionViolated("need a polynomial over the form's own finite field")
    if not is_polynomial(f):
        raise PreconditionViolated("the target must be a polynomial")
    fpl = f.payload[0]
    if pdeg(fpl) < 1 or not F.is_zero_p(F.add_p(fpl[-1], F.one_p())):
        raise PreconditionViolated("the target must be monic of degree >= 1")
    if not _factor.is_irreducible(f):
        raise PreconditionViolated("the target must be irreducible")
    if one_vector(phi) is None:
        raise PreconditionViolated("the form must represent 1")
    w = witt_decompose(phi)
    if w.i_d:
        raise PreconditionViolated("the form must be nondefective")
    E, _to_res, _from_res = residue_field(R, fpl)
    if isotropy_ff(phi.extend_to(E)) is None:
        return None
    if w.i_w > 0:
        cert = RepresentationCertificate.make(phi, f, [universal_vector(phi, f)])
    else:
        cert = _represent_anisotropic(phi, f)
    result = verify_certificate(cert)
    if not result.ok:
        raise CertificateInvalid("constructed certificate failed verification (internal)")
    if cert.power > pdeg(fpl):
        raise CertificateInvalid("certificate exceeds the degree bound (internal)")
    if pad_to is not None:
        cert = _pad_certificate(cert, pad_to)
    return cert


def _pad_certificate(cert: RepresentationCertificate, power: int) -> RepresentationCertificate:
    if power < cert.power:
        raise PreconditionViolated("cannot pad below the achieved power")
    ones = one_vector(cert.form)
    if ones is None:
        raise PreconditionViolated("padding needs the form to represent 1")
    E = cert.target.field
    pad = tuple(coerce(x, E) for x in ones)
    return RepresentationCertificate(
        cert.form, cert.target, cert.scalar, cert.vectors + (pad,) * (power - cert.power)
    )


def _represent_anisotropic(phi: QuadraticForm, f: FieldElement) -> RepresentationCertificate:
    R = f.field
    F = phi.field
    fpl = f.payload[0]
    d = pdeg(fpl)
    if d == 1:
        # the residue field is F itself; anisotropy there contradicts the
        # residue isotropy established by the caller
        raise CertificateInvalid("degree-1 target with anisotropic form (internal)")
    if d == 2:
        return _represent_quadratic(phi, f)
    E, to_res, from_res = residue_field(R, fpl)
    wit = isotropy_ff(phi.extend_to(E))
    assert wit is not None
    entries = [_lift(R, from_res(x)) for x in wit]
    value = phi.extend_to(R).evaluate(entries)
    assert not value.is_zero()
    rest, rem = poly_divmod(value, f)
    assert rem.is_zero()
    a = poly_coeffs(rest)[-1]
    h = rest / a
    entries, h = _strip_square_factors(phi, f, entries, h)
    # scalar vector from the top-degree coefficients
    alpha = _top_coefficient_vector(F, entries)
    a_check = phi.evaluate(list(alpha))
    assert a_check.equals(a), "leading coefficients cancelled for an anisotropic form"
    vectors: list[tuple] = [tuple(entries), tuple(coerce(x, R) / coerce(a, R) for x in alpha)]
    _lead, factors = _factor.factor_univariate(h)
    for p, mult in factors:
        sub = represent_irreducible(phi, p)
        if sub is None:
            raise CertificateInvalid("recursion hit a non-representable factor (internal)")
        inverted = _invert_vectors(sub, p)
        for _ in range(mult):
            vectors.extend(inverted)
    return RepresentationCertificate.make(phi, f, vectors)


def _lift(R: RationalExt, coeff_payloads: tuple) -> FieldElement:
    if not coeff_payloads:
        return R.zero
    return FieldElement(R, (coeff_payloads, (R.base.one_p(),)))


def _top_coefficient_vector(F: FiniteField, entries: list[FieldElement]) -> tuple[FieldElement, ...]:
    degs = []
    tops = []
    for x in entries:
        cs = poly_coeffs(x)
        degs.append(len(cs) - 1)
        tops.append(cs[-1] if cs else F.zero)
    dmax = max(degs)
    return tuple(tops[i] if degs[i] == dmax else F.zero for i in range(len(entries)))


def _strip_square_factors(phi, f, entries, h):
    R = f.field
    changed = True
    while changed:
        changed = False
        hpl = h.payload[0]
        if pdeg(hpl) == 0:
            break
        _lead, factors = _factor.factor_univariate(h)
        for p, mult in factors:
            if mult < 2:
                continue
            while mult >= 2 and all(_divides(p, x) for x in entries):
                entries = [poly_divmod(x, p)[0] if not x.is_zero() else x for x in entries]
                h = poly_divmod(h, p * p)[0]
                mult -= 2
                changed = True
        if changed:
            continue
        # entries may share a factor appearing once in h only through f; the
        # construction keeps degrees below deg f, so this cannot happen
        break
    return entries, h


def _represent_quadratic(phi: QuadraticForm, f: FieldElement) -> RepresentationCertificate:
    R = f.field
    F = phi.field
    fpl = f.payload[0]
    q0, p1 = FieldElement(F, fpl[0]), FieldElement(F, fpl[1])
    assert not p1.is_zero(), "inseparable quadratics are reducible over a perfect field"
    X = R.gen
    # try a one-factor certificate with linear entries first
    direct = _linear_entry_representation(phi, f)
    if direct is not None:
        return RepresentationCertificate.make(phi, f, [direct])
    c = q0 / (p1 * p1)
    res = quad_ext_isotropy(phi, c, "separable")
    if not res.isotropic:
        raise CertificateInvalid("quadratic case reached without residue isotropy (internal)")
    u, v = res.witness
    cprime = res.scalar
    xi = tuple(
        X * coerce(u[j], R) + coerce(p1 * cprime, R) * coerce(v[j], R) for j in range(phi.dim)
    )
    first = tuple(coerce(u[j], R) / coerce(cprime, R) for j in range(phi.dim))
    return RepresentationCertificate.make(phi, f, [first, xi])


def _linear_entry_representation(phi: QuadraticForm, f: FieldElement):
    """phi(alpha*X + beta) = f by matching the three coefficients."""
    R = f.field
    F = phi.field
    fpl = f.payload[0]
    q0 = FieldElement(F, fpl[0])
    p1 = FieldElement(F, fpl[1])
    X = R.gen
    n = phi.dim
    for alpha in iter_vectors(F, n):
        av = [FieldElement(F, x) for x in alpha]
        if not phi.evaluate(av).equals(F.one):
            continue
        for beta in iter_vectors(F, n):
            bv = [FieldElement(F, x) for x in beta]
            if not phi.evaluate(bv).equals(q0):
                continue
            if not phi.polar(av, bv).equals(p1):
                continue
            return tuple(X * coerce(av[j], R) + coerce(bv[j], R) for j in range(n))
    return None


def _invert_vectors(cert: RepresentationCertificate, p: FieldElement) -> list[tuple]:
    """Vectors for 1/p from a certificate for p: scale the first vector by 1/p."""
    R = p.field
    vectors = [tuple(coerce(x, R) for x in vec) for vec in cert.vectors]
    pinv = p.inv()
    vectors[0] = tuple(x * pinv for x in vectors[0])
    return vectors


# ---------------------------------------------------------------------------
# Reducible polynomials: the three-way membership report
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ConditionVerdict:
    status: str  # "true" | "false" | "undecided"
    basis: str  # "exact" | "certificate" | "bounded-absence" | "vacuous"
    note: str = ""

    @property
    def decided(self) -> bool:
        return self.status in ("true", "false") and self.basis in ("exact", "certificate")


@dataclass(frozen=True, slots=True)
class PolynomialMembershipReport:
    form: QuadraticForm
    target: FieldElement
    scalar: FieldElement
    square_part: FieldElement
    odd_factors: tuple[tuple[FieldElement, bool], ...]  # (factor, residue isotropy)
    conditions: dict
    certificate: Optional[RepresentationCertificate]
    factor_certificates: tuple
    consistent: bool

    def to_json(self) -> dict:
        return {
            "schema": "qfchar2.membership-report/1",
            "form": str(self.form),
            "target": str(self.target),
            "scalar": str(self.scalar),
            "square_part": str(self.square_part),
            "odd_factors": [
                {"factor": str(p), "residue_isotropic": ok} for p, ok in self.odd_factors
            ],
            "conditions": {
                k: {"status": v.status, "basis": v.basis, "note": v.note}
                for k, v in self.conditions.items()
            },
            "certificate": self.certificate.to_json() if self.certificate else None,
            "consistent": self.consistent,
        }


def analyze_polynomial(phi: QuadraticForm, f: FieldElement) -> PolynomialMembershipReport:
    """Cross-check the three equivalent descriptions of full-group membership.

    The target factors as scalar * (odd-multiplicity irreducibles) * square;
    condition "factorwise-isotropy" is decided exactly on every residue
    field, "factorwise-membership" adds the scalar's group membership and
    per-factor certificates, and "product-membership" assembles one
    certificate for the whole target when everything is available.
    Negative directions that would require unbounded search stay undecided.
    """
    from .valuegroups import group_closure_witnessed

    R = f.field
    F = phi.field
    if not (isinstance(R, RationalExt) and R.base == F and isinstance(F, FiniteField)):
        raise PreconditionViolated("need a polynomial over the form's own finite field")
    if f.is_zero() or not is_polynomial(f):
        raise PreconditionViolated("the target must be a nonzero polynomial")
    if one_vector(phi) is None or witt_decompose(phi).i_d:
        raise PreconditionViolated("the form must be nondefective and represent 1")
    lead, factors = _factor.factor_univariate(f)
    odd = [(p, mult) for p, mult in factors if mult % 2 == 1]
    square_part = R.one
    for p, mult in factors:
        square_part = square_part * p ** (mult // 2)
    closure = group_closure_witnessed(phi)
    scalar_ok = lead.payload in closure
    odd_verdicts: list[tuple[FieldElement, bool]] = []
    factor_certs: list[Optional[RepresentationCertificate]] = []
    for p, _mult in odd:
        cert_p = represent_irreducible(phi, p)
        odd_verdicts.append((p, cert_p is not None))
        factor_certs.append(cert_p)
    all_factors_ok = all(ok for _p, ok in odd_verdicts)
    conditions = {}
    conditions["factorwise-isotropy"] = ConditionVerdict(
        "true" if all_factors_ok else "false", "exact",
        note="isotropy over every odd-multiplicity residue field",
    )
    if scalar_ok and all_factors_ok:
        conditions["factorwise-membership"] = ConditionVerdict("true", "certificate")
    elif not scalar_ok:
        conditions["factorwise-membership"] = ConditionVerdict(
            "false", "exact", note="the leading coefficient lies outside the base value group"
        )
    else:
        conditions["factorwise-membership"] = ConditionVerdict(
            "undecided", "bounded-absence", note="a residue field stays anisotropic"
        )
    certificate = None
    if scalar_ok and all_factors_ok:
        vectors: list[tuple] = []
        for wit in closure[lead.payload]:
            vectors.append(tuple(coerce(x, R) for x in wit))
        for cert_p in factor_certs:
            assert cert_p is not None
            vectors.extend(tuple(coerce(x, R) for x in vec) for vec in cert_p.vectors)
        if not square_part.equals(R.one):
            ones = one_vector(phi)
            assert ones is not None
            vectors.append(tuple(square_part * coerce(x, R) for x in ones))
        if not vectors:
            ones = one_vector(phi)
            assert ones is not None
            vectors.append(tuple(coerce(x, R) for x in ones))
        certificate = RepresentationCertificate.make(phi, f, vectors)
        if not verify_certificate(certificate).ok:
            raise CertificateInvalid("assembled membership certificate failed (internal)")
        conditions["product-membership"] = ConditionVerdict("true", "certificate")
    else:
        conditions["product-membership"] = ConditionVerdict(
            "undecided", "bounded-absence",
            note="no certificate assembled; absence is not proved by bounded search",
        )
    consistent = _report_consistent(conditions)
    return PolynomialMembershipReport(
        phi,
        f,
        lead,
        square_part,
        tuple(odd_verdicts),
        conditions,
        certificate,
        tuple(factor_certs),
        consistent,
    )


def _report_consistent(conditions: dict) -> bool:
    decided = {k: v.status for k, v in conditions.items() if v.decided}
    if decided.get("product-membership") == "true" and decided.get("factorwise-isotropy") == "false":
        return False
    if decided.get("factorwise-membership") == "true" and decided.get("factorwise-isotropy") == "false":
        return False
    if decided.get("product-membership") == "true" and decided.get("factorwise-membership") == "false":
        return False
    return True
