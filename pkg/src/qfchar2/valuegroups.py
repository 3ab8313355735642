"""Represented-value sets, their products, and the groups they generate.

Over finite fields everything is materialized exactly.  Over rational
towers nothing infinite is materialized: bounded searches produce
certificates, and a handful of regimes (universal forms, quasilinear forms
of small dimension, binary norm-type forms over one-variable towers) admit
exact membership decisions used by the theorem checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import BudgetExceeded, MalformedCertificate, PreconditionViolated, Unsupported
from . import factor as _factor
from .fields import (
    Field,
    FieldElement,
    FiniteField,
    RationalExt,
    coerce,
    describe,
    enumerate_polynomials,
    is_polynomial,
    is_square,
    poly_coeffs,
    rational_num_den,
    residue_field,
    trace_class,
)
from .forms import QuadraticForm, represent_value, span_membership, value_set


@dataclass(frozen=True, slots=True, eq=False)
class ValueGroup:
    """A materialized subgroup of F* for a finite field F.

    Equality ignores the description: two groups are equal when they hold
    the same elements of the same field.
    """

    field: FiniteField
    description: str
    elements: frozenset[int]  # payloads

    def __contains__(self, x: FieldElement) -> bool:
        return coerce(x, self.field).payload in self.elements

    def as_elements(self) -> list[FieldElement]:
        return sorted((FieldElement(self.field, p) for p in self.elements), key=lambda e: e.sort_key())

    def __eq__(self, other):
        return isinstance(other, ValueGroup) and self.field == other.field and self.elements == other.elements

    def __hash__(self):
        return hash((self.field, self.elements))

    def __le__(self, other: "ValueGroup") -> bool:
        return self.elements <= other.elements


def nonzero_values(form: QuadraticForm) -> frozenset[int]:
    """D*: the nonzero represented values (payloads) over a finite field."""
    return frozenset(v for v in value_set(form) if v != 0)


def represented_set(form: QuadraticForm, k: int = 1) -> frozenset[int]:
    """The k-fold product set of nonzero represented values."""
    if k < 1:
        raise PreconditionViolated("the power k must be >= 1")
    F = form.field
    base = nonzero_values(form)
    acc = base
    for _ in range(k - 1):
        acc = frozenset(F.mul_p(a, b) for a in acc for b in base)
    return acc


def group_closure(values: Sequence, field: FiniteField) -> frozenset[int]:
    """Smallest multiplicative subgroup of F* containing the values."""
    gens = {v.payload if isinstance(v, FieldElement) else v for v in values}
    gens.discard(0)
    if not gens:
        raise PreconditionViolated("group closure needs a nonempty set of units")
    group = {field.one_p()}
    frontier = set(gens)
    while frontier:
        new = set()
        for g in frontier:
            for h in group | gens:
                prod = field.mul_p(g, h)
                if prod not in group:
                    new.add(prod)
        group |= frontier
        frontier = new - group
    return frozenset(group)


def generated_group(form: QuadraticForm, k: int = 1, description: str = "") -> ValueGroup:
    """The subgroup of F* generated by the k-fold value products."""
    F = form.field
    els = group_closure(represented_set(form, k), F)
    return ValueGroup(F, description or f"<D*({form})^{k}>", els)


@dataclass(frozen=True, slots=True)
class ValueGroupAudit:
    form: QuadraticForm
    scalar: FieldElement
    squares: ValueGroup
    power_set: frozenset[int]
    square_product_group: ValueGroup  # generated by D*^2
    full_group: ValueGroup  # generated by D*
    scaling_invariance: bool
    chain_holds: bool
    scaled_group_match: bool

    @property
    def all_hold(self) -> bool:
        return self.scaling_invariance and self.chain_holds and self.scaled_group_match


def value_group_audit(form: QuadraticForm, c: FieldElement) -> ValueGroupAudit:
    """Materialize the square/value-group chain and its scaling laws.

    Checks, exactly over the finite field: (a) the group generated by the
    squared value set does not move under scaling the form by any unit,
    (b) the chain F*^2 <= D*^2 <= <D*^2> <= <D*> <= F*, and (c) scaling by a
    represented value c turns the full value group of c*form into the
    squared-value group of form.
    """
    F = form.field
    c = coerce(c, F)
    dstar = nonzero_values(form)
    if c.payload not in dstar:
        raise PreconditionViolated("the scalar must be a nonzero represented value")
    squares = frozenset(F.mul_p(x, x) for x in F.iter_payloads() if x != 0)
    d2 = represented_set(form, 2)
    ng = group_closure(d2, F)
    tg = group_closure(dstar, F)
    fstar = frozenset(x for x in F.iter_payloads() if x != 0)
    scaling = all(
        group_closure(represented_set(form.scale(FieldElement(F, u)), 2), F) == ng
        for u in fstar
    )
    chain = squares <= d2 <= ng <= tg <= fstar
    scaled_match = group_closure(represented_set(form.scale(c), 1), F) == ng
    return ValueGroupAudit(
        form,
        c,
        ValueGroup(F, "F*^2", squares),
        d2,
        ValueGroup(F, "<D*^2>", ng),
        ValueGroup(F, "<D*>", tg),
        scaling,
        chain,
        scaled_match,
    )


def represented_values_with_witnesses(form: QuadraticForm) -> dict[int, tuple[FieldElement, ...]]:
    """Nonzero values with their least representing vectors."""
    out = {}
    for v in sorted(nonzero_values(form)):
        wit = represent_value(form, FieldElement(form.field, v))
        out[v] = wit
    return out


def group_closure_witnessed(
    form: QuadraticForm,
) -> dict[int, tuple[tuple[FieldElement, ...], ...]]:
    """Each element of <D*> with an explicit product of representing vectors."""
    F = form.field
    gens = represented_values_with_witnesses(form)
    known: dict[int, tuple] = {F.one_p(): ()}  # empty product is 1
    frontier = list(known)
    while frontier:
        nxt = []
        for g in frontier:
            for v, wit in gens.items():
                prod = F.mul_p(g, v)
                if prod not in known:
                    known[prod] = known[g] + (wit,)
                    nxt.append(prod)
        frontier = nxt
    return known


# ---------------------------------------------------------------------------
# Exact membership tiers over supported extensions
# ---------------------------------------------------------------------------


def constant_part(form: QuadraticForm) -> Optional[QuadraticForm]:
    """The same form with entries pushed down to the bottom finite field."""
    bottom = form.field.bottom()
    if not isinstance(bottom, FiniteField):
        return None
    try:
        planes = tuple((_push_down(a, bottom), _push_down(b, bottom)) for a, b in form.planes)
        diagonal = tuple(_push_down(c, bottom) for c in form.diagonal)
    except Unsupported:
        return None
    return QuadraticForm(bottom, planes, diagonal)


def _push_down(x: FieldElement, bottom: FiniteField) -> FieldElement:
    cur = x
    while cur.field != bottom:
        F = cur.field
        if isinstance(F, RationalExt):
            num, den = cur.payload
            if len(num) > 1 or len(den) > 1:
                raise Unsupported("entry is not constant")
            cur = FieldElement(F.base, num[0]) if num else F.base.zero
        else:
            raise Unsupported("entry is not constant")
    return cur


def decide_membership(form: QuadraticForm, g: FieldElement, mode: str = "full-group") -> Optional[bool]:
    """Exact membership of g in a value set of the form, when decidable.

    ``mode`` is one of "power-1", "power-2", "square-product-group" and
    "full-group".  Returns True/False for an exact decision and None when
    no supported regime applies.  Supported regimes: finite fields
    (materialized), universal forms (positive Witt index over the bottom
    field), quasilinear forms of dimension <= 2 over towers (value spans are
    fields), and binary norm-type forms over one-variable towers (odd-factor
    criterion on the residue fields).
    """
    F = form.field
    if g.is_zero():
        return False
    g = coerce(g, F)
    if isinstance(F, FiniteField):
        sets = {
            "power-1": represented_set(form, 1),
            "power-2": represented_set(form, 2),
            "square-product-group": group_closure(represented_set(form, 2), F),
            "full-group": group_closure(represented_set(form, 1), F),
        }
        return g.payload in sets[mode]
    base_form = constant_part(form)
    if base_form is not None and isinstance(base_form.field, FiniteField):
        from .isotropy import witt_decompose

        w = witt_decompose(base_form)
        if w.i_w > 0:
            return True  # hyperbolic subform represents everything
    if form.is_quasilinear():
        return _quasilinear_membership(form, g, mode)
    if base_form is not None and len(base_form.planes) == 1 and not base_form.diagonal:
        return _norm_type_membership(form, base_form, g, mode)
    return None


def _quasilinear_membership(form: QuadraticForm, g: FieldElement, mode: str) -> Optional[bool]:
    gens = [c for c in form.diagonal if not c.is_zero()]
    if not gens:
        return False
    if len(gens) == 1:
        c = gens[0]
        if mode == "power-1":
            return is_square(g / c) is not None
        if mode == "power-2":
            return is_square(g / (c * c)) is not None
        return is_square(g) is not None or is_square(g / c) is not None
    if len(gens) == 2:
        # the value span of a binary quasilinear diagonal is a field, so the
        # power sets and both generated groups all coincide with the span
        return span_membership(gens, g) is not None
    return None


def _norm_type_membership(
    form: QuadraticForm, base_form: QuadraticForm, g: FieldElement, mode: str
) -> Optional[bool]:
    """Membership for a binary nonsingular form: its value set is the norm
    group of a separable quadratic extension, hence one multiplicative
    group for every mode.  Over a one-variable tower the odd-multiplicity
    factor criterion decides exactly."""
    from .isotropy import isotropy_ff

    F = form.field
    Fbase = base_form.field
    if isotropy_ff(base_form) is not None:
        return True
    if not (isinstance(F, RationalExt) and isinstance(F.base, FiniteField)):
        return None
    num, den = rational_num_den(g)
    parities: dict[tuple, int] = {}
    for part in (num, den):
        _lead, factors = _factor.factor_univariate(part)
        for p, mult in factors:
            key = p.payload[0]
            parities[key] = (parities.get(key, 0) + mult) % 2
    for key, parity in parities.items():
        if parity == 0:
            continue
        E, to_res, _from = residue_field(F, key)
        res_form = base_form.extend_to(E)
        if isotropy_ff(res_form) is None:
            return False
    # leading unit lies in F*, which the norm group of a finite field covers
    return True


# ---------------------------------------------------------------------------
# Bounded membership search (certificates live in the certify module)
# ---------------------------------------------------------------------------


def membership_bounded(
    f: FieldElement,
    form: QuadraticForm,
    k: int = 1,
    degree_bound: int = 4,
    budget: int = 2_000_000,
):
    """A verified certificate for f in D*(form)^k with bounded-degree vectors.

    Denominators are cleared up front: candidate vectors have polynomial
    entries, and a leftover square factor between the product and the
    target is folded into the first vector.  None means absent-within-bound.
    """
    from .certify import RepresentationCertificate, universal_vector, verify_certificate

    E = f.field
    if not isinstance(E, RationalExt):
        raise Unsupported("bounded membership runs over rational extensions")
    if k < 1:
        raise PreconditionViolated("the power k must be >= 1")
    form_E = form.extend_to(E) if form.field != E else form
    base_form = constant_part(form_E)

    def finish(vectors) -> Optional[RepresentationCertificate]:
        cert = RepresentationCertificate.make(form, f, vectors)
        return cert if verify_certificate(cert).ok else None

    # universal forms: one explicit vector, padded with unit vectors
    if base_form is not None:
        from .isotropy import witt_decompose

        w = witt_decompose(base_form)
        if w.i_w > 0:
            vec = universal_vector(base_form, f)
            pads = _unit_pad(base_form, E, k - 1)
            if pads is not None:
                cert = finish([vec] + pads)
                if cert is not None:
                    return cert
    # exhaustive bounded search
    pool = list(enumerate_polynomials(E, degree_bound))
    count = 0
    for combo in itertools.product(pool, repeat=form_E.dim * k):
        count += 1
        if count > budget:
            raise BudgetExceeded("bounded membership budget exhausted")
        vectors = [combo[i * form_E.dim : (i + 1) * form_E.dim] for i in range(k)]
        prod = E.one
        dead = False
        for vec in vectors:
            val = form_E.evaluate(list(vec))
            if val.is_zero():
                dead = True
                break
            prod = prod * val
        if dead:
            continue
        ratio = prod / f
        root = is_square(ratio)
        if root is None or root.is_zero():
            continue
        vectors = [tuple(x / root for x in vectors[0])] + [tuple(v) for v in vectors[1:]]
        cert = finish(vectors)
        if cert is not None:
            return cert
    return None


def _unit_pad(base_form: QuadraticForm, E: Field, count: int) -> Optional[list[tuple]]:
    if count == 0:
        return []
    one_vec = represent_value(base_form, base_form.field.one)
    if one_vec is None:
        return None
    lifted = tuple(coerce(x, E) for x in one_vec)
    return [lifted] * count


def leading_coeff_reduce(cert):
    """Certificate for the leading coefficient of the target over the base.

    Requires scalar 1 and polynomial-entry vectors: picks the top-degree
    coefficient vector of each factor, so the output length equals the
    input length.  The result is re-verified; a cancellation (possible only
    for isotropic forms) is reported as malformed rather than patched.
    """
    from .certify import RepresentationCertificate, verify_certificate

    form = cert.form
    F = form.field
    if not cert.scalar.equals(F.one):
        raise MalformedCertificate("normalize the scalar to 1 before reducing")
    if not is_polynomial(cert.target):
        raise MalformedCertificate("the target must be a polynomial")
    target_num, _target_den = rational_num_den(cert.target)
    alphas = []
    for vec in cert.vectors:
        degs = []
        coeffs_per_entry = []
        for x in vec:
            if not is_polynomial(x):
                raise MalformedCertificate("entries must be polynomials")
            cs = poly_coeffs(x)
            coeffs_per_entry.append(cs)
            degs.append(len(cs) - 1)
        top = max(degs)
        alpha = tuple(
            coeffs_per_entry[i][-1] if degs[i] == top and degs[i] >= 0 else F.zero
            for i in range(len(vec))
        )
        alphas.append(alpha)
    lead = poly_coeffs(target_num)[-1]
    reduced = RepresentationCertificate.make(form, lead, alphas)
    if not verify_certificate(reduced).ok:
        raise MalformedCertificate("top-coefficient vectors cancel; cannot reduce")
    return reduced
