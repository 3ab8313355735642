"""Quadratic forms over characteristic-2 fields.

A form is stored as its generic block presentation: a list of nonsingular
planes [a,b] (the polynomial a*X^2 + X*Y + b*Y^2) and a quasilinear diagonal
<c_1,...,c_s>.  No implicit normalization happens at construction; Witt
reduction is an explicit operation of the isotropy module.

Scaling stores c*[a,b] as [c*a, b/c], which is isometric to the value-scaled
plane; all downstream logic works with value sets, never literal plane
coefficients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    MixedFields,
    Unsupported,
    ZeroScale,
)
from .fields import (
    Field,
    FieldElement,
    FiniteField,
    RationalExt,
    coerce,
    describe,
    two_basis_decompose,
)


def _coerce_entry(field: Field, x) -> FieldElement:
    if isinstance(x, int):
        return field.one if x % 2 else field.zero
    return coerce(x, field)


@dataclass(frozen=True, slots=True)
class QuadraticForm:
    field: Field
    planes: tuple[tuple[FieldElement, FieldElement], ...] = ()
    diagonal: tuple[FieldElement, ...] = ()

    @staticmethod
    def make(field: Field, planes: Iterable = (), diagonal: Iterable = ()) -> "QuadraticForm":
        ps = tuple((_coerce_entry(field, a), _coerce_entry(field, b)) for a, b in planes)
        ds = tuple(_coerce_entry(field, c) for c in diagonal)
        return QuadraticForm(field, ps, ds)

    @property
    def dim(self) -> int:
        return 2 * len(self.planes) + len(self.diagonal)

    @property
    def type(self) -> tuple[int, int]:
        return (len(self.planes), len(self.diagonal))

    def classification(self) -> str:
        r, s = self.type
        if r == 0 and s == 0:
            return "zero"
        if r > 0 and s == 0:
            return "nonsingular"
        if r > 0 and s > 0:
            return "semisingular"
        return "quasilinear"

    def is_quasilinear(self) -> bool:
        return not self.planes

    # -- evaluation ---------------------------------------------------------
    def evaluate(self, vec: Sequence) -> FieldElement:
        if len(vec) != self.dim:
            raise DimensionMismatch(f"expected {self.dim} coordinates, got {len(vec)}")
        entries = [_coerce_entry(self.field, v) if isinstance(v, int) else v for v in vec]
        target = self.field
        for e in entries:
            if e.field != target and _extends(e.field, target):
                target = e.field
        entries = [coerce(e, target) for e in entries]
        acc = target.zero
        i = 0
        for a, b in self.planes:
            x, y = entries[i], entries[i + 1]
            acc = acc + coerce(a, target) * x * x + x * y + coerce(b, target) * y * y
            i += 2
        for c in self.diagonal:
            z = entries[i]
            acc = acc + coerce(c, target) * z * z
            i += 1
        return acc

    def polar(self, u: Sequence, v: Sequence) -> FieldElement:
        if len(u) != self.dim or len(v) != self.dim:
            raise DimensionMismatch("polar form needs two vectors of the right dimension")
        entries_u = [_coerce_entry(self.field, x) if isinstance(x, int) else x for x in u]
        entries_v = [_coerce_entry(self.field, x) if isinstance(x, int) else x for x in v]
        target = self.field
        for e in entries_u + entries_v:
            if e.field != target and _extends(e.field, target):
                target = e.field
        eu = [coerce(e, target) for e in entries_u]
        ev = [coerce(e, target) for e in entries_v]
        acc = target.zero
        i = 0
        for _a, _b in self.planes:
            acc = acc + eu[i] * ev[i + 1] + eu[i + 1] * ev[i]
            i += 2
        return acc

    # -- composition --------------------------------------------------------
    def __add__(self, other: "QuadraticForm") -> "QuadraticForm":
        if other.field != self.field:
            raise MixedFields("direct sum needs both forms over one field")
        return QuadraticForm(self.field, self.planes + other.planes, self.diagonal + other.diagonal)

    def scale(self, c) -> "QuadraticForm":
        c = _coerce_entry(self.field, c)
        if c.is_zero():
            raise ZeroScale("cannot scale a form by zero")
        cinv = c.inv()
        planes = tuple((c * a, cinv * b) for a, b in self.planes)
        diagonal = tuple(c * d for d in self.diagonal)
        return QuadraticForm(self.field, planes, diagonal)

    def extend_to(self, E: Field) -> "QuadraticForm":
        planes = tuple((coerce(a, E), coerce(b, E)) for a, b in self.planes)
        diagonal = tuple(coerce(c, E) for c in self.diagonal)
        return QuadraticForm(E, planes, diagonal)

    def polynomial_in(self, variables: Sequence[FieldElement]) -> FieldElement:
        """The defining polynomial evaluated on fresh variables of a tower."""
        return self.evaluate(list(variables))

    def sort_key(self):
        return (
            self.type,
            tuple((a.sort_key(), b.sort_key()) for a, b in self.planes),
            tuple(c.sort_key() for c in self.diagonal),
        )

    def __str__(self):
        parts = [f"[{a},{b}]" for a, b in self.planes]
        if self.diagonal:
            parts.append("<" + ",".join(str(c) for c in self.diagonal) + ">")
        return "+".join(parts) if parts else "0"

    def __repr__(self):
        return f"<form {self} over {describe(self.field)}>"


def _extends(big: Field, small: Field) -> bool:
    f: Optional[Field] = big
    while f is not None:
        if f == small:
            return True
        f = f.base
    return False


def hyperbolic_plane(field: Field) -> QuadraticForm:
    return QuadraticForm.make(field, planes=[(0, 0)])


def zero_form(field: Field) -> QuadraticForm:
    return QuadraticForm(field)


def type_of(form: QuadraticForm) -> tuple[tuple[int, int], str]:
    return form.type, form.classification()


@dataclass(frozen=True, slots=True)
class BilinearPfister:
    """n-fold bilinear Pfister form given by its slot entries (all nonzero)."""

    field: Field
    entries: tuple[FieldElement, ...] = ()

    @staticmethod
    def make(field: Field, entries: Iterable) -> "BilinearPfister":
        es = tuple(_coerce_entry(field, e) for e in entries)
        if any(e.is_zero() for e in es):
            raise ZeroScale("Pfister slot entries must be invertible")
        return BilinearPfister(field, es)

    @property
    def fold(self) -> int:
        return len(self.entries)

    def subset_products(self) -> list[FieldElement]:
        """Products over subsets in binary-counter order (bit i = entry i)."""
        out = []
        for mask in range(1 << self.fold):
            acc = self.field.one
            for i, e in enumerate(self.entries):
                if (mask >> i) & 1:
                    acc = acc * e
            out.append(acc)
        return out

    def multiply(self, form: QuadraticForm) -> QuadraticForm:
        if form.field != self.field:
            raise MixedFields("Pfister multiple needs matching fields")
        acc = zero_form(self.field)
        for c in self.subset_products():
            acc = acc + (form if c.equals(self.field.one) else form.scale(c))
        return acc

    def __str__(self):
        return "pf(" + ",".join(str(e) for e in self.entries) + ")"


def pfister_multiply(pi: BilinearPfister, form: QuadraticForm) -> QuadraticForm:
    return pi.multiply(form)


# ---------------------------------------------------------------------------
# Gram presentation: working with forms on explicit bases
# ---------------------------------------------------------------------------


def unit_vectors(form: QuadraticForm) -> list[list[FieldElement]]:
    n = form.dim
    F = form.field
    return [[F.one if j == i else F.zero for j in range(n)] for i in range(n)]


def blocks_from_vectors(form: QuadraticForm, vectors: list[list[FieldElement]]):
    """Re-express ``form`` restricted to the span of ``vectors`` as blocks.

    Runs the pairing reduction: repeatedly pick the least pair with nonzero
    polar value, normalize it into a plane, correct the rest into the
    orthogonal complement.  Returns ``(blocks_form, block_vectors)`` where
    ``block_vectors[i]`` (a vector in the ambient coordinates of ``form``)
    realizes coordinate i of the block presentation.
    """
    F = form.field
    vecs = [list(v) for v in vectors]
    plane_vecs: list[list[FieldElement]] = []
    planes = []
    while True:
        pair = None
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                if not form.polar(vecs[i], vecs[j]).is_zero():
                    pair = (i, j)
                    break
            if pair:
                break
        if pair is None:
            break
        i, j = pair
        u = vecs[i]
        c = form.polar(u, vecs[j])
        v = [x / c for x in vecs[j]]
        rest = []
        for k, w in enumerate(vecs):
            if k in (i, j):
                continue
            bu = form.polar(w, u)
            bv = form.polar(w, v)
            rest.append([w[t] + bv * u[t] + bu * v[t] for t in range(len(w))])
        planes.append((form.evaluate(u), form.evaluate(v)))
        plane_vecs.extend([u, v])
        vecs = rest
    diagonal = tuple(form.evaluate(w) for w in vecs)
    blocks = QuadraticForm(F, tuple(planes), diagonal)
    return blocks, plane_vecs + vecs


# ---------------------------------------------------------------------------
# Exact value machinery over finite fields
# ---------------------------------------------------------------------------


def _finite(form: QuadraticForm) -> FiniteField:
    if not isinstance(form.field, FiniteField):
        raise Unsupported("this operation needs a finite base field")
    return form.field


def _block_tables(form: QuadraticForm):
    """Per block: (coords, {value: least coord tuple}, {value reachable with a
    nonzero coordinate tuple: least such tuple})."""
    F = _finite(form)
    tables = []
    for a, b in form.planes:
        any_t: dict[int, tuple] = {}
        nz_t: dict[int, tuple] = {}
        ap, bp = a.payload, b.payload
        for x in F.iter_payloads():
            ax2 = F.mul_p(ap, F.mul_p(x, x))
            for y in F.iter_payloads():
                val = ax2 ^ F.mul_p(x, y) ^ F.mul_p(bp, F.mul_p(y, y))
                key = (x, y)
                if val not in any_t:
                    any_t[val] = key
                if key != (0, 0) and val not in nz_t:
                    nz_t[val] = key
        tables.append((2, any_t, nz_t))
    for c in form.diagonal:
        any_t, nz_t = {}, {}
        cp = c.payload
        for z in F.iter_payloads():
            val = F.mul_p(cp, F.mul_p(z, z))
            if val not in any_t:
                any_t[val] = (z,)
            if z != 0 and val not in nz_t:
                nz_t[val] = (z,)
        tables.append((1, any_t, nz_t))
    return tables


def value_set(form: QuadraticForm) -> frozenset[int]:
    """All values of the form over its finite field (payloads; contains 0)."""
    F = _finite(form)
    acc = {0}
    for _w, any_t, _nz in _block_tables(form):
        acc = {F.add_p(a, v) for a in acc for v in any_t}
    return frozenset(acc)


def represent_value(form: QuadraticForm, target: FieldElement, nonzero_vector: bool = False):
    """Lexicographically least vector (payload order) with the given value.

    With ``nonzero_vector`` the all-zero vector is excluded, which makes
    ``represent_value(form, 0, nonzero_vector=True)`` the isotropy search.
    Returns a tuple of FieldElements or None; the search is exact.
    """
    F = _finite(form)
    tables = _block_tables(form)
    n_blocks = len(tables)
    # suffix value sets, with and without the nonzero-coordinate requirement
    suffix_any = [frozenset({0})] * (n_blocks + 1)
    suffix_nz = [frozenset()] * (n_blocks + 1)
    for i in range(n_blocks - 1, -1, -1):
        _w, any_t, nz_t = tables[i]
        nxt_any, nxt_nz = suffix_any[i + 1], suffix_nz[i + 1]
        suffix_any[i] = frozenset({F.add_p(a, v) for a in nxt_any for v in any_t})
        via_here = {F.add_p(a, v) for a in nxt_any for v in nz_t}
        via_rest = {F.add_p(a, v) for a in nxt_nz for v in any_t}
        suffix_nz[i] = frozenset(via_here | via_rest)
    want = target.payload if isinstance(target, FieldElement) else target
    if nonzero_vector:
        if want not in suffix_nz[0]:
            return None
    elif want not in suffix_any[0]:
        return None
    coords: list[int] = []
    need_nz = nonzero_vector
    rest = want
    for i, (width, any_t, nz_t) in enumerate(tables):
        chosen = None
        for key in _block_keys(F, width):
            val = _block_value(F, form, i, key)
            remainder = F.add_p(rest, val)
            still_nz = need_nz and key == (0,) * width
            pool = suffix_nz[i + 1] if still_nz else suffix_any[i + 1]
            if remainder in pool:
                chosen = key
                need_nz = still_nz
                rest = remainder
                break
        assert chosen is not None
        coords.extend(chosen)
    return tuple(FieldElement(F, c) for c in coords)


def _block_keys(F: FiniteField, width: int):
    if width == 1:
        return [(z,) for z in F.iter_payloads()]
    return [(x, y) for x in F.iter_payloads() for y in F.iter_payloads()]


def _block_value(F: FiniteField, form: QuadraticForm, block_index: int, key: tuple) -> int:
    r = len(form.planes)
    if block_index < r:
        a, b = form.planes[block_index]
        x, y = key
        return F.mul_p(a.payload, F.mul_p(x, x)) ^ F.mul_p(x, y) ^ F.mul_p(b.payload, F.mul_p(y, y))
    c = form.diagonal[block_index - r]
    (z,) = key
    return F.mul_p(c.payload, F.mul_p(z, z))


def iter_vectors(field: FiniteField, n: int):
    """All payload vectors of length n in lexicographic order."""
    return itertools.product(field.iter_payloads(), repeat=n)


# ---------------------------------------------------------------------------
# Dominance / subform search over finite fields
# ---------------------------------------------------------------------------


def _gram_data(form: QuadraticForm):
    units = unit_vectors(form)
    q = [form.evaluate(u) for u in units]
    b = [[form.polar(units[i], units[j]) for j in range(form.dim)] for i in range(form.dim)]
    return q, b


def _rank_append(F: FiniteField, basis: list[list[int]], vec: list[int]) -> Optional[list[list[int]]]:
    """Gaussian basis update; None when vec is dependent."""
    v = list(vec)
    for row in basis:
        piv = next(i for i, x in enumerate(row) if x != 0)
        if v[piv] != 0:
            coef = F.mul_p(v[piv], F.inv_p(row[piv]))
            v = [F.add_p(v[i], F.mul_p(coef, row[i])) for i in range(len(v))]
    if all(x == 0 for x in v):
        return None
    return basis + [v]


def dominance_search(
    sigma: QuadraticForm,
    phi: QuadraticForm,
    budget: int = 2_000_000,
) -> Optional[list[tuple[FieldElement, ...]]]:
    """Injective matrix witness (as columns) embedding sigma into phi, or None.

    The witness M satisfies phi(M x) = sigma(x) as polynomials; columns are
    found by backtracking in lexicographic payload order, so the result is
    deterministic.
    """
    F = _finite(phi)
    if sigma.field != phi.field:
        raise MixedFields("dominance search needs both forms over one field")
    if sigma.dim > phi.dim:
        return None
    sq, sb = _gram_data(sigma)
    n = phi.dim
    m = sigma.dim
    budget_left = [budget]

    def extend(cols: list[tuple[int, ...]], basis: list[list[int]]):
        i = len(cols)
        if i == m:
            return list(cols)
        want_q = sq[i].payload
        for cand in iter_vectors(F, n):
            budget_left[0] -= 1
            if budget_left[0] < 0:
                raise BudgetExceeded("dominance search budget exhausted")
            if _eval_payload(F, phi, cand) != want_q:
                continue
            ok = True
            for j in range(i):
                if _polar_payload(F, phi, cols[j], cand) != sb[j][i].payload:
                    ok = False
                    break
            if not ok:
                continue
            new_basis = _rank_append(F, basis, list(cand))
            if new_basis is None:
                continue
            found = extend(cols + [cand], new_basis)
            if found is not None:
                return found
        return None

    found = extend([], [])
    if found is None:
        return None
    return [tuple(FieldElement(F, x) for x in col) for col in found]


def _eval_payload(F: FiniteField, form: QuadraticForm, vec: tuple) -> int:
    acc = 0
    i = 0
    for a, b in form.planes:
        x, y = vec[i], vec[i + 1]
        acc ^= F.mul_p(a.payload, F.mul_p(x, x)) ^ F.mul_p(x, y) ^ F.mul_p(b.payload, F.mul_p(y, y))
        i += 2
    for c in form.diagonal:
        z = vec[i]
        acc ^= F.mul_p(c.payload, F.mul_p(z, z))
        i += 1
    return acc


def _polar_payload(F: FiniteField, form: QuadraticForm, u: tuple, v: tuple) -> int:
    acc = 0
    i = 0
    for _a, _b in form.planes:
        acc ^= F.mul_p(u[i], v[i + 1]) ^ F.mul_p(u[i + 1], v[i])
        i += 2
    return acc


def subform_search(sigma: QuadraticForm, phi: QuadraticForm, budget: int = 2_000_000):
    """A complement psi with phi isometric to sigma + psi, or None.

    Over a finite field the isometry class of a candidate complement is
    determined by its type together with Witt indices and the Arf class, so
    the search runs over class representatives of the complementary type.
    For nonsingular sigma this agrees with dominance.
    """
    from .isotropy import isometry_test  # local import breaks the module cycle

    F = _finite(phi)
    r_psi = len(phi.planes) - len(sigma.planes)
    s_psi = len(phi.diagonal) - len(sigma.diagonal)
    if r_psi < 0 or s_psi < 0:
        return None
    for psi in _type_representatives(F, r_psi, s_psi):
        if isometry_test(sigma + psi, phi).isometric:
            return psi
    return None


def _type_representatives(F: FiniteField, r: int, s: int):
    """Isometry-class candidates of exact type (r, s) over a finite field.

    Every type-(r, s) class is hit by all-hyperbolic planes or by one
    Arf-nontrivial plane among hyperbolics, paired with a diagonal of at
    most one unit entry (the field is perfect).
    """
    delta = arf_nontrivial(F)
    plane_shapes = [[(F.zero, F.zero)] * r]
    if r >= 1:
        plane_shapes.append([(F.zero, F.zero)] * (r - 1) + [(F.one, delta)])
    diag_shapes = [[F.zero] * s]
    if s >= 1:
        diag_shapes.append([F.one] + [F.zero] * (s - 1))
    for ps in plane_shapes:
        for ds in diag_shapes:
            yield QuadraticForm(F, tuple(ps), tuple(ds))


def arf_nontrivial(F: FiniteField) -> FieldElement:
    """The least element outside the Artin-Schreier image (Arf representative)."""
    image = {F.add_p(F.mul_p(y, y), y) for y in F.iter_payloads()}
    for cand in F.iter_payloads():
        if cand not in image:
            return FieldElement(F, cand)
    raise Unsupported("no Arf representative found (not a finite field?)")


def arf_class(form: QuadraticForm) -> FieldElement:
    """Sum of a_i * b_i over the planes (the Arf invariant modulo the
    Artin-Schreier image when the form is nonsingular)."""
    acc = form.field.zero
    for a, b in form.planes:
        acc = acc + a * b
    return acc


# ---------------------------------------------------------------------------
# Quasilinear span calculus over rational towers
# ---------------------------------------------------------------------------


def square_class_coordinates(values: Sequence[FieldElement]):
    """Coordinate matrix of elements w.r.t. the square-class monomial basis.

    Row i lists the (Frobenius-twisted) coordinates of values[i]: writing
    x = sum_m m * c_m^2, the row holds the c_m.  F^2-linear dependencies of
    the values correspond exactly to F-linear dependencies of the rows.
    """
    tables = [two_basis_decompose(v) for v in values]
    keys = sorted({k for t in tables for k in t})
    field = values[0].field
    rows = [[t.get(k, field.zero) for k in keys] for t in tables]
    return keys, rows


def row_kernel_vector(field: Field, rows: list[list[FieldElement]]) -> Optional[list[FieldElement]]:
    """A nonzero vector lam with sum lam_i * rows[i] = 0, or None.

    Deterministic Gaussian elimination; the returned dependency is the one
    hitting the earliest reducible row, which keeps witnesses reproducible.
    """
    basis: list[tuple[list[FieldElement], list[FieldElement]]] = []  # (row, combo)
    n = len(rows)
    width = len(rows[0]) if rows else 0
    for i, row in enumerate(rows):
        cur = list(row)
        combo = [field.one if j == i else field.zero for j in range(n)]
        for brow, bcombo in basis:
            piv = next((t for t, x in enumerate(brow) if not x.is_zero()), None)
            if piv is not None and not cur[piv].is_zero():
                coef = cur[piv] / brow[piv]
                cur = [cur[t] + coef * brow[t] for t in range(width)]
                combo = [combo[t] + coef * bcombo[t] for t in range(n)]
        if all(x.is_zero() for x in cur):
            return combo
        basis.append((cur, combo))
    return None


def quasilinear_span_equal(phi: QuadraticForm, psi: QuadraticForm) -> bool:
    """Equality of the F^2-spans of the diagonals (value sets of quasilinear forms)."""
    if not (phi.is_quasilinear() and psi.is_quasilinear()):
        raise Unsupported("span comparison is for quasilinear forms")
    return _span_contains_all(phi, psi.diagonal) and _span_contains_all(psi, phi.diagonal)


def _span_contains_all(phi: QuadraticForm, values: Sequence[FieldElement]) -> bool:
    gens = [c for c in phi.diagonal if not c.is_zero()]
    for v in values:
        if v.is_zero():
            continue
        if not span_membership(gens, v):
            return False
    return True


def span_membership(gens: Sequence[FieldElement], target: FieldElement) -> Optional[list[FieldElement]]:
    """Coefficients lam with target = sum lam_i^2 * gens[i], or None."""
    field = target.field
    if target.is_zero():
        return [field.zero] * len(gens)
    if not gens:
        return None
    _keys, rows = square_class_coordinates(list(gens) + [target])
    gen_rows, target_row = rows[:-1], rows[-1]
    width = len(target_row)
    n = len(gens)
    basis: list[tuple[list[FieldElement], list[FieldElement]]] = []
    for i, row in enumerate(gen_rows):
        cur = list(row)
        combo = [field.one if j == i else field.zero for j in range(n)]
        cur, combo = _reduce_row(field, cur, combo, basis, width, n)
        if any(not x.is_zero() for x in cur):
            basis.append((cur, combo))
    cur = list(target_row)
    combo = [field.zero] * n
    cur, combo = _reduce_row(field, cur, combo, basis, width, n)
    if any(not x.is_zero() for x in cur):
        return None
    return combo


def _reduce_row(field, cur, combo, basis, width, n):
    for brow, bcombo in basis:
        piv = next(t for t, x in enumerate(brow) if not x.is_zero())
        if not cur[piv].is_zero():
            coef = cur[piv] / brow[piv]
            cur = [cur[t] + coef * brow[t] for t in range(width)]
            combo = [combo[t] + coef * bcombo[t] for t in range(n)]
    return cur, combo
