"""Exact arithmetic for characteristic-2 field towers.

Three kinds of descriptor are supported and can be stacked into towers:

* ``FiniteField(k)`` is GF(2^k) with a pinned irreducible modulus; elements
  are bit-vectors of length k (stored as ints), the class of x is the
  generator ``w``.
* ``RationalExt(base, var)`` is base(var); elements are gcd-reduced
  numerator/denominator polynomial pairs with monic denominator.
* ``LaurentExt(base, var, precision)`` is a truncated model of base((var));
  elements carry the lowest exponent, a coefficient window, and an exactness
  flag.  Operations that would have to guess unknown coefficients raise
  :class:`~qfchar2.errors.PrecisionExhausted`.

All values are canonical at construction and immutable, so equality is
structural and everything is safe to share between threads.  ``equals`` is
the semantic comparison: on truncated Laurent data it refuses to answer when
the windows agree but tails are unknown.

The moduli for GF(2^k) are the lexicographically least irreducible
polynomials of each degree (coefficient bit-vectors compared as integers),
except k=1 where x+1 is pinned since the prime field needs no reduction.
The full table is reproduced in the README and re-derived in the tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

from .errors import (
    DivisionByZero,
    MixedFields,
    NegativeValuationResidue,
    NotPolynomial,
    PrecisionExhausted,
    Unsupported,
    UnsupportedField,
    ZeroPolynomial,
    ZeroValuation,
)

# Pinned moduli for GF(2^k), bit i = coefficient of x^i.
GF2_MODULI = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000000011,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000000001001,
    13: 0b10000000011011,
    14: 0b100000000100001,
    15: 0b1000000000000011,
    16: 0b10000000000101011,
}

MAX_GF2_DEGREE = 16
DEFAULT_LAURENT_PRECISION = 32


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------


class Field:
    """Abstract field descriptor; concrete kinds implement payload-level ops.

    ``base`` is None for bottom fields and the underlying descriptor for
    extensions; it is deliberately not declared here so that subclass
    dataclasses can make it a required field.
    """

    kind = "abstract"

    # -- payload-level interface -------------------------------------------
    def zero_p(self):
        raise NotImplementedError

    def one_p(self):
        raise NotImplementedError

    def add_p(self, a, b):
        raise NotImplementedError

    def mul_p(self, a, b):
        raise NotImplementedError

    def inv_p(self, a):
        raise NotImplementedError

    def is_zero_p(self, a) -> bool:
        raise NotImplementedError

    def key_p(self, a):
        """Total-order sort key for payloads; drives deterministic searches."""
        raise NotImplementedError

    def fmt_p(self, a) -> str:
        raise NotImplementedError

    # -- element-level conveniences ----------------------------------------
    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, self.zero_p())

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, self.one_p())

    def element(self, payload) -> "FieldElement":
        return FieldElement(self, payload)

    def tower_variables(self) -> tuple[str, ...]:
        """Variable names along the tower, bottom to top."""
        names: list[str] = []
        f: Optional[Field] = self
        while f is not None and f.base is not None:
            names.append(f.var)  # type: ignore[attr-defined]
            f = f.base
        return tuple(reversed(names))

    def bottom(self) -> "Field":
        f: Field = self
        while f.base is not None:
            f = f.base
        return f

    def is_rational_tower(self) -> bool:
        """True when the descriptor is a finite field under 0+ rational extensions."""
        f: Field = self
        while isinstance(f, RationalExt):
            f = f.base
        return isinstance(f, FiniteField)


@dataclass(frozen=True, slots=True)
class FiniteField(Field):
    """GF(2^k) with the pinned degree-k modulus."""

    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_GF2_DEGREE:
            raise UnsupportedField(f"GF(2^k) supported for 1 <= k <= {MAX_GF2_DEGREE}, got k={self.k}")

    kind = "finite"
    base = None

    @property
    def order(self) -> int:
        return 1 << self.k

    @property
    def modulus(self) -> int:
        return GF2_MODULI[self.k]

    def zero_p(self):
        return 0

    def one_p(self):
        return 1

    def add_p(self, a, b):
        return a ^ b

    def mul_p(self, a, b):
        if a == 0 or b == 0:
            return 0
        exp, log = _gf_tables(self.k)
        return exp[(log[a] + log[b]) % (self.order - 1)]

    def inv_p(self, a):
        if a == 0:
            raise DivisionByZero("inverse of 0 in GF(2^%d)" % self.k)
        exp, log = _gf_tables(self.k)
        return exp[(self.order - 1 - log[a]) % (self.order - 1)]

    def is_zero_p(self, a) -> bool:
        return a == 0

    def key_p(self, a):
        return a

    def fmt_p(self, a) -> str:
        if a == 0:
            return "0"
        if a == 1:
            return "1"
        terms = []
        for i in range(self.k - 1, -1, -1):
            if (a >> i) & 1:
                if i == 0:
                    terms.append("1")
                elif i == 1:
                    terms.append("w")
                else:
                    terms.append(f"w^{i}")
        return "+".join(terms)

    @property
    def gen(self) -> "FieldElement":
        """The class of x (printed ``w``); only defined for k >= 2."""
        if self.k < 2:
            raise UnsupportedField("GF(2) has no extension generator w")
        return FieldElement(self, 2)

    def iter_payloads(self) -> Iterator[int]:
        return iter(range(self.order))

    def sqrt_p(self, a):
        # Frobenius is bijective: sqrt = a^(2^(k-1)).
        r = a
        for _ in range(self.k - 1):
            r = self.mul_p(r, r)
        return r

    def trace_p(self, a) -> int:
        t = 0
        x = a
        for _ in range(self.k):
            t ^= x
            x = self.mul_p(x, x)
        return t  # 0 or 1


def _clmul_mod(a: int, b: int, mod: int, k: int) -> int:
    p = 0
    while b:
        if b & 1:
            p ^= a
        b >>= 1
        a <<= 1
        if a >> k & 1:
            a ^= mod
    return p


def _mult_order(g: int, mod: int, k: int) -> int:
    x = g
    n = 1
    while x != 1:
        x = _clmul_mod(x, g, mod, k)
        n += 1
    return n


@lru_cache(maxsize=None)
def _gf_tables(k: int):
    """Discrete log/exp tables for GF(2^k) w.r.t. a multiplicative generator."""
    order = 1 << k
    mod = GF2_MODULI[k]
    g = 1
    for cand in range(2, order):
        if _mult_order(cand, mod, k) == order - 1:
            g = cand
            break
    exp = [0] * (order - 1)
    log = [0] * order
    x = 1
    for i in range(order - 1):
        exp[i] = x
        log[x] = i
        x = _clmul_mod(x, g, mod, k)
    return exp, log


@dataclass(frozen=True, slots=True)
class RationalExt(Field):
    """Rational function field base(var)."""

    base: Field
    var: str

    kind = "rational"

    def __post_init__(self):
        if self.var in self.base.tower_variables() or self.var == "w":
            raise UnsupportedField(f"variable name {self.var!r} already used in the tower")

    # payloads: (num, den) tuples of base payload coefficients, low degree first,
    # trimmed; den monic; gcd(num, den) = 1; zero = ((), (one,))
    def zero_p(self):
        return ((), (self.base.one_p(),))

    def one_p(self):
        return ((self.base.one_p(),), (self.base.one_p(),))

    def make(self, num: tuple, den: tuple):
        """Canonicalize a numerator/denominator pair of coefficient tuples."""
        B = self.base
        num = ptrim(B, num)
        den = ptrim(B, den)
        if not den:
            raise DivisionByZero("zero denominator")
        if not num:
            return self.zero_p()
        g = pgcd(B, num, den)
        if pdeg(g) > 0:
            num = pdivmod(B, num, g)[0]
            den = pdivmod(B, den, g)[0]
        lc = den[-1]
        if not B.is_zero_p(B.add_p(lc, B.one_p())):
            inv = B.inv_p(lc)
            num = tuple(B.mul_p(c, inv) for c in num)
            den = tuple(B.mul_p(c, inv) for c in den)
        return (num, den)

    def add_p(self, a, b):
        B = self.base
        n = padd(B, pmul(B, a[0], b[1]), pmul(B, b[0], a[1]))
        return self.make(n, pmul(B, a[1], b[1]))

    def mul_p(self, a, b):
        B = self.base
        return self.make(pmul(B, a[0], b[0]), pmul(B, a[1], b[1]))

    def inv_p(self, a):
        if not a[0]:
            raise DivisionByZero("inverse of 0 in %s" % describe(self))
        return self.make(a[1], a[0])

    def is_zero_p(self, a) -> bool:
        return not a[0]

    def key_p(self, a):
        B = self.base
        return (
            len(a[0]),
            tuple(B.key_p(c) for c in a[0]),
            len(a[1]),
            tuple(B.key_p(c) for c in a[1]),
        )

    def fmt_p(self, a) -> str:
        num, den = a
        ns = fmt_poly(self.base, num, self.var)
        if pdeg(den) == 0:
            return ns
        ds = fmt_poly(self.base, den, self.var)
        return f"({ns})/({ds})"

    @property
    def gen(self) -> "FieldElement":
        return FieldElement(self, ((self.base.zero_p(), self.base.one_p()), (self.base.one_p(),)))


@dataclass(frozen=True, slots=True)
class LaurentExt(Field):
    """Truncated Laurent series base((var)) with a fixed coefficient window."""

    base: Field
    var: str
    precision: int = DEFAULT_LAURENT_PRECISION

    kind = "laurent"

    def __post_init__(self):
        if self.precision < 1:
            raise UnsupportedField("Laurent precision must be positive")
        if self.var in self.base.tower_variables() or self.var == "w":
            raise UnsupportedField(f"variable name {self.var!r} already used in the tower")

    # payloads: (v, coeffs, exact); see module docstring
    def zero_p(self):
        return (0, (), True)

    def one_p(self):
        return (0, (self.base.one_p(),), True)

    def make(self, v: int, coeffs: Sequence, exact: bool):
        B = self.base
        coeffs = list(coeffs)
        # drop leading zeros (known)
        while coeffs and B.is_zero_p(coeffs[0]):
            coeffs.pop(0)
            v += 1
        if exact:
            while coeffs and B.is_zero_p(coeffs[-1]):
                coeffs.pop()
            if not coeffs:
                return (0, (), True)
        if len(coeffs) > self.precision:
            coeffs = coeffs[: self.precision]
            exact = False
        if not coeffs and not exact:
            return (v, (), False)  # O(var^v), nothing known
        return (v, tuple(coeffs), exact)

    def _window_end(self, a):
        # exclusive exponent up to which coefficients are known
        v, coeffs, exact = a
        return None if exact else v + len(coeffs)

    def add_p(self, a, b):
        B = self.base
        va, ca, ea = a
        vb, cb, eb = b
        if ea and not ca:
            return b
        if eb and not cb:
            return a
        ends = [e for e in (self._window_end(a), self._window_end(b)) if e is not None]
        lo = min(va, vb)
        if ends:
            end = min(ends)
            exact = False
        else:
            end = max(va + len(ca), vb + len(cb))
            exact = True
        n = max(end - lo, 0)
        out = [B.zero_p()] * n
        for (v, cs) in ((va, ca), (vb, cb)):
            for i, c in enumerate(cs):
                pos = v + i - lo
                if 0 <= pos < n:
                    out[pos] = B.add_p(out[pos], c)
        return self.make(lo, out, exact)

    def mul_p(self, a, b):
        B = self.base
        va, ca, ea = a
        vb, cb, eb = b
        if (ea and not ca) or (eb and not cb):
            return self.zero_p()
        if not ca or not cb:
            # O(X^v) times anything known only up to its own valuation
            return self.make(va + vb, (), False)
        n_known = []
        if not ea:
            n_known.append(len(ca))
        if not eb:
            n_known.append(len(cb))
        if n_known:
            n = min(min(n_known), self.precision)
            exact = False
        else:
            n = len(ca) + len(cb) - 1
            exact = True
        out = [B.zero_p()] * n
        for i, x in enumerate(ca):
            if B.is_zero_p(x):
                continue
            for j, y in enumerate(cb):
                if i + j >= n:
                    break
                out[i + j] = B.add_p(out[i + j], B.mul_p(x, y))
        return self.make(va + vb, out, exact)

    def inv_p(self, a):
        B = self.base
        v, coeffs, exact = a
        if exact and not coeffs:
            raise DivisionByZero("inverse of 0 in %s" % describe(self))
        if not coeffs:
            raise PrecisionExhausted("lowest nonzero coefficient unknown; cannot invert")
        # invert unit part by series division to the available precision
        n = len(coeffs) if not exact else self.precision
        n = min(n, self.precision)
        lead_inv = B.inv_p(coeffs[0])
        out = [B.zero_p()] * n
        out[0] = lead_inv
        for m in range(1, n):
            acc = B.zero_p()
            for i in range(1, min(m, len(coeffs) - 1) + 1):
                acc = B.add_p(acc, B.mul_p(coeffs[i], out[m - i]))
            out[m] = B.mul_p(lead_inv, acc)
        result_exact = exact and len(coeffs) == 1
        if result_exact:
            out = out[:1]
        return self.make(-v, out, result_exact)

    def is_zero_p(self, a) -> bool:
        v, coeffs, exact = a
        if exact:
            return not coeffs
        if coeffs:
            return False  # leading coefficient is known nonzero
        raise PrecisionExhausted("window is all zero but tail is unknown")

    def key_p(self, a):
        B = self.base
        return (a[0], tuple(B.key_p(c) for c in a[1]), a[2])

    def fmt_p(self, a) -> str:
        B = self.base
        v, coeffs, exact = a
        terms = []
        for i, c in enumerate(coeffs):
            if B.is_zero_p(c):
                continue
            terms.append(_fmt_term(B, c, self.var, v + i))
        if not exact:
            terms.append(f"O({self.var}^{v + len(coeffs)})" if v + len(coeffs) != 1 else f"O({self.var})")
        if not terms:
            return "0"
        return "+".join(terms)

    @property
    def gen(self) -> "FieldElement":
        return FieldElement(self, (1, (self.base.one_p(),), True))


def GF(k: int) -> FiniteField:
    """GF(2^k)."""
    return FiniteField(k)


def rational(base: Field, var: str) -> RationalExt:
    return RationalExt(base, var)


def laurent(base: Field, var: str, precision: int = DEFAULT_LAURENT_PRECISION) -> LaurentExt:
    return LaurentExt(base, var, precision)


def describe(field: Field) -> str:
    """Grammar string for a descriptor, e.g. ``GF(4)(s)(t)``."""
    if isinstance(field, FiniteField):
        return f"GF({1 << field.k})"
    if isinstance(field, RationalExt):
        return f"{describe(field.base)}({field.var})"
    if isinstance(field, LaurentExt):
        return f"{describe(field.base)}(({field.var}):{field.precision})"
    raise UnsupportedField(str(field))


# ---------------------------------------------------------------------------
# Polynomial payloads (coefficient tuples over a base descriptor)
# ---------------------------------------------------------------------------


def ptrim(F: Field, c) -> tuple:
    c = tuple(c)
    n = len(c)
    while n and F.is_zero_p(c[n - 1]):
        n -= 1
    return c[:n]


def pdeg(c) -> int:
    """Degree with deg 0 = -1 convention for the zero polynomial."""
    return len(c) - 1


def padd(F: Field, a, b) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] = F.add_p(out[i], x)
    return ptrim(F, out)


def pmul(F: Field, a, b) -> tuple:
    if not a or not b:
        return ()
    out = [F.zero_p()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if F.is_zero_p(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = F.add_p(out[i + j], F.mul_p(x, y))
    return ptrim(F, out)


def pscale(F: Field, a, s) -> tuple:
    return ptrim(F, tuple(F.mul_p(c, s) for c in a))


def pdivmod(F: Field, a, b) -> tuple[tuple, tuple]:
    if not b:
        raise DivisionByZero("polynomial division by zero")
    a = list(a)
    db, lb = pdeg(b), b[-1]
    inv = F.inv_p(lb)
    q = [F.zero_p()] * max(len(a) - db, 0)
    while len(a) - 1 >= db and a:
        da = len(a) - 1
        if F.is_zero_p(a[-1]):
            a.pop()
            continue
        coef = F.mul_p(a[-1], inv)
        q[da - db] = coef
        for i in range(db + 1):
            a[da - db + i] = F.add_p(a[da - db + i], F.mul_p(coef, b[i]))
        a.pop()
    return ptrim(F, q), ptrim(F, a)


def pgcd(F: Field, a, b) -> tuple:
    """Monic gcd."""
    a, b = ptrim(F, a), ptrim(F, b)
    while b:
        a, b = b, pdivmod(F, a, b)[1]
    if a:
        a = pscale(F, a, F.inv_p(a[-1]))
    return a


def peval(F: Field, a, x):
    acc = F.zero_p()
    for c in reversed(a):
        acc = F.add_p(F.mul_p(acc, x), c)
    return acc


def _fmt_coeff(F: Field, c) -> tuple[str, bool]:
    s = F.fmt_p(c)
    atomic = s.isalnum()
    return s, atomic


def _fmt_term(F: Field, c, var: str, e: int) -> str:
    if e == 0:
        s, atomic = _fmt_coeff(F, c)
        return s if atomic else f"({s})"
    vs = var if e == 1 else f"{var}^{e}"
    if F.is_zero_p(F.add_p(c, F.one_p())):
        return vs
    s, atomic = _fmt_coeff(F, c)
    return (s if atomic else f"({s})") + "*" + vs


def fmt_poly(F: Field, coeffs, var: str) -> str:
    if not coeffs:
        return "0"
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        if F.is_zero_p(coeffs[i]):
            continue
        terms.append(_fmt_term(F, coeffs[i], var, i))
    return "+".join(terms) if terms else "0"


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FieldElement:
    """Immutable element of a field descriptor.

    ``==`` compares canonical payloads structurally (safe for dict keys);
    ``equals`` is the semantic comparison and raises
    :class:`PrecisionExhausted` when truncated Laurent data cannot decide.
    """

    field: Field
    payload: object

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, int):
            return self.field.one if other % 2 else self.field.zero
        if not isinstance(other, FieldElement):
            raise MixedFields(f"cannot combine {other!r} with a field element")
        if other.field == self.field:
            return other
        return coerce(other, self.field)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, self.field.add_p(self.payload, o.payload))

    __radd__ = __add__
    __sub__ = __add__  # characteristic 2
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElement(self.field, self.field.mul_p(self.payload, o.payload))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o * self.inv()

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        r = self.field.one
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def inv(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv_p(self.payload))

    def is_zero(self) -> bool:
        """Semantic zero test; raises PrecisionExhausted on undecidable windows."""
        return self.field.is_zero_p(self.payload)

    def equals(self, other) -> bool:
        o = self._coerce(other)
        return (self + o).is_zero()

    def sort_key(self):
        return self.field.key_p(self.payload)

    def __str__(self):
        return self.field.fmt_p(self.payload)

    def __repr__(self):
        return f"<{self} in {describe(self.field)}>"


# ---------------------------------------------------------------------------
# Coercion along towers and between finite fields
# ---------------------------------------------------------------------------


def _tower_path(small: Field, big: Field) -> Optional[list[Field]]:
    """Chain of descriptors from ``small`` up to ``big``, or None."""
    path = []
    f: Optional[Field] = big
    while f is not None:
        path.append(f)
        if f == small:
            return list(reversed(path))
        f = f.base
    return None


@lru_cache(maxsize=None)
def _subfield_root(j: int, k: int) -> int:
    """Payload of the least root of GF(2^j)'s modulus inside GF(2^k)."""
    big = FiniteField(k)
    mod = GF2_MODULI[j]
    coeffs = tuple(1 if (mod >> i) & 1 else 0 for i in range(j + 1))
    for cand in big.iter_payloads():
        acc = 0
        for c in reversed(coeffs):
            acc = big.mul_p(acc, cand) ^ c
        if acc == 0:
            return cand
    raise Unsupported(f"no root of the GF(2^{j}) modulus in GF(2^{k})")


def embed_finite(x: FieldElement, target: FiniteField) -> FieldElement:
    src = x.field
    if not isinstance(src, FiniteField):
        raise MixedFields("embed_finite expects a finite-field element")
    if src.k == target.k:
        return FieldElement(target, x.payload)
    if target.k % src.k != 0:
        raise MixedFields(f"GF(2^{src.k}) is not a subfield of GF(2^{target.k})")
    root = _subfield_root(src.k, target.k)
    acc = 0
    p = x.payload
    for i in range(src.k - 1, -1, -1):
        acc = target.mul_p(acc, root) ^ ((p >> i) & 1)
    return FieldElement(target, acc)


def lift_constant(x: FieldElement, ext: Field) -> FieldElement:
    """Lift an element of ``ext.base`` into ``ext``."""
    if isinstance(ext, RationalExt):
        if x.field != ext.base:
            raise MixedFields("constant does not live in the base of the extension")
        if x.is_zero():
            return ext.zero
        return FieldElement(ext, ((x.payload,), (ext.base.one_p(),)))
    if isinstance(ext, LaurentExt):
        if x.field != ext.base:
            raise MixedFields("constant does not live in the base of the extension")
        if ext.base.is_zero_p(x.payload):
            return ext.zero
        return FieldElement(ext, (0, (x.payload,), True))
    raise MixedFields("not an extension descriptor")


def coerce(x: FieldElement, target: Field) -> FieldElement:
    """Map ``x`` into ``target`` along tower lifts and finite-field embeddings."""
    if x.field == target:
        return x
    path = _tower_path(x.field, target)
    if path is not None:
        cur = x
        for step in path[1:]:
            cur = lift_constant(cur, step)
        return cur
    # allow a finite-field embedding at the bottom of the target tower
    if isinstance(x.field, FiniteField):
        bottom = target.bottom()
        if isinstance(bottom, FiniteField) and bottom.k % x.field.k == 0:
            return coerce(embed_finite(x, bottom), target)
    raise MixedFields(f"cannot coerce from {describe(x.field)} into {describe(target)}")


def common_field(*elems: FieldElement) -> Field:
    """The topmost descriptor among the arguments; raises if incomparable."""
    field = elems[0].field
    for e in elems[1:]:
        if e.field == field:
            continue
        if _tower_path(e.field, field) is not None:
            continue
        if _tower_path(field, e.field) is not None:
            field = e.field
            continue
        raise MixedFields(f"{describe(e.field)} and {describe(field)} are unrelated")
    return field


# ---------------------------------------------------------------------------
# Element-level polynomial and rational-function helpers
# ---------------------------------------------------------------------------


def poly_from_coeffs(R: RationalExt, coeffs: Sequence[FieldElement]) -> FieldElement:
    """Polynomial in R's top variable with the given base-field coefficients."""
    pl = ptrim(R.base, tuple(coerce(c, R.base).payload for c in coeffs))
    if not pl:
        return R.zero
    return FieldElement(R, (pl, (R.base.one_p(),)))


def is_polynomial(x: FieldElement) -> bool:
    return isinstance(x.field, RationalExt) and pdeg(x.payload[1]) == 0


def poly_coeffs(x: FieldElement) -> tuple[FieldElement, ...]:
    """Coefficients (low to high) of a denominator-free rational element."""
    if not isinstance(x.field, RationalExt):
        raise NotPolynomial(f"{x!r} is not a polynomial")
    num, den = x.payload
    if pdeg(den) != 0:
        raise NotPolynomial(f"{x!r} has a nontrivial denominator")
    B = x.field.base
    return tuple(FieldElement(B, c) for c in num)


def poly_degree(x: FieldElement) -> int:
    return pdeg(x.payload[0]) if is_polynomial(x) else -2


def poly_divmod(a: FieldElement, b: FieldElement) -> tuple[FieldElement, FieldElement]:
    R = a.field
    if not (is_polynomial(a) and is_polynomial(b)):
        raise NotPolynomial("polynomial division needs polynomial operands")
    q, r = pdivmod(R.base, a.payload[0], b.payload[0])
    one = (R.base.one_p(),)
    return FieldElement(R, (q, one)), FieldElement(R, (r, one))


def poly_eval(a: FieldElement, x: FieldElement) -> FieldElement:
    """Evaluate a polynomial at a point of (an extension of) the base field."""
    coeffs = poly_coeffs(a)
    F = x.field
    acc = F.zero
    for c in reversed(coeffs):
        acc = acc * x + coerce(c, F)
    return acc


def rational_num_den(x: FieldElement) -> tuple[FieldElement, FieldElement]:
    """Numerator and denominator as polynomial elements of the same field."""
    if not isinstance(x.field, RationalExt):
        raise NotPolynomial(f"{x!r} is not a rational-extension element")
    one = (x.field.base.one_p(),)
    return FieldElement(x.field, (x.payload[0], one)), FieldElement(x.field, (x.payload[1], one))


# ---------------------------------------------------------------------------
# Places, valuations, residues
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Place:
    """A place of the top extension of a tower.

    For a rational extension: either a monic irreducible polynomial in the
    top variable, or the degree place (``at_infinity``).  For a Laurent
    extension: the canonical var-adic place (``poly`` is None).
    """

    field: Field
    poly: Optional[FieldElement] = None
    at_infinity: bool = False

    def __post_init__(self):
        if isinstance(self.field, LaurentExt):
            if self.poly is not None or self.at_infinity:
                raise Unsupported("Laurent descriptors only carry the var-adic place")
        elif isinstance(self.field, RationalExt):
            if self.at_infinity:
                if self.poly is not None:
                    raise Unsupported("degree place takes no polynomial")
            else:
                if self.poly is None or not is_polynomial(self.poly):
                    raise Unsupported("finite places need a monic polynomial")
                coeffs = self.poly.payload[0]
                B = self.field.base
                if pdeg(coeffs) < 1 or not B.is_zero_p(B.add_p(coeffs[-1], B.one_p())):
                    raise Unsupported("finite places need a monic polynomial of degree >= 1")
        else:
            raise Unsupported("places exist only on extension descriptors")

    def __str__(self):
        if isinstance(self.field, LaurentExt):
            return self.field.var
        if self.at_infinity:
            return f"1/{self.field.var}"
        return str(self.poly)


def adic_place(field: Field) -> Place:
    """The place at the top variable (t) of a rational or Laurent extension."""
    if isinstance(field, LaurentExt):
        return Place(field)
    if isinstance(field, RationalExt):
        return Place(field, poly=FieldElement(field, ((field.base.zero_p(), field.base.one_p()), (field.base.one_p(),))))
    raise Unsupported("no adic place on a finite field")


def _mult_of(F: Field, poly: tuple, p: tuple) -> tuple[int, tuple]:
    """Multiplicity of p in poly, and the cofactor."""
    m = 0
    while poly:
        q, r = pdivmod(F, poly, p)
        if r:
            break
        poly = q
        m += 1
    return m, poly


def valuation(x: FieldElement, place: Place) -> int:
    """Valuation of a nonzero element at the place (poles give negative values)."""
    F = x.field
    if F != place.field:
        raise MixedFields("element and place live on different descriptors")
    if isinstance(F, LaurentExt):
        v, coeffs, exact = x.payload
        if exact and not coeffs:
            raise ZeroValuation("valuation of 0 is undefined")
        if not coeffs:
            raise PrecisionExhausted("valuation unknown: window exhausted")
        return v
    assert isinstance(F, RationalExt)
    B = F.base
    num, den = x.payload
    if not num:
        raise ZeroValuation("valuation of 0 is undefined")
    if place.at_infinity:
        return pdeg(den) - pdeg(num)
    p = place.poly.payload[0]
    return _mult_of(B, num, p)[0] - _mult_of(B, den, p)[0]


def valuation_residue(x: FieldElement, place: Place) -> tuple[int, FieldElement]:
    """Valuation of x at the place, and the residue (defined for valuation >= 0).

    Residues are supported at finite places of degree one (evaluate at the
    root), at finite places of higher degree over a finite base (the residue
    lands in the matching GF(2^(k*d)) via the pinned embedding), and at the
    var-adic place of a Laurent extension.  The degree place supports only
    valuation queries.
    """
    F = x.field
    if F != place.field:
        raise MixedFields("element and place live on different descriptors")
    if isinstance(F, LaurentExt):
        v = valuation(x, place)
        if v < 0:
            raise NegativeValuationResidue(f"pole of order {-v} at {place}")
        residue = FieldElement(F.base, x.payload[1][0]) if v == 0 else F.base.zero
        return v, residue
    assert isinstance(F, RationalExt)
    if place.at_infinity:
        raise Unsupported("the degree place supports only valuation queries")
    B = F.base
    num, den = x.payload
    if not num:
        raise ZeroValuation("valuation of 0 is undefined")
    p = place.poly.payload[0]
    mn, num_co = _mult_of(B, num, p)
    md, den_co = _mult_of(B, den, p)
    v = mn - md
    if v < 0:
        raise NegativeValuationResidue(f"pole of order {-v} at {place}")
    if v > 0:
        return v, _residue_field_zero(F, p)
    rn = pdivmod(B, num_co, p)[1]
    rd = pdivmod(B, den_co, p)[1]
    return 0, _residue_value(F, p, rn, rd)


def _residue_field_zero(F: RationalExt, p: tuple) -> FieldElement:
    if pdeg(p) == 1:
        return F.base.zero
    E, _, _ = residue_field(F, p)
    return E.zero


def _residue_value(F: RationalExt, p: tuple, rn: tuple, rd: tuple) -> FieldElement:
    B = F.base
    if pdeg(p) == 1:
        root = p[0]  # p = t + c, root c (char 2)
        n = FieldElement(B, peval(B, rn, root))
        d = FieldElement(B, peval(B, rd, root))
        return n / d
    E, to_res, _ = residue_field(F, p)
    n = to_res(rn)
    d = to_res(rd)
    return n / d


@lru_cache(maxsize=None)
def _residue_iso_cached(base_k: int, p_bits: tuple):
    base = FiniteField(base_k)
    d = len(p_bits) - 1
    E = FiniteField(base_k * d)
    # root of p in E: scan in payload order for determinism
    coeffs_E = [embed_finite(FieldElement(base, c), E).payload for c in p_bits]
    root = None
    for cand in E.iter_payloads():
        acc = 0
        for c in reversed(coeffs_E):
            acc = E.mul_p(acc, cand) ^ c
        if acc == 0:
            root = cand
            break
    if root is None:
        raise ZeroPolynomial("not irreducible: no root in the residue field")
    # GF(2)-linear map: coefficient bits of a deg<d polynomial over base -> E payload
    kd = base_k * d
    basis_images = []
    for pos in range(d):
        for bit in range(base_k):
            img = E.mul_p(embed_finite(FieldElement(base, 1 << bit), E).payload, _pow_p(E, root, pos))
            basis_images.append(img)
    # invert the bit-matrix once (columns = basis_images)
    inv_rows = _invert_gf2_matrix(basis_images, kd)
    return E, root, basis_images, inv_rows


def _pow_p(F: FiniteField, a: int, n: int) -> int:
    r = 1
    while n:
        if n & 1:
            r = F.mul_p(r, a)
        a = F.mul_p(a, a)
        n >>= 1
    return r


def _invert_gf2_matrix(cols: list[int], n: int) -> list[int]:
    """Invert the GF(2) matrix whose columns are the given bit-vectors."""
    rows = []
    for i in range(n):
        row = 0
        for j, c in enumerate(cols):
            if (c >> i) & 1:
                row |= 1 << j
        rows.append(row)
    aug = [(rows[i], 1 << i) for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if (aug[i][0] >> col) & 1)
        aug[col], aug[piv] = aug[piv], aug[col]
        for i in range(n):
            if i != col and (aug[i][0] >> col) & 1:
                aug[i] = (aug[i][0] ^ aug[col][0], aug[i][1] ^ aug[col][1])
    return [aug[i][1] for i in range(n)]


def residue_field(F: RationalExt, p: tuple):
    """Residue field at a monic irreducible p over a finite base, with both maps.

    Returns ``(E, to_res, from_res)`` where ``to_res`` maps coefficient
    tuples of polynomials to elements of E, and ``from_res`` maps an element
    of E back to its canonical degree < deg(p) preimage (coefficient tuple).
    """
    B = F.base
    if not isinstance(B, FiniteField):
        raise Unsupported("residue fields at higher-degree places need a finite base")
    E, root, _basis, inv_rows = _residue_iso_cached(B.k, tuple(p))
    d = len(p) - 1

    def to_res(coeffs: tuple) -> FieldElement:
        coeffs = pdivmod(B, coeffs, p)[1]
        acc = 0
        for c in reversed(coeffs):
            acc = E.mul_p(acc, root) ^ embed_finite(FieldElement(B, c), E).payload
        return FieldElement(E, acc)

    def from_res(e: FieldElement) -> tuple:
        bits = e.payload
        vec = 0
        for i in range(E.k):
            if (bits >> i) & 1:
                vec ^= inv_rows[i]
        coeffs = []
        for pos in range(d):
            c = 0
            for bit in range(B.k):
                if (vec >> (pos * B.k + bit)) & 1:
                    c |= 1 << bit
            coeffs.append(c)
        return ptrim(B, coeffs)

    return E, to_res, from_res


# ---------------------------------------------------------------------------
# Squares, the two-basis, Artin-Schreier
# ---------------------------------------------------------------------------


def two_basis_decompose(x: FieldElement) -> dict[tuple[str, ...], FieldElement]:
    """Write x as a sum of square-class monomials times squares.

    Over a rational tower F(t_1)...(t_l) with finite F, every element is
    uniquely ``sum_m m * c_m^2`` where m runs over products of a subset of
    the tower variables.  Keys are tuples of variable names (bottom to top);
    values are the c_m, living in x's own field.  Zero entries are omitted;
    the zero element gives an empty table.
    """
    F = x.field
    if isinstance(F, LaurentExt):
        raise UnsupportedField("two-basis decomposition is not defined on Laurent descriptors")
    table = _decompose_rec(x)
    return {k: coerce(v, F) for k, v in table.items() if not v.is_zero()}


def _decompose_rec(x: FieldElement) -> dict[tuple[str, ...], FieldElement]:
    F = x.field
    if isinstance(F, FiniteField):
        if F.is_zero_p(x.payload):
            return {}
        return {(): FieldElement(F, F.sqrt_p(x.payload))}
    if not isinstance(F, RationalExt):
        raise UnsupportedField("two-basis decomposition needs a rational tower")
    B = F.base
    num, den = x.payload
    if not num:
        return {}
    y = pmul(B, num, den)  # x = y / den^2
    per_key_even: dict[tuple, dict[int, object]] = {}
    per_key_odd: dict[tuple, dict[int, object]] = {}
    for j, cj in enumerate(y):
        if B.is_zero_p(cj):
            continue
        sub = _decompose_rec(FieldElement(B, cj))
        target = per_key_even if j % 2 == 0 else per_key_odd
        for key, c in sub.items():
            target.setdefault(key, {})[j // 2] = c.payload
    out: dict[tuple[str, ...], FieldElement] = {}
    den_elem = FieldElement(F, (den, (B.one_p(),)))
    for defect, per_key in ((0, per_key_even), (1, per_key_odd)):
        for key, coeff_map in per_key.items():
            top = max(coeff_map)
            coeffs = tuple(coeff_map.get(i, B.zero_p()) for i in range(top + 1))
            poly = FieldElement(F, (ptrim(B, coeffs), (B.one_p(),)))
            full_key = key + (F.var,) if defect else key
            out[full_key] = poly / den_elem
    return out


def two_basis_monomial(field: Field, key: tuple[str, ...]) -> FieldElement:
    """The product of the named tower variables as an element of ``field``."""
    acc = field.one
    for name in key:
        f: Optional[Field] = field
        while f is not None and getattr(f, "var", None) != name:
            f = f.base
        if f is None:
            raise UnknownVariableError(name)
        acc = acc * coerce(f.gen, field)  # type: ignore[attr-defined]
    return acc


class UnknownVariableError(Unsupported):
    code = "unknown-variable"


def reassemble_two_basis(field: Field, table: dict[tuple[str, ...], FieldElement]) -> FieldElement:
    acc = field.zero
    for key, c in table.items():
        acc = acc + two_basis_monomial(field, key) * c * c
    return acc


def is_square(x: FieldElement) -> Optional[FieldElement]:
    """A square root of x, or None when x is not a square in its field."""
    F = x.field
    if isinstance(F, FiniteField):
        return FieldElement(F, F.sqrt_p(x.payload))
    if isinstance(F, RationalExt):
        table = two_basis_decompose(x)
        if any(k != () for k in table):
            return None
        return table.get((), F.zero)
    if isinstance(F, LaurentExt):
        v, coeffs, exact = x.payload
        if exact and not coeffs:
            return F.zero
        if not exact:
            raise PrecisionExhausted("square test needs the exact tail")
        if v % 2:
            return None
        root_coeffs = []
        for i, c in enumerate(coeffs):
            if i % 2:
                if not F.base.is_zero_p(c):
                    return None
            else:
                r = is_square(FieldElement(F.base, c))
                if r is None:
                    return None
                root_coeffs.append(r.payload)
        return FieldElement(F, F.make(v // 2, root_coeffs, True))
    raise UnsupportedField(str(F))


def trace_class(x: FieldElement) -> int:
    """Absolute trace bit of a finite-field element (its Artin-Schreier class)."""
    F = x.field
    if not isinstance(F, FiniteField):
        raise UnsupportedField("trace class is defined over finite fields")
    return F.trace_p(x.payload)


@dataclass(frozen=True, slots=True)
class ArtinSchreierResult:
    """Outcome of solving y^2 + y = x.

    ``conclusive`` is False only for an absence verdict obtained by bounded
    search over an infinite field: no witness up to the bound is not a proof.
    """

    root: Optional[FieldElement]
    conclusive: bool


def artin_schreier_solve(x: FieldElement, degree_bound: int = 4) -> ArtinSchreierResult:
    """Solve y^2 + y = x exactly over finite fields, by bounded search over towers."""
    F = x.field
    if isinstance(F, FiniteField):
        if F.trace_p(x.payload) != 0:
            return ArtinSchreierResult(None, True)
        # the map y -> y^2 + y is GF(2)-linear; solve the bit system
        cols = [F.add_p(F.mul_p(1 << i, 1 << i), 1 << i) for i in range(F.k)]
        y = _solve_gf2(cols, x.payload, F.k)
        assert y is not None
        sols = [y, y ^ 1]
        return ArtinSchreierResult(FieldElement(F, min(sols)), True)
    if isinstance(F, RationalExt):
        if x.is_zero():
            return ArtinSchreierResult(F.zero, True)
        for y in enumerate_rationals(F, degree_bound):
            if (y * y + y).equals(x):
                return ArtinSchreierResult(y, True)
        return ArtinSchreierResult(None, False)
    raise UnsupportedField("Artin-Schreier solving is not defined on Laurent descriptors")


def _solve_gf2(cols: list[int], rhs: int, n: int) -> Optional[int]:
    """Least solution (free variables zero) of the GF(2) system, or None."""
    rows = []
    for i in range(n):
        row = 0
        for j, c in enumerate(cols):
            if (c >> i) & 1:
                row |= 1 << j
        rows.append((row, (rhs >> i) & 1))
    rank = 0
    pivots: list[tuple[int, int]] = []  # (column, row)
    for col in range(len(cols)):
        piv = next((i for i in range(rank, n) if (rows[i][0] >> col) & 1), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(n):
            if i != rank and (rows[i][0] >> col) & 1:
                rows[i] = (rows[i][0] ^ rows[rank][0], rows[i][1] ^ rows[rank][1])
        pivots.append((col, rank))
        rank += 1
    if any(rows[i][1] for i in range(rank, n)):
        return None
    sol = 0
    for col, row in pivots:
        if rows[row][1]:
            sol |= 1 << col
    return sol


# ---------------------------------------------------------------------------
# Enumeration helpers (deterministic orders, used by bounded searches)
# ---------------------------------------------------------------------------


def iter_elements(field: Field) -> Iterator[FieldElement]:
    """All elements of a finite field in payload order."""
    if not isinstance(field, FiniteField):
        raise Unsupported("only finite fields are enumerable")
    for p in field.iter_payloads():
        yield FieldElement(field, p)


def enumerate_polynomials(R: RationalExt, deg_bound: int) -> Iterator[FieldElement]:
    """Denominator-free elements with degree <= bound in every tower variable."""
    base_pool = list(_coefficient_pool(R.base, deg_bound))
    for coeffs in itertools.product(base_pool, repeat=deg_bound + 1):
        yield FieldElement(R, R.make(tuple(coeffs), (R.base.one_p(),)))


def _coefficient_pool(F: Field, deg_bound: int) -> Iterator:
    if isinstance(F, FiniteField):
        yield from F.iter_payloads()
        return
    if isinstance(F, RationalExt):
        for e in enumerate_polynomials(F, deg_bound):
            yield e.payload
        return
    raise Unsupported("cannot enumerate coefficients of this descriptor")


def enumerate_rationals(R: RationalExt, deg_bound: int) -> Iterator[FieldElement]:
    """Reduced fractions with numerator and denominator degree <= bound."""
    B = R.base
    base_pool = list(_coefficient_pool(B, deg_bound))
    dens = []
    for dd in range(deg_bound + 1):
        for body in itertools.product(base_pool, repeat=dd):
            dens.append(ptrim(B, body + (B.one_p(),)))
    seen = set()
    for num_coeffs in itertools.product(base_pool, repeat=deg_bound + 1):
        num = ptrim(B, num_coeffs)
        for den in dens:
            payload = R.make(num, den)
            if payload in seen:
                continue
            seen.add(payload)
            yield FieldElement(R, payload)


def random_element(field: Field, rng, deg_bound: int = 3, laurent_span: int = 4) -> FieldElement:
    """A random element, used by the property-test suites."""
    if isinstance(field, FiniteField):
        return FieldElement(field, rng.randrange(field.order))
    if isinstance(field, RationalExt):
        B = field.base
        num = tuple(random_element(B, rng, deg_bound).payload for _ in range(rng.randrange(1, deg_bound + 2)))
        den = tuple(random_element(B, rng, deg_bound).payload for _ in range(rng.randrange(0, deg_bound + 1))) + (B.one_p(),)
        return FieldElement(field, field.make(num, den))
    if isinstance(field, LaurentExt):
        B = field.base
        v = rng.randrange(-laurent_span, laurent_span + 1)
        coeffs = tuple(random_element(B, rng).payload for _ in range(rng.randrange(1, laurent_span + 2)))
        return FieldElement(field, field.make(v, coeffs, True))
    raise UnsupportedField(str(field))
