"""Univariate polynomial factorization over finite base fields.

Polynomials are denominator-free elements of a rational extension with a
finite base (see :mod:`qfchar2.fields`).  Factorization is by squarefree
decomposition followed by trial division against the monic irreducibles of
each degree, which keeps the output order fully deterministic: factors are
sorted by (degree, coefficient payloads).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

from .errors import Unsupported, ZeroPolynomial
from .fields import (
    FieldElement,
    FiniteField,
    RationalExt,
    is_polynomial,
    padd,
    pdeg,
    pdivmod,
    pgcd,
    pmul,
    pscale,
    ptrim,
)


def _require_poly_over_finite(f: FieldElement) -> RationalExt:
    R = f.field
    if not isinstance(R, RationalExt) or not isinstance(R.base, FiniteField):
        raise Unsupported("factorization needs a polynomial over a finite base field")
    if not is_polynomial(f):
        raise Unsupported("factorization needs a denominator-free element")
    return R


def _poly(R: RationalExt, coeffs: tuple) -> FieldElement:
    return FieldElement(R, (coeffs, (R.base.one_p(),)))


def is_irreducible(f: FieldElement) -> bool:
    """Rabin's test: f irreducible over GF(q) iff x^(q^d) = x mod f and the
    cofactor powers x^(q^(d/p)) - x are coprime to f for primes p | d."""
    R = _require_poly_over_finite(f)
    B = R.base
    q = B.order
    coeffs = f.payload[0]
    d = pdeg(coeffs)
    if d < 1:
        return False
    monic = pscale(B, coeffs, B.inv_p(coeffs[-1]))
    x = pdivmod(B, (B.zero_p(), B.one_p()), monic)[1]
    for p in _prime_divisors(d):
        power = _frobenius_power(B, (B.zero_p(), B.one_p()), monic, q ** (d // p))
        g = pgcd(B, padd(B, power, x), monic)
        if pdeg(g) != 0:
            return False
    power = _frobenius_power(B, (B.zero_p(), B.one_p()), monic, q**d)
    return padd(B, power, x) == ()


def _frobenius_power(B, base_poly: tuple, modulus: tuple, e: int) -> tuple:
    """base_poly^e mod modulus by square and multiply."""
    result = (B.one_p(),)
    acc = pdivmod(B, base_poly, modulus)[1]
    while e:
        if e & 1:
            result = pdivmod(B, pmul(B, result, acc), modulus)[1]
        acc = pdivmod(B, pmul(B, acc, acc), modulus)[1]
        e >>= 1
    return result


def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def _irreducibles_cached(k: int, var: str, degree: int) -> tuple:
    B = FiniteField(k)
    R = RationalExt(B, var)
    found = []
    for body in _tuples(B, degree):
        coeffs = body + (B.one_p(),)
        cand = _poly(R, coeffs)
        if is_irreducible(cand):
            found.append(cand)
    found.sort(key=lambda e: e.sort_key())
    return tuple(found)


def _tuples(B: FiniteField, n: int) -> Iterator[tuple]:
    if n == 0:
        yield ()
        return
    for rest in _tuples(B, n - 1):
        for c in B.iter_payloads():
            yield rest + (c,)


def enum_irreducibles(R: RationalExt, degree: int) -> tuple[FieldElement, ...]:
    """All monic irreducibles of the given degree in R's top variable."""
    if degree < 1:
        raise Unsupported("irreducible polynomials have degree >= 1")
    if not isinstance(R.base, FiniteField):
        raise Unsupported("irreducible enumeration needs a finite base field")
    return _irreducibles_cached(R.base.k, R.var, degree)


def gauss_irreducible_count(q: int, d: int) -> int:
    """Number of monic irreducibles of degree d over GF(q) (necklace formula)."""
    total = 0
    for e in _divisors(d):
        total += _moebius(e) * q ** (d // e)
    return total // d


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _moebius(n: int) -> int:
    m = 1
    for p in _prime_divisors(n):
        if n % (p * p) == 0:
            return 0
        m = -m
    return m


def squarefree_decompose(f: FieldElement) -> list[tuple[FieldElement, int]]:
    """Monic squarefree parts with multiplicities (characteristic-2 aware)."""
    R = _require_poly_over_finite(f)
    B = R.base
    coeffs = f.payload[0]
    if not coeffs:
        raise ZeroPolynomial("cannot decompose the zero polynomial")
    coeffs = pscale(B, coeffs, B.inv_p(coeffs[-1]))
    return [(_poly(R, part), mult) for part, mult in _sff(B, coeffs, 1)]


def _deriv(B, c: tuple) -> tuple:
    return ptrim(B, tuple(c[i] if i % 2 == 1 else B.zero_p() for i in range(1, len(c))))


def _sqrt_poly(B: FiniteField, c: tuple) -> tuple:
    # c lies in F[X^2]; halve exponents and take coefficient roots (F perfect)
    return ptrim(B, tuple(B.sqrt_p(c[i]) for i in range(0, len(c), 2)))


def _sff(B: FiniteField, f: tuple, mult: int) -> list[tuple[tuple, int]]:
    out: list[tuple[tuple, int]] = []
    d = _deriv(B, f)
    if not d:
        # f = g(X)^2 exactly
        if pdeg(f) == 0:
            return out
        return [(part, 2 * m) for part, m in _sff(B, _sqrt_poly(B, f), mult)]
    c = pgcd(B, f, d)
    w = pdivmod(B, f, c)[0]
    i = 1
    while pdeg(w) > 0:
        y = pgcd(B, w, c)
        z = pdivmod(B, w, y)[0]
        if pdeg(z) > 0:
            out.append((z, i * mult))
        w = y
        c = pdivmod(B, c, y)[0]
        i += 1
    if pdeg(c) > 0:
        out.extend((part, 2 * m) for part, m in _sff(B, _sqrt_poly(B, c), mult))
    return out


def factor_univariate(f: FieldElement) -> tuple[FieldElement, list[tuple[FieldElement, int]]]:
    """Leading coefficient and sorted (monic irreducible, multiplicity) pairs."""
    R = _require_poly_over_finite(f)
    B = R.base
    coeffs = f.payload[0]
    if not coeffs:
        raise ZeroPolynomial("cannot factor the zero polynomial")
    lead = FieldElement(B, coeffs[-1])
    work: dict[tuple, int] = {}
    for part, mult in squarefree_decompose(f):
        body = part.payload[0]
        deg_left = pdeg(body)
        d = 1
        while 2 * d <= deg_left:
            for cand in enum_irreducibles(R, d):
                p = cand.payload[0]
                while True:
                    q, r = pdivmod(B, body, p)
                    if r:
                        break
                    body = q
                    work[p] = work.get(p, 0) + mult
                deg_left = pdeg(body)
            d += 1
        if pdeg(body) > 0:
            work[body] = work.get(body, 0) + mult
    factors = [(_poly(R, p), m) for p, m in work.items()]
    factors.sort(key=lambda pm: pm[0].sort_key())
    return lead, factors
