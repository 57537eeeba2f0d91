"""Exact sparse bivariate polynomial arithmetic over the rationals.

A polynomial in x, y is stored as a dictionary mapping exponent pairs
``(i, j)`` to nonzero ``Fraction`` coefficients.  All arithmetic is exact;
no floating-point value ever enters a symbolic operation.  This is what
makes identity checks (equality of term maps) fully reliable.

Terms are ordered graded-lexicographically for printing and for leading
coefficients: higher total degree first, ties broken by higher x power.
The degree of the zero polynomial is the sentinel ``MINUS_INFINITY``
(``float("-inf")``), never an integer, so accidental arithmetic on it
cannot masquerade as a real degree.

``HomogeneousPoly`` wraps a polynomial whose terms all share one total
degree; gcd, radical (squarefree part) and exact division for homogeneous
polynomials work by dividing out the maximal x power, dehomogenizing to a
single variable t = y/x, running the univariate algorithm over Q, and
rehomogenizing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as _int_gcd
from types import MappingProxyType
from typing import Iterator, Mapping, Union

MINUS_INFINITY = float("-inf")

Scalar = Union[int, Fraction]


class BivariatePoly:
    """Immutable sparse polynomial in x and y with Fraction coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], Scalar] | None = None):
        clean: dict[tuple[int, int], Fraction] = {}
        if terms:
            for (i, j), coeff in terms.items():
                if i < 0 or j < 0:
                    raise ValueError(f"negative exponent in monomial ({i}, {j})")
                c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
                if c:
                    clean[(int(i), int(j))] = c
        self._terms = clean

    # -- construction helpers -------------------------------------------

    @classmethod
    def zero(cls) -> "BivariatePoly":
        return _ZERO

    @classmethod
    def one(cls) -> "BivariatePoly":
        return _ONE

    @classmethod
    def constant(cls, c: Scalar) -> "BivariatePoly":
        return cls({(0, 0): Fraction(c)})

    @classmethod
    def variable(cls, name: str) -> "BivariatePoly":
        if name == "x":
            return _X
        if name == "y":
            return _Y
        raise ValueError(f"unknown variable {name!r} (expected 'x' or 'y')")

    @classmethod
    def monomial(cls, i: int, j: int, c: Scalar = 1) -> "BivariatePoly":
        return cls({(i, j): Fraction(c)})

    # -- basic queries ---------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, int], Fraction]:
        """Read-only view of the term map (no zero coefficients stored)."""
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[tuple[int, int], Fraction]]:
        return iter(self._terms.items())

    @property
    def degree(self):
        """Total degree; MINUS_INFINITY for the zero polynomial."""
        if not self._terms:
            return MINUS_INFINITY
        return max(i + j for i, j in self._terms)

    def coefficient(self, i: int, j: int) -> Fraction:
        return self._terms.get((i, j), Fraction(0))

    def leading_term(self) -> tuple[tuple[int, int], Fraction]:
        """Graded-lex leading term (max total degree, then max x power)."""
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        key = max(self._terms, key=lambda e: (e[0] + e[1], e[0]))
        return key, self._terms[key]

    def is_homogeneous(self) -> bool:
        if not self._terms:
            return True
        degs = {i + j for i, j in self._terms}
        return len(degs) == 1

    # -- equality / hashing ----------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, BivariatePoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == BivariatePoly.constant(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- ring operations ---------------------------------------------------

    def __add__(self, other) -> "BivariatePoly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for key, c in other._terms.items():
            s = out.get(key)
            if s is None:
                out[key] = c
            else:
                s = s + c
                if s:
                    out[key] = s
                else:
                    del out[key]
        return _from_clean(out)

    __radd__ = __add__

    def __neg__(self) -> "BivariatePoly":
        return _from_clean({k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "BivariatePoly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "BivariatePoly":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "BivariatePoly":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return _ZERO
            return _from_clean({k: v * c for k, v in self._terms.items()})
        if not isinstance(other, BivariatePoly):
            return NotImplemented
        return _from_clean(_mul_terms(self._terms, other._terms))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BivariatePoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = _ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus ----------------------------------------------------------

    def partial(self, var: str) -> "BivariatePoly":
        """Formal partial derivative with respect to 'x' or 'y'."""
        if var == "x":
            return _from_clean(
                {(i - 1, j): c * i for (i, j), c in self._terms.items() if i > 0}
            )
        if var == "y":
            return _from_clean(
                {(i, j - 1): c * j for (i, j), c in self._terms.items() if j > 0}
            )
        raise ValueError(f"unknown variable {var!r} (expected 'x' or 'y')")

    def integrate_x(self) -> "BivariatePoly":
        """Antiderivative in x with zero constant term (term by term)."""
        return _from_clean(
            {(i + 1, j): c / (i + 1) for (i, j), c in self._terms.items()}
        )

    # -- evaluation ----------------------------------------------------------

    def eval_exact(self, x: Scalar, y: Scalar) -> Fraction:
        """Exact evaluation at a rational point (Horner in x, then y)."""
        if not self._terms:
            return Fraction(0)
        xf, yf = Fraction(x), Fraction(y)
        rows: dict[int, dict[int, Fraction]] = {}
        for (i, j), c in self._terms.items():
            rows.setdefault(i, {})[j] = c
        acc = Fraction(0)
        for i in range(max(rows), -1, -1):
            acc *= xf
            row = rows.get(i)
            if row:
                r = Fraction(0)
                for j in range(max(row), -1, -1):
                    r = r * yf + row.get(j, 0)
                acc += r
        return acc

    def eval_float(self, x: float, y: float) -> float:
        """Floating evaluation of the exact polynomial.

        Raises OverflowError if the result (or an intermediate) is not
        finite, so silent infinities never reach the caller.
        """
        import math

        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError("eval_float requires finite inputs")
        if not self._terms:
            return 0.0
        rows: dict[int, dict[int, float]] = {}
        for (i, j), c in self._terms.items():
            rows.setdefault(i, {})[j] = float(c)
        acc = 0.0
        for i in range(max(rows), -1, -1):
            acc *= x
            row = rows.get(i)
            if row:
                r = 0.0
                for j in range(max(row), -1, -1):
                    r = r * y + row.get(j, 0.0)
                acc += r
        if not math.isfinite(acc):
            raise OverflowError("floating evaluation overflowed to a non-finite value")
        return acc

    # -- printing ----------------------------------------------------------

    def to_string(self) -> str:
        """Canonical text form, graded-lex term order, 'num/den' coefficients."""
        if not self._terms:
            return "0"
        keys = sorted(self._terms, key=lambda e: (-(e[0] + e[1]), -e[0]))
        return " + ".join(f"{self._terms[k]}x^{k[0]}y^{k[1]}" for k in keys)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"BivariatePoly({self.to_string()!r})"


def _from_clean(terms: dict[tuple[int, int], Fraction]) -> BivariatePoly:
    """Build from a dict that may still contain zeros (internal fast path)."""
    p = BivariatePoly.__new__(BivariatePoly)
    p._terms = {k: c for k, c in terms.items() if c}
    return p


def _coerce(value) -> BivariatePoly:
    if isinstance(value, BivariatePoly):
        return value
    if isinstance(value, (int, Fraction)):
        return BivariatePoly.constant(value)
    return NotImplemented


_ZERO = BivariatePoly()
_ONE = BivariatePoly({(0, 0): Fraction(1)})
_X = BivariatePoly({(1, 0): Fraction(1)})
_Y = BivariatePoly({(0, 1): Fraction(1)})

X = _X
Y = _Y
ONE = _ONE
ZERO = _ZERO


# -- multiplication core ----------------------------------------------------


def _scaled(terms: Mapping[tuple[int, int], Fraction]) -> tuple[dict, int]:
    """Clear denominators: return (integer term map, common denominator)."""
    den = 1
    for c in terms.values():
        d = c.denominator
        den = den * d // _int_gcd(den, d)
    if den == 1:
        return {k: c.numerator for k, c in terms.items()}, 1
    return {k: c.numerator * (den // c.denominator) for k, c in terms.items()}, den


def _mul_terms(a: Mapping, b: Mapping) -> dict[tuple[int, int], Fraction]:
    """Convolve term maps over cleared denominators.

    Integer accumulation avoids a gcd-reduction per partial product; the
    Fractions are only rebuilt (and reduced) once per result term.
    """
    if not a or not b:
        return {}
    ia, da = _scaled(a)
    ib, db = _scaled(b)
    prod: dict[tuple[int, int], int] = {}
    get = prod.get
    for (i, j), ca in ia.items():
        for (k, l), cb in ib.items():
            key = (i + k, j + l)
            prod[key] = get(key, 0) + ca * cb
    den = da * db
    return {k: Fraction(n, den) for k, n in prod.items() if n}


# -- composition --------------------------------------------------------------


def compose(
    outer: BivariatePoly, sub_x: BivariatePoly, sub_y: BivariatePoly
) -> BivariatePoly:
    """Exact substitution: outer(sub_x(x, y), sub_y(x, y))."""
    return _compose_cached(outer, sub_x, sub_y, [_ONE])


def _compose_cached(
    outer: BivariatePoly,
    sub_x: BivariatePoly,
    sub_y: BivariatePoly,
    ypow: list[BivariatePoly],
) -> BivariatePoly:
    """Compose with a caller-owned cache of sub_y powers.

    Horner over the x exponent keeps intermediate products small; rows in y
    reuse cached powers of sub_y so multiple compositions against the same
    substitution pair (e.g. both components of a map) share the work.
    """
    if outer.is_zero():
        return _ZERO
    rows: dict[int, dict[int, Fraction]] = {}
    max_j = 0
    for (i, j), c in outer._terms.items():
        rows.setdefault(i, {})[j] = c
        if j > max_j:
            max_j = j
    while len(ypow) <= max_j:
        ypow.append(ypow[-1] * sub_y)

    def row_value(row: dict[int, Fraction]) -> BivariatePoly:
        acc: dict[tuple[int, int], Fraction] = {}
        for j, c in row.items():
            for key, cc in ypow[j]._terms.items():
                prev = acc.get(key)
                acc[key] = c * cc if prev is None else prev + c * cc
        return _from_clean(acc)

    result = _ZERO
    for i in range(max(rows), -1, -1):
        if result._terms:
            result = result * sub_x
        row = rows.get(i)
        if row:
            result = result + row_value(row)
    return result


# -- parsing -------------------------------------------------------------------

_TERM_RE = re.compile(r"^(-?\d+(?:/\d+)?)x\^(\d+)y\^(\d+)$")


def parse_poly(text: str) -> BivariatePoly:
    """Parse the canonical serialization produced by ``to_string``."""
    s = text.strip()
    if s == "0":
        return _ZERO
    terms: dict[tuple[int, int], Fraction] = {}
    for part in s.split(" + "):
        m = _TERM_RE.match(part.strip())
        if not m:
            raise ValueError(f"malformed polynomial term {part!r}")
        key = (int(m.group(2)), int(m.group(3)))
        if key in terms:
            raise ValueError(f"duplicate monomial x^{key[0]}y^{key[1]}")
        terms[key] = Fraction(m.group(1))
    return BivariatePoly(terms)


# -- homogeneous layer ----------------------------------------------------------


@dataclass(frozen=True)
class HomogeneousPoly:
    """A bivariate polynomial all of whose terms share one total degree.

    The zero polynomial is allowed with an explicitly declared degree
    (the constraint is then vacuous).
    """

    poly: BivariatePoly
    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("homogeneous degree must be nonnegative")
        for (i, j) in self.poly.terms:
            if i + j != self.degree:
                raise ValueError(
                    f"term x^{i}y^{j} has degree {i + j}, expected {self.degree}"
                )

    @classmethod
    def from_poly(cls, p: BivariatePoly, degree: int | None = None) -> "HomogeneousPoly":
        if degree is None:
            if p.is_zero():
                raise ValueError("zero polynomial needs an explicit degree")
            degree = int(p.degree)
        return cls(p, degree)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def to_string(self) -> str:
        return self.poly.to_string()

    def __str__(self) -> str:
        return self.to_string()


# -- univariate helpers (dense Fraction lists, index = power of t) ---------------


def _utrim(u: list[Fraction]) -> list[Fraction]:
    while u and not u[-1]:
        u.pop()
    return u


def _udivmod(u: list[Fraction], v: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    if not v:
        raise ZeroDivisionError("univariate division by zero")
    r = list(u)
    q = [Fraction(0)] * max(len(r) - len(v) + 1, 0)
    lead = v[-1]
    for k in range(len(r) - len(v), -1, -1):
        factor = r[k + len(v) - 1] / lead
        if factor:
            q[k] = factor
            for idx, c in enumerate(v):
                r[k + idx] -= factor * c
    return _utrim(q), _utrim(r)


def _ugcd(u: list[Fraction], v: list[Fraction]) -> list[Fraction]:
    a, b = _utrim(list(u)), _utrim(list(v))
    while b:
        _, r = _udivmod(a, b)
        a, b = b, r
    if not a:
        raise ValueError("gcd of two zero polynomials is undefined")
    lead = a[-1]
    return [c / lead for c in a]


def _uderiv(u: list[Fraction]) -> list[Fraction]:
    return _utrim([u[k] * k for k in range(1, len(u))])


def _dehomogenize(h: HomogeneousPoly) -> tuple[int, list[Fraction]]:
    """Split off the maximal x power, then substitute x = 1.

    Returns (xpow, coeffs) with coeffs[j] the coefficient of t^j; the
    remaining univariate polynomial has exact degree h.degree - xpow.
    """
    if h.is_zero():
        raise ValueError("cannot dehomogenize the zero polynomial")
    terms = h.poly.terms
    xpow = min(i for i, _ in terms)
    d = h.degree - xpow
    coeffs = [Fraction(0)] * (d + 1)
    for (_, j), c in terms.items():
        coeffs[j] = c
    return xpow, coeffs


def _rehomogenize(coeffs: list[Fraction], xpow: int = 0) -> HomogeneousPoly:
    if not coeffs:
        raise ValueError("cannot rehomogenize the zero polynomial")
    d = len(coeffs) - 1
    terms = {
        (xpow + d - j, j): c for j, c in enumerate(coeffs) if c
    }
    return HomogeneousPoly(BivariatePoly(terms), xpow + d)


def _monic_gradedlex(h: HomogeneousPoly) -> HomogeneousPoly:
    _, lead = h.poly.leading_term()
    if lead == 1:
        return h
    return HomogeneousPoly(h.poly * (1 / lead), h.degree)


def gcd_homogeneous(p: HomogeneousPoly, q: HomogeneousPoly) -> HomogeneousPoly:
    """GCD of nonzero homogeneous polynomials, graded-lex leading coeff 1."""
    if p.is_zero() or q.is_zero():
        raise ValueError("gcd_homogeneous requires nonzero inputs")
    xp, u = _dehomogenize(p)
    xq, v = _dehomogenize(q)
    g = _ugcd(u, v)
    return _monic_gradedlex(_rehomogenize(g, xpow=min(xp, xq)))


def div_homogeneous(p: HomogeneousPoly, d: HomogeneousPoly) -> HomogeneousPoly:
    """Exact quotient p / d; raises ValueError if d does not divide p."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return HomogeneousPoly(_ZERO, max(p.degree - d.degree, 0))
    xp, u = _dehomogenize(p)
    xd, v = _dehomogenize(d)
    if xp < xd:
        raise ValueError("not divisible: x-power of divisor exceeds dividend's")
    q, r = _udivmod(u, v)
    if r:
        raise ValueError("not divisible: nonzero univariate remainder")
    return _rehomogenize(q, xpow=xp - xd)


def radical_homogeneous(p: HomogeneousPoly) -> HomogeneousPoly:
    """Squarefree part of a nonzero homogeneous polynomial, normalized.

    Satisfies radical(r^m) == r for squarefree r with graded-lex leading
    coefficient 1.
    """
    if p.is_zero():
        raise ValueError("radical_homogeneous requires a nonzero input")
    xp, u = _dehomogenize(p)
    du = _uderiv(u)
    if du:
        g = _ugcd(u, du)
        s, r = _udivmod(u, g)
        assert not r, "gcd must divide the polynomial"
    else:
        s = [Fraction(1)]  # constant after splitting off x powers
    return _monic_gradedlex(_rehomogenize(s, xpow=1 if xp > 0 else 0))
