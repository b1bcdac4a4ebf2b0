"""Exact arithmetic over rational linear combinations of square roots.

A value is a finite sum ``c_0 + c_1*sqrt(r_1) + c_2*sqrt(r_2) + ...`` with
rational coefficients and squarefree positive integer radicands (radicand 1
is the rational part).  Square roots of distinct squarefree integers are
linearly independent over the rationals, so equality is a coefficient
comparison, the zero test is exact, and the field is closed under the four
ring operations, inversion and the sign/ReLU activations used by the engines.

Sign determination of a provably nonzero value uses certified dyadic
interval enclosures of each square root, doubling the working precision
until the enclosure excludes zero.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Union

_SIGN_START_BITS = 64
_SIGN_MAX_BITS = 1 << 22
_MAX_INVERT_PRIMES = 12

Rational = Fraction
Coercible = Union["ExactScalar", int, Fraction]


def _squarefree_split(radicand: int) -> tuple[int, int]:
    """Write radicand = square**2 * free with free squarefree."""
    if radicand <= 0:
        raise ValueError(f"radicand must be a positive integer, got {radicand}")
    square, free = 1, 1
    r = radicand
    p = 2
    while p * p <= r:
        if r % p == 0:
            exp = 0
            while r % p == 0:
                r //= p
                exp += 1
            square *= p ** (exp // 2)
            if exp % 2:
                free *= p
        p += 1 if p == 2 else 2
    return square, free * r


def _prime_factors(squarefree: int) -> tuple[int, ...]:
    out = []
    r = squarefree
    p = 2
    while p * p <= r:
        if r % p == 0:
            out.append(p)
            r //= p
        p += 1 if p == 2 else 2
    if r > 1:
        out.append(r)
    return tuple(out)


class ExactScalar:
    """Immutable element of the multi-quadratic field described above."""

    __slots__ = ("_terms", "_hash", "_sign")

    def __init__(self, value: Coercible = 0):
        if isinstance(value, ExactScalar):
            terms = dict(value._terms)
        else:
            q = Fraction(value)
            terms = {1: q} if q else {}
        object.__setattr__(self, "_terms", terms)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_sign", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("ExactScalar is immutable")

    @classmethod
    def _make(cls, terms: dict[int, Fraction]) -> "ExactScalar":
        """Trusted constructor: radicands already squarefree, no zero coefficients."""
        out = cls.__new__(cls)
        object.__setattr__(out, "_terms", terms)
        object.__setattr__(out, "_hash", None)
        object.__setattr__(out, "_sign", None)
        return out

    @classmethod
    def sqrt(cls, radicand: int, coeff: Coercible = 1) -> "ExactScalar":
        """The value coeff*sqrt(radicand); radicand need not be squarefree."""
        return cls.normalize([(radicand, Fraction(coeff) if not isinstance(coeff, ExactScalar) else coeff.as_fraction())])

    @classmethod
    def normalize(cls, raw_terms: Iterable[tuple[int, Coercible]]) -> "ExactScalar":
        """Canonicalize a raw (radicand, coefficient) list.

        Radicands are reduced to squarefree form (sqrt(12) -> 2*sqrt(3)),
        like radicands merged and zero coefficients dropped.
        """
        acc: dict[int, Fraction] = {}
        for radicand, coeff in raw_terms:
            radicand = int(radicand)
            coeff = coeff.as_fraction() if isinstance(coeff, ExactScalar) else Fraction(coeff)
            if not coeff:
                if radicand <= 0:
                    raise ValueError(f"radicand must be a positive integer, got {radicand}")
                continue
            square, free = _squarefree_split(radicand)
            newc = acc.get(free, Fraction(0)) + coeff * square
            if newc:
                acc[free] = newc
            else:
                acc.pop(free, None)
        return cls._make(acc)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_rational(self) -> bool:
        return all(r == 1 for r in self._terms)

    @property
    def rational_part(self) -> Fraction:
        return self._terms.get(1, Fraction(0))

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.rational_part

    def as_int(self) -> int:
        q = self.as_fraction()
        if q.denominator != 1:
            raise ValueError(f"{self} is not an integer")
        return q.numerator

    # -- ring operations --------------------------------------------------

    @staticmethod
    def _coerce(value) -> "ExactScalar | None":
        if isinstance(value, ExactScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return ExactScalar(value)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for r, c in other._terms.items():
            newc = out.get(r, Fraction(0)) + c
            if newc:
                out[r] = newc
            else:
                out.pop(r, None)
        return ExactScalar._make(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar._make({r: -c for r, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for r1, c1 in self._terms.items():
            for r2, c2 in other._terms.items():
                if r1 == 1:
                    r, c = r2, c1 * c2
                elif r2 == 1:
                    r, c = r1, c1 * c2
                elif r1 == r2:
                    r, c = 1, c1 * c2 * r1
                else:
                    g = math.gcd(r1, r2)
                    r = (r1 // g) * (r2 // g)
                    c = c1 * c2 * g
                newc = out.get(r, Fraction(0)) + c
                if newc:
                    out[r] = newc
                else:
                    out.pop(r, None)
        return ExactScalar._make(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        out = ONE
        base = self
        e = exponent
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def invert(self) -> "ExactScalar":
        """Multiplicative inverse, computed via the product of sign-flip conjugates.

        The radicands of self may span at most 12 distinct primes (2**12
        conjugates bound the cost at desk scale).
        """
        if not self._terms:
            raise ZeroDivisionError("division by zero in the surd field")
        if self.is_rational:
            return ExactScalar(Fraction(1) / self.rational_part)
        primes = sorted({p for r in self._terms if r != 1 for p in _prime_factors(r)})
        if len(primes) > _MAX_INVERT_PRIMES:
            raise ValueError(f"radicands span {len(primes)} primes; inversion limit is {_MAX_INVERT_PRIMES}")
        masks = {
            r: sum(1 << i for i, p in enumerate(primes) if r % p == 0)
            for r in self._terms
        }
        conj_product = ONE
        for flip in range(1, 1 << len(primes)):
            conj = ExactScalar._make({
                r: (-c if (masks[r] & flip).bit_count() & 1 else c)
                for r, c in self._terms.items()
            })
            conj_product = conj_product * conj
        norm = self * conj_product
        if not norm.is_rational or norm.rational_part == 0:
            raise ArithmeticError(f"conjugate norm of {self} is not a nonzero rational: {norm}")
        return conj_product * ExactScalar(Fraction(1) / norm.rational_part)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.invert()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.invert()

    # -- equality, ordering, sign -----------------------------------------

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            if self.is_rational:
                h = hash(self.rational_part)
            else:
                h = hash(tuple(sorted(self._terms.items())))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def sign(self) -> int:
        """Exact sign in {-1, 0, +1}."""
        if self._sign is None:
            object.__setattr__(self, "_sign", self._compute_sign())
        return self._sign

    def _compute_sign(self) -> int:
        if not self._terms:
            return 0
        if len(self._terms) == 1:
            ((_, c),) = self._terms.items()
            return 1 if c > 0 else -1
        bits = _SIGN_START_BITS
        while bits <= _SIGN_MAX_BITS:
            lo = Fraction(0)
            hi = Fraction(0)
            scale = 1 << bits
            for r, c in self._terms.items():
                if r == 1:
                    lo += c
                    hi += c
                    continue
                root_floor = math.isqrt(r << (2 * bits))
                root_lo = Fraction(root_floor, scale)
                root_hi = Fraction(root_floor + 1, scale)
                if c > 0:
                    lo += c * root_lo
                    hi += c * root_hi
                else:
                    lo += c * root_hi
                    hi += c * root_lo
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits <<= 1
        raise ArithmeticError(f"sign of {self} undecided at {_SIGN_MAX_BITS} bits")

    def __lt__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() < 0

    def __le__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() <= 0

    def __gt__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() > 0

    def __ge__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self - other).sign() >= 0

    # -- conversion / text --------------------------------------------------

    def __float__(self) -> float:
        return float(sum(float(c) * math.sqrt(r) for r, c in self._terms.items()))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def to_text(self) -> str:
        """Canonical text form: terms by radicand ascending, rational part first."""
        if not self._terms:
            return "0"
        parts: list[str] = []
        for r in sorted(self._terms):
            c = self._terms[r]
            mag = abs(c)
            num = f"{mag.numerator}" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            if r == 1:
                body = num
            elif mag == 1:
                body = f"sqrt({r})"
            else:
                body = f"{num}*sqrt({r})"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    __str__ = to_text

    def __repr__(self):
        return f"ExactScalar({self.to_text()!r})"


_TERM_RE = re.compile(r"^(?P<sign>-)?(?:(?P<coeff>\d+(?:/\d+)?)\*?)?(?:sqrt\((?P<radicand>\d+)\))?$")


def parse_scalar(text: str) -> ExactScalar:
    """Parse the scalar text syntax; whitespace is insignificant.

    Accepted terms: ``a``, ``a/b``, ``a/b*sqrt(r)``, ``sqrt(r)`` with
    optional signs, e.g. ``1/2 + 1/4*sqrt(2)``.  Non-squarefree radicands
    are reduced, so printing the result re-canonicalizes the input.
    """
    compact = "".join(text.split())
    if not compact:
        raise ValueError("empty scalar")
    chunks: list[str] = []
    depth = 0
    start = 0
    for i, ch in enumerate(compact):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced parentheses in scalar {text!r}")
        elif ch in "+-" and depth == 0 and i > start:
            chunks.append(compact[start:i])
            start = i + 1 if ch == "+" else i
    if depth != 0:
        raise ValueError(f"unbalanced parentheses in scalar {text!r}")
    chunks.append(compact[start:])
    raw: list[tuple[int, Fraction]] = []
    for chunk in chunks:
        if chunk in ("", "+", "-"):
            raise ValueError(f"malformed term in scalar {text!r}")
        m = _TERM_RE.match(chunk)
        if not m or (m.group("coeff") is None and m.group("radicand") is None):
            raise ValueError(f"malformed term {chunk!r} in scalar {text!r}")
        coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
        if m.group("sign"):
            coeff = -coeff
        radicand = int(m.group("radicand")) if m.group("radicand") else 1
        raw.append((radicand, coeff))
    return ExactScalar.normalize(raw)


def activate(value: ExactScalar, sigma: str) -> ExactScalar:
    """Apply an activation: ``relu`` keeps positive values, ``sign`` maps to -1/0/+1."""
    if sigma == "relu":
        return value if value.sign() > 0 else ZERO
    if sigma == "sign":
        return ExactScalar(value.sign())
    if sigma == "none":
        return value
    raise ValueError(f"unknown activation {sigma!r}")


ZERO = ExactScalar(0)
ONE = ExactScalar(1)
