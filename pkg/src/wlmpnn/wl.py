"""Colour refinement and its encoding as a label-injection message passer.

The refinement itself uses deterministic dictionary encoding: the pair
(own class, sorted neighbour classes) is mapped to dense integer ids by
first occurrence, so traces are reproducible and diffable.

The second half realizes the same computation arithmetically: labels are
injected into rationals whose base-(n+1) digits recover neighbour multisets
after summation.  The injection goes scalar -> (integer polynomial, two
rationals) -> prime-power product -> Cantor tuple; it explodes quickly and
is guarded, so it is exercised on micro domains only.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterable, Sequence

from .graphs import Label, LabelledGraph, Labelling, Partition, partition_of
from .surd import ExactScalar, _prime_factors

ENCODING_GUARD = 10**6


class EncodingLimitError(ValueError):
    """The injection index outgrew the desk-scale magnitude guard."""


class NotInImageError(ValueError):
    """A rational is not a valid digit encoding of any multiset."""


# -- colour refinement -------------------------------------------------------


@dataclass(frozen=True)
class WlTrace:
    """Refinement history; rounds[0] is the initial partition."""

    rounds: tuple[Partition, ...]
    stabilized_at: int | None

    @property
    def partitions(self) -> tuple[Partition, ...]:
        return self.rounds

    def to_json(self) -> dict:
        return {
            "rounds": [list(p.class_of) for p in self.rounds],
            "stabilized_at": self.stabilized_at,
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def wl_step(g: LabelledGraph, current: Partition) -> Partition:
    """One refinement round: split by (own class, sorted neighbour classes)."""
    if current.n != g.n:
        raise ValueError(f"partition covers {current.n} vertices, graph has {g.n}")
    signatures = []
    for v in range(1, g.n + 1):
        own = current.class_of[v - 1]
        neighbour_classes = tuple(sorted(current.class_of[u - 1] for u in g.neighbors(v)))
        signatures.append((own, neighbour_classes))
    return Partition.from_keys(signatures)


def wl_run(g: LabelledGraph, max_rounds: int | None = None) -> WlTrace:
    """Iterate wl_step until the class count stops growing (or max_rounds)."""
    rounds = [partition_of(g.initial_labelling())]
    stabilized = None
    t = 0
    while stabilized is None and (max_rounds is None or t < max_rounds):
        nxt = wl_step(g, rounds[-1])
        rounds.append(nxt)
        t += 1
        if nxt.num_classes == rounds[-2].num_classes:
            stabilized = t
    return WlTrace(tuple(rounds), stabilized)


def wl_partitions(g: LabelledGraph, rounds: int) -> list[Partition]:
    """Exactly `rounds` refinement steps (idempotent past the stable colouring)."""
    out = [partition_of(g.initial_labelling())]
    for _ in range(rounds):
        out.append(wl_step(g, out[-1]))
    return out


# -- injection into rationals -------------------------------------------------

_PRIMES: list[int] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def _prime(index: int) -> int:
    """1-based prime lookup with a growing table."""
    while len(_PRIMES) < index:
        candidate = _PRIMES[-1] + 2
        while any(candidate % p == 0 for p in _PRIMES if p * p <= candidate):
            candidate += 2
        _PRIMES.append(candidate)
    return _PRIMES[index - 1]


def _prime_power(slot: int, z: int) -> int:
    if z >= 0:
        return _prime(2 * slot) ** z
    return _prime(2 * slot + 1) ** (-z)


def alpha_encode(coeffs: Sequence[int], n1: int, n2: int, d1: int, d2: int) -> int:
    """Injective map from (integer polynomial, two rationals) to positive integers.

    Slot i holds z via the 2i-th prime for z >= 0 and the (2i+1)-th prime
    for z < 0; the two rationals occupy slots 1..4 and coefficient j slot
    j+5.  Trailing zero coefficients are stripped so equal polynomials agree.
    """
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    value = _prime_power(1, n1) * _prime_power(2, n2) * _prime_power(3, d1) * _prime_power(4, d2)
    for j, a in enumerate(coeffs):
        value *= _prime_power(j + 5, a)
    return value


def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_tuple(values: Sequence[int]) -> int:
    if not values:
        raise ValueError("cantor_tuple needs at least one value")
    return reduce(cantor_pair, values)


def _floor_exact(x: ExactScalar) -> int:
    guess = math.floor(float(x))
    while x < guess:
        guess -= 1
    while x >= guess + 1:
        guess += 1
    return guess


def _simplest_in_open(lo: ExactScalar, hi: ExactScalar) -> Fraction:
    """Smallest-denominator rational strictly between lo and hi (Stern-Brocot walk)."""
    if not lo < hi:
        raise ValueError("empty interval")
    if lo.sign() < 0 and hi.sign() > 0:
        return Fraction(0)
    if hi.sign() <= 0:
        return -_simplest_in_open(-hi, -lo)
    floor_lo = _floor_exact(lo)
    candidate = floor_lo + 1
    if lo < candidate < hi:
        return Fraction(candidate)
    # both strictly inside (floor_lo, floor_lo + 1); recurse on reciprocals
    shifted_lo = lo - candidate + 1  # lo - floor_lo
    shifted_hi = hi - candidate + 1
    if shifted_lo.is_zero:
        inv = shifted_hi.invert()
        k = _floor_exact(inv) + 1
        if inv >= k:
            k += 1
        return floor_lo + Fraction(1, k)
    inner = _simplest_in_open(shifted_hi.invert(), shifted_lo.invert())
    return floor_lo + 1 / inner


def _conjugates(x: ExactScalar) -> list[ExactScalar]:
    terms = x.terms
    primes = sorted({p for r in terms if r != 1 for p in _prime_factors(r)})
    masks = {r: sum(1 << i for i, p in enumerate(primes) if r % p == 0) for r in terms}
    out = []
    for flip in range(1 << len(primes)):
        out.append(
            ExactScalar.normalize(
                (r, -c if (masks[r] & flip).bit_count() & 1 else c) for r, c in terms.items()
            )
        )
    return out


def scalar_representation(x: ExactScalar) -> tuple[tuple[int, ...], int, int, int, int]:
    """Canonical (polynomial coefficients, n1, n2, d1, d2) encoding of a scalar.

    Rationals n/d use no polynomial terms and the pair (n/d, 0/1).  Irrational
    values use the expanded product of (T - conjugate) over all sign-flip
    conjugates, made integral and primitive, plus the simplest rational
    interval isolating the value from its other conjugates.
    """
    if x.is_rational:
        q = x.rational_part
        return ((), q.numerator, 0, q.denominator, 1)
    conjugates = _conjugates(x)
    poly: list[ExactScalar] = [ExactScalar(1)]
    for root in conjugates:
        shifted = [ExactScalar(0)] + poly  # multiply by T
        for i, coeff in enumerate(poly):
            shifted[i] = shifted[i] - root * coeff
        poly = shifted
    fracs = [c.as_fraction() for c in poly]
    denom_lcm = 1
    for f in fracs:
        denom_lcm = denom_lcm * f.denominator // math.gcd(denom_lcm, f.denominator)
    ints = [int(f * denom_lcm) for f in fracs]
    content = 0
    for a in ints:
        content = math.gcd(content, a)
    ints = [a // content for a in ints]
    if ints[-1] < 0:
        ints = [-a for a in ints]
    distinct = sorted(set(conjugates))
    pos = distinct.index(x)
    below = distinct[pos - 1] if pos > 0 else x - 1
    above = distinct[pos + 1] if pos + 1 < len(distinct) else x + 1
    r1 = _simplest_in_open(below, x)
    r2 = _simplest_in_open(x, above)
    return (tuple(ints), r1.numerator, r2.numerator, r1.denominator, r2.denominator)


def scalar_index(x: ExactScalar) -> int:
    coeffs, n1, n2, d1, d2 = scalar_representation(x)
    return alpha_encode(coeffs, n1, n2, d1, d2)


def label_tau(row: Label, guard: int = ENCODING_GUARD) -> int:
    """Injective positive-integer index of a label row, guarded at desk scale."""
    indices = []
    for x in row:
        idx = scalar_index(x)
        if idx > guard:
            raise EncodingLimitError(f"component index {idx} exceeds the guard {guard}")
        indices.append(idx)
    tau = indices[0]
    for nxt in indices[1:]:
        tau = cantor_pair(tau, nxt)
        if tau > guard:
            raise EncodingLimitError(f"tuple index {tau} exceeds the guard {guard}")
    return tau


TauFn = Callable[[Label], int]


def h_inject(row: Label, n: int, tau: TauFn = label_tau) -> Fraction:
    """The injection row -> 1/(n+1)**tau(row); a single base-(n+1) digit."""
    return Fraction(1, (n + 1) ** tau(row))


def phi_sum(bag: Iterable[Label], n: int, tau: TauFn = label_tau) -> Fraction:
    """Exact sum of h_inject over a multiset of at most n rows."""
    rows = list(bag)
    if len(rows) > n:
        raise ValueError(f"multiset of size {len(rows)} exceeds the digit bound n = {n}")
    total = Fraction(0)
    for row in rows:
        total += h_inject(row, n, tau)
    return total


def phi_inverse(
    value: Fraction,
    n: int,
    dictionary: Sequence[Label],
    tau: TauFn = label_tau,
) -> list[Label]:
    """Recover the multiset from its digit sum, given the candidate labels.

    Raises NotInImageError when the value has a digit at a position no
    dictionary label occupies, or is otherwise not an exact digit sum.
    """
    value = Fraction(value)
    if value < 0 or value >= 1:
        raise NotInImageError(f"{value} lies outside [0, 1)")
    if value == 0:
        return []
    positions: dict[int, Label] = {}
    for row in dictionary:
        t = tau(row)
        if t in positions and positions[t] != row:
            raise ValueError("dictionary labels collide under tau")
        positions[t] = row
    if not positions:
        raise NotInImageError("nonzero value with an empty dictionary")
    base = n + 1
    max_tau = max(positions)
    scaled = value * base**max_tau
    if scaled.denominator != 1:
        raise NotInImageError(f"{value} is not supported on the dictionary digit positions")
    scaled_int = scaled.numerator
    out: list[Label] = []
    consumed = 0
    for t in sorted(positions):
        digit = (scaled_int // base ** (max_tau - t)) % base
        consumed += digit * base ** (max_tau - t)
        out.extend([positions[t]] * digit)
    if consumed != scaled_int:
        raise NotInImageError(f"{value} has digits outside the dictionary positions")
    return out


def encoded_wl_spec(g: LabelledGraph, rounds: int):
    """The refinement as an anonymous message passer over injected rationals.

    Built through the combination/aggregation wrapping: the per-element map
    injects the neighbour label into a rational digit (recording every label
    it sees), the aggregated sum is decoded back into the neighbour multiset
    against the recorded candidates, and the combination applies a fresh-id
    dictionary hash to the (own label, multiset) pair.  Labels from round 1
    on are 1-dimensional dictionary ids.  Decoding is sound because every
    vertex is some vertex's neighbour (no isolated vertices), so by the
    engine's messages-before-updates contract every current label has been
    recorded before any decode runs; stale candidates contribute zero digits.
    """
    from .mpnn import wrap_comb_aggr

    n = g.n
    seen: dict[Label, None] = {}
    hash_state: dict = {}

    def aggr_h(y: Label) -> Label:
        seen.setdefault(y, None)
        return (ExactScalar(h_inject(y, n)),)

    def aggr_g(total: Label):
        return tuple(sorted(phi_inverse(total[0].as_fraction(), n, list(seen))))

    def comb(x: Label, bag) -> Label:
        key = (x, bag)
        if key not in hash_state:
            hash_state[key] = len(hash_state)
        return (ExactScalar(hash_state[key]),)

    return wrap_comb_aggr(comb, aggr_h, aggr_g, rounds)
