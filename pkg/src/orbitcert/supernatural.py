"""Exact arithmetic on supernatural numbers.

A supernatural number is a formal product prod_p p^(e_p) over primes with
exponents in {0, 1, 2, ...} union {infinity}.  Only finitely many primes may
carry a nonzero exponent here; that keeps every value finitely describable
while still covering all products of the form n * prod_p p^inf.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

INF = math.inf

_TERM_RE = re.compile(r"(\d+)(?:\^(\d+|inf))?\Z")


class ParseError(ValueError):
    """Raised for malformed or out-of-domain textual input."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of a natural number >= 1."""
    if n < 1:
        raise ValueError(f"expected a natural number >= 1, got {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _check_exponent(p: int, e) -> None:
    if e is INF:
        return
    if isinstance(e, bool) or not isinstance(e, int):
        raise ValueError(f"exponent of {p} must be an int or INF, got {e!r}")
    if e < 1:
        raise ValueError(f"exponent of {p} must be >= 1 in canonical form")


@dataclass(frozen=True)
class SupernaturalNumber:
    """Canonical form: primes strictly ascending, exponents int >= 1 or INF."""

    factors: tuple[tuple[int, int | float], ...] = ()

    def __post_init__(self):
        last = 1
        for p, e in self.factors:
            if not _is_prime(p):
                raise ValueError(f"{p} is not prime")
            if p <= last:
                raise ValueError("primes must be strictly ascending")
            _check_exponent(p, e)
            last = p

    @staticmethod
    def from_map(m: dict[int, int | float]) -> "SupernaturalNumber":
        items = tuple(sorted((p, e) for p, e in m.items() if e != 0))
        return SupernaturalNumber(items)

    @staticmethod
    def from_int(n: int) -> "SupernaturalNumber":
        return SupernaturalNumber.from_map({p: e for p, e in factorize(n).items()})

    def v(self, p: int) -> int | float:
        """Exponent of the prime p (0 when absent)."""
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    @property
    def support(self) -> frozenset[int]:
        return frozenset(p for p, _ in self.factors)

    def __mul__(self, other: "SupernaturalNumber") -> "SupernaturalNumber":
        return mul(self, other)

    def __str__(self) -> str:
        return sn_str(self)


ONE = SupernaturalNumber()


def is_supernatural(a: SupernaturalNumber) -> bool:
    """True when some exponent is infinite, i.e. the value is not a natural."""
    return any(e is INF for _, e in a.factors)


def to_int(a: SupernaturalNumber) -> int:
    """Integer value of a finite supernatural number."""
    if is_supernatural(a):
        raise ValueError(f"{a} has an infinite exponent")
    n = 1
    for p, e in a.factors:
        n *= p ** e
    return n


def mul(a: SupernaturalNumber, b: SupernaturalNumber) -> SupernaturalNumber:
    out: dict[int, int | float] = dict(a.factors)
    for p, e in b.factors:
        cur = out.get(p, 0)
        out[p] = INF if (cur is INF or e is INF) else cur + e
    return SupernaturalNumber.from_map(out)


def product(ms: tuple[SupernaturalNumber, ...] | list[SupernaturalNumber]) -> SupernaturalNumber:
    out = ONE
    for m in ms:
        out = mul(out, m)
    return out


def divides(a: SupernaturalNumber, b: SupernaturalNumber) -> bool:
    """Exponentwise a | b."""
    return all(e <= b.v(p) for p, e in a.factors)


def gcd(a: SupernaturalNumber, b: SupernaturalNumber) -> SupernaturalNumber:
    out = {p: min(e, b.v(p)) for p, e in a.factors}
    return SupernaturalNumber.from_map(out)


def lcm(a: SupernaturalNumber, b: SupernaturalNumber) -> SupernaturalNumber:
    out: dict[int, int | float] = dict(a.factors)
    for p, e in b.factors:
        out[p] = max(out.get(p, 0), e)
    return SupernaturalNumber.from_map(out)


def div_exact(a: SupernaturalNumber, b: SupernaturalNumber) -> SupernaturalNumber:
    """Quotient a / b for a finite divisor b with b | a.

    Infinite divisors are rejected: inf - inf has no well-defined value.
    """
    if is_supernatural(b):
        raise ValueError(f"divisor {b} must be finite")
    if not divides(b, a):
        raise ValueError(f"{b} does not divide {a}")
    out: dict[int, int | float] = dict(a.factors)
    for p, e in b.factors:
        cur = out[p]
        out[p] = INF if cur is INF else cur - e
    return SupernaturalNumber.from_map(out)


def class_key(a: SupernaturalNumber) -> frozenset[int]:
    """The set of primes with infinite exponent."""
    return frozenset(p for p, e in a.factors if e is INF)


def lesssim(a: SupernaturalNumber, b: SupernaturalNumber) -> bool:
    """a | n*b for some natural n; equivalently the infinite supports nest."""
    return class_key(a) <= class_key(b)


def sim(a: SupernaturalNumber, b: SupernaturalNumber) -> bool:
    """Mutual divisibility up to finite multipliers."""
    return class_key(a) == class_key(b)


def sim_witness(a: SupernaturalNumber, b: SupernaturalNumber) -> tuple[int, int]:
    """Smallest naturals (m, n) with m*a = n*b, for sim-equivalent inputs."""
    if not sim(a, b):
        raise ValueError(f"{a} and {b} are not equivalent up to finite multipliers")
    m = 1
    n = 1
    for p in sorted(a.support | b.support):
        ea, eb = a.v(p), b.v(p)
        if ea is INF:
            continue
        if ea > eb:
            n *= p ** (ea - eb)
        elif eb > ea:
            m *= p ** (eb - ea)
    return m, n


def parse_sn(text: str) -> SupernaturalNumber:
    """Parse expressions like ``2^inf*3^2`` or ``12``.

    Whitespace is ignored.  A base written with an exponent must be prime;
    bare naturals are factorized.  The value 0 is out of domain.
    """
    s = re.sub(r"\s+", "", text)
    if not s:
        raise ParseError("empty supernatural-number expression")
    out = ONE
    for term in s.split("*"):
        m = _TERM_RE.match(term)
        if m is None:
            raise ParseError(f"malformed term {term!r}")
        base = int(m.group(1))
        if m.group(2) is None:
            if base == 0:
                raise ParseError("0 is not a supernatural number")
            out = mul(out, SupernaturalNumber.from_int(base))
            continue
        if not _is_prime(base):
            raise ParseError(f"base {base} with an exponent must be prime")
        if m.group(2) == "inf":
            out = mul(out, SupernaturalNumber(((base, INF),)))
        else:
            e = int(m.group(2))
            if e < 1:
                raise ParseError(f"exponent must be >= 1 or inf, got {e}")
            out = mul(out, SupernaturalNumber(((base, e),)))
    return out


def parse_sn_list(text: str) -> tuple[SupernaturalNumber, ...]:
    """Parse a comma-separated list of supernatural-number expressions."""
    parts = text.split(",")
    if any(not p.strip() for p in parts):
        raise ParseError(f"malformed list {text!r}")
    return tuple(parse_sn(p) for p in parts)


def sn_str(a: SupernaturalNumber) -> str:
    """Canonical rendering: primes ascending, ``p^e`` terms joined by ``*``."""
    if not a.factors:
        return "1"
    terms = []
    for p, e in a.factors:
        if e is INF:
            terms.append(f"{p}^inf")
        elif e == 1:
            terms.append(str(p))
        else:
            terms.append(f"{p}^{e}")
    return "*".join(terms)
