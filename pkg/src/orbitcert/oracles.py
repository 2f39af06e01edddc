"""Independent brute-force oracles used to cross-check the fast paths.

Everything here is deliberately written against definitions (minors, element
orders, exhaustive partition search) rather than reusing the algorithms under
test, and is only suitable for desk-scale inputs.
"""
from __future__ import annotations

from itertools import combinations, product
from math import gcd as igcd

from .intmat import FiniteAbelianGroup, IntMatrix, matrix_gcd_of_minors
from .supernatural import (
    INF,
    SupernaturalNumber,
    class_key,
    is_supernatural,
)


def snf_diagonal_by_minors(a: IntMatrix) -> tuple[int, ...]:
    """Expected Smith diagonal: d_1*...*d_k equals the gcd of all k x k minors."""
    out = []
    prev = 1
    for k in range(1, min(a.rows, a.cols) + 1):
        g = matrix_gcd_of_minors(a, k)
        if g == 0:
            out.extend([0] * (min(a.rows, a.cols) - len(out)))
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


def element_orders(group: FiniteAbelianGroup, limit: int = 10**5) -> dict[int, int]:
    """Multiset (as counts) of element orders of prod Z/d, by enumeration."""
    if group.cardinality > limit:
        raise ValueError("group too large for enumeration")
    counts: dict[int, int] = {}
    for elem in product(*(range(d) for d in group.orders)):
        o = 1
        for x, d in zip(elem, group.orders):
            if x:
                o = o * (d // igcd(x, d)) // igcd(o, d // igcd(x, d))
        counts[o] = counts.get(o, 0) + 1
    return counts


def fab_isomorphic_bruteforce(a: FiniteAbelianGroup, b: FiniteAbelianGroup) -> bool:
    """Finite abelian groups are isomorphic iff their element-order profiles match."""
    if a.cardinality != b.cardinality:
        return False
    return element_orders(a) == element_orders(b)


def _common_divisor_candidates(
    members: list[SupernaturalNumber], key: frozenset[int]
) -> list[SupernaturalNumber]:
    """All L with the given infinite support such that every member is a
    finite multiple of L with multiplier coprime to L."""
    finite_primes = sorted(
        {p for m in members for p in m.support if m.v(p) is not INF} - key
    )
    per_prime: list[list[tuple[int, int]]] = []
    for p in finite_primes:
        vals = {m.v(p) for m in members}
        choices = [(p, 0)]
        if len(vals) == 1:
            (v,) = vals
            if v > 0:
                choices.append((p, v))
        per_prime.append(choices)
    out = []
    for combo in product(*per_prime):
        factors: dict[int, int | float] = {p: INF for p in key}
        for p, v in combo:
            if v:
                factors[p] = v
        out.append(SupernaturalNumber.from_map(factors))
    return out


def _finite_part_over(m: SupernaturalNumber, l: SupernaturalNumber) -> int | None:
    """The natural q with m = q * l and gcd(q, l) = 1, or None."""
    q = 1
    for p in m.support | l.support:
        vm, vl = m.v(p), l.v(p)
        if vl is INF:
            if vm is not INF:
                return None
            continue
        if vm is INF:
            return None  # infinite prime missing from l
        e = vm - vl
        if e < 0 or (vl > 0 and e > 0):
            return None
        q *= p**e
    return q


def _match_blocks(
    left: list[SupernaturalNumber], right: list[SupernaturalNumber], key: frozenset[int]
) -> bool:
    """Exhaustive search for a partition of one equivalence class into matched
    blocks, each sharing a common divisor L with isomorphic finite parts."""
    if not left and not right:
        return True
    if not left or not right:
        return False
    first, rest = left[0], left[1:]
    for size in range(0, len(rest) + 1):
        for others in combinations(range(len(rest)), size):
            block_l = [first] + [rest[i] for i in others]
            remaining_l = [rest[i] for i in range(len(rest)) if i not in others]
            for rsel in combinations(range(len(right)), len(block_l)):
                block_r = [right[i] for i in rsel]
                remaining_r = [right[i] for i in range(len(right)) if i not in rsel]
                for l in _common_divisor_candidates(block_l + block_r, key):
                    ms = [_finite_part_over(m, l) for m in block_l]
                    ns = [_finite_part_over(n, l) for n in block_r]
                    if any(x is None for x in ms + ns):
                        continue
                    if not fab_isomorphic_bruteforce(
                        FiniteAbelianGroup(tuple(ms)), FiniteAbelianGroup(tuple(ns))
                    ):
                        continue
                    if _match_blocks(remaining_l, remaining_r, key):
                        return True
    return False


def conjugacy_bruteforce(
    ms: tuple[SupernaturalNumber, ...], ns: tuple[SupernaturalNumber, ...]
) -> bool:
    """Search over all block partitions and per-prime common-divisor choices."""
    if any(not is_supernatural(x) for x in ms + ns):
        raise ValueError("inputs must be supernatural")
    keys = {class_key(x) for x in ms + ns}
    for key in keys:
        left = [x for x in ms if class_key(x) == key]
        right = [x for x in ns if class_key(x) == key]
        if not _match_blocks(left, right, key):
            return False
    return True
