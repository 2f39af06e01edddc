"""Decision procedures: orbit equivalence and conjugacy of odometer products,
the ordered K-theoretic invariant, and rational eigenvalue groups."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .intmat import IntMatrix, solve_conjugator
from .supernatural import (
    INF,
    ONE,
    SupernaturalNumber,
    _is_prime,
    class_key,
    div_exact,
    divides,
    gcd as sn_gcd,
    is_supernatural,
    lcm as sn_lcm,
    mul,
    product,
    sim_witness,
    sn_str,
)


def _require_supernatural(ms: tuple[SupernaturalNumber, ...], side: str) -> None:
    if not ms:
        raise ValueError(f"{side}: at least one factor is required")
    for m in ms:
        if not is_supernatural(m):
            raise ValueError(f"{side}: {sn_str(m)} is finite; factors must be supernatural")


# ---------------------------------------------------------------------------
# continuous orbit equivalence


@dataclass(frozen=True)
class CoePair:
    """One matched factor pair: m * left = n * right exactly."""

    left_index: int
    right_index: int
    m: int
    n: int


@dataclass(frozen=True)
class CoeDecision:
    equivalent: bool
    sigma: tuple[int, ...] | None  # right_index = sigma[left_index]
    pairs: tuple[CoePair, ...] | None
    obstruction: str | None

    def __bool__(self) -> bool:
        return self.equivalent


def coe_decide(
    ms: tuple[SupernaturalNumber, ...], ns: tuple[SupernaturalNumber, ...]
) -> CoeDecision:
    """Decide continuous orbit equivalence of two odometer products.

    The criterion: equal length, a bijection matching factors with equal
    infinite-exponent prime sets, and multipliers (m_i, n_i) with
    m_i * M_i = n_i * N_sigma(i) whose two total products agree exactly.
    """
    _require_supernatural(ms, "left")
    _require_supernatural(ns, "right")
    if len(ms) != len(ns):
        return CoeDecision(False, None, None, f"rank mismatch: {len(ms)} vs {len(ns)}")

    total_m = product(ms)
    total_n = product(ns)
    if total_m != total_n:
        return CoeDecision(
            False,
            None,
            None,
            f"total products differ: {sn_str(total_m)} vs {sn_str(total_n)}",
        )

    left_by_key: dict[frozenset, list[int]] = {}
    right_by_key: dict[frozenset, list[int]] = {}
    for i, m in enumerate(ms):
        left_by_key.setdefault(class_key(m), []).append(i)
    for j, n in enumerate(ns):
        right_by_key.setdefault(class_key(n), []).append(j)
    if set(left_by_key) != set(right_by_key) or any(
        len(left_by_key[k]) != len(right_by_key[k]) for k in left_by_key
    ):
        def show(d):
            return sorted((sorted(k), len(v)) for k, v in d.items())

        return CoeDecision(
            False,
            None,
            None,
            f"asymptotic class multisets differ: {show(left_by_key)} vs {show(right_by_key)}",
        )

    # in-order matching inside each class; any choice works once the totals
    # agree, this one is canonical
    sigma = [0] * len(ms)
    pairs = []
    for key, lefts in left_by_key.items():
        for i, j in zip(lefts, right_by_key[key]):
            sigma[i] = j
            mi, ni = sim_witness(ms[i], ns[j])
            assert mul(SupernaturalNumber.from_int(mi), ms[i]) == mul(
                SupernaturalNumber.from_int(ni), ns[j]
            )
            pairs.append(CoePair(i, j, mi, ni))
    pairs.sort(key=lambda p: p.left_index)
    return CoeDecision(True, tuple(sigma), tuple(pairs), None)


@dataclass(frozen=True)
class KInvariant:
    """Rank, the distinguished total, and every sub-product with its class."""

    rank: int
    total: SupernaturalNumber
    subset_classes: tuple[tuple[frozenset, int], ...]  # (key, multiplicity)


def k_invariant(ms: tuple[SupernaturalNumber, ...]) -> KInvariant:
    _require_supernatural(ms, "input")
    keys: dict[frozenset, int] = {}
    for size in range(len(ms) + 1):
        for comb in itertools.combinations(range(len(ms)), size):
            key = class_key(product(tuple(ms[i] for i in comb)) if comb else ONE)
            keys[key] = keys.get(key, 0) + 1
    return KInvariant(
        len(ms),
        product(ms),
        tuple(sorted(keys.items(), key=lambda kv: sorted(kv[0]))),
    )


def k_invariant_equal(
    ms: tuple[SupernaturalNumber, ...], ns: tuple[SupernaturalNumber, ...]
) -> bool:
    a, b = k_invariant(ms), k_invariant(ns)
    return a.rank == b.rank and a.total == b.total and a.subset_classes == b.subset_classes


# ---------------------------------------------------------------------------
# conjugacy


@dataclass(frozen=True)
class ConjBlock:
    left_indices: tuple[int, ...]
    right_indices: tuple[int, ...]
    base: SupernaturalNumber  # the common supernatural part L
    left_multipliers: tuple[int, ...]  # M_i = m_i * L
    right_multipliers: tuple[int, ...]
    conjugator: tuple[IntMatrix, IntMatrix]  # S diag(m) T = diag(n)


@dataclass(frozen=True)
class ConjDecision:
    conjugate: bool
    blocks: tuple[ConjBlock, ...] | None
    obstruction: str | None

    def __bool__(self) -> bool:
        return self.conjugate


def _block_base(members: tuple[SupernaturalNumber, ...], key: frozenset) -> SupernaturalNumber:
    """Largest common shape: infinity on the class key, the shared finite
    exponent where every member agrees, 1 elsewhere."""
    primes = set()
    for m in members:
        primes.update(p for p, _ in m.factors)
    exps = {}
    for p in sorted(primes):
        if p in key:
            exps[p] = INF
        else:
            vals = {m.v(p) for m in members}
            if len(vals) == 1 and vals != {0}:
                exps[p] = vals.pop()
    return SupernaturalNumber.from_map(exps)


def _finite_multiplier(m: SupernaturalNumber, base: SupernaturalNumber) -> int:
    """The integer q with m = q * base; exponents at infinite primes of base
    are absorbed by the base."""
    q = 1
    for p, e in m.factors:
        if base.v(p) == INF:
            continue
        d = e - base.v(p)
        assert d == int(d) and d >= 0
        q *= p ** int(d)
    return q


def conj_decide(
    ms: tuple[SupernaturalNumber, ...], ns: tuple[SupernaturalNumber, ...]
) -> ConjDecision:
    """Decide conjugacy: one block per asymptotic class; the finite
    multiplier tuples over the block base must generate isomorphic finite
    abelian groups.  Any valid block partition exists iff this canonical
    one works."""
    _require_supernatural(ms, "left")
    _require_supernatural(ns, "right")
    if len(ms) != len(ns):
        return ConjDecision(False, None, f"rank mismatch: {len(ms)} vs {len(ns)}")

    left_by_key: dict[frozenset, list[int]] = {}
    right_by_key: dict[frozenset, list[int]] = {}
    for i, m in enumerate(ms):
        left_by_key.setdefault(class_key(m), []).append(i)
    for j, n in enumerate(ns):
        right_by_key.setdefault(class_key(n), []).append(j)
    if set(left_by_key) != set(right_by_key):
        return ConjDecision(False, None, "asymptotic classes differ")

    blocks = []
    for key in sorted(left_by_key, key=sorted):
        li = tuple(left_by_key[key])
        ri = tuple(right_by_key[key])
        if len(li) != len(ri):
            return ConjDecision(
                False, None, f"class {sorted(key)} has {len(li)} vs {len(ri)} factors"
            )
        members = tuple(ms[i] for i in li) + tuple(ns[j] for j in ri)
        base = _block_base(members, key)
        mm = tuple(_finite_multiplier(ms[i], base) for i in li)
        nn = tuple(_finite_multiplier(ns[j], base) for j in ri)
        try:
            s, t = solve_conjugator(mm, nn)
        except ValueError:
            return ConjDecision(
                False,
                None,
                f"class {sorted(key)}: multiplier groups Z/{mm} and Z/{nn} are not isomorphic",
            )
        blocks.append(ConjBlock(li, ri, base, mm, nn, (s, t)))
    return ConjDecision(True, tuple(blocks), None)


# ---------------------------------------------------------------------------
# eigenvalue groups


@dataclass(frozen=True)
class TGroup:
    """Subgroup T(A) = {j / d : d divides A} of Q/Z for a supernatural A.
    Containment is divisibility of moduli; the joint group is their lcm."""

    modulus: SupernaturalNumber

    def __contains__(self, q: Fraction) -> bool:
        q = Fraction(q) % 1
        return _divides_denom(self.modulus, q.denominator)

    def __le__(self, other: "TGroup") -> bool:
        return divides(self.modulus, other.modulus)

    def __str__(self) -> str:
        return f"T({sn_str(self.modulus)})"


def _divides_denom(a: SupernaturalNumber, d: int) -> bool:
    return divides(SupernaturalNumber.from_int(d), a)


def tgroup_contains(a: TGroup, b: TGroup) -> bool:
    """b is a subgroup of a, i.e. the modulus of b divides that of a."""
    return divides(b.modulus, a.modulus)


def tgroup_product(a: TGroup, b: TGroup) -> TGroup:
    return TGroup(sn_lcm(a.modulus, b.modulus))


def eig_group(m: SupernaturalNumber, k: int) -> TGroup:
    """Rational eigenvalue group of the k-th power of an odometer with
    supernatural limit m: T(m / gcd(|k|, m)) for k != 0 and T(1) for k = 0."""
    if k == 0:
        return TGroup(ONE)
    g = sn_gcd(SupernaturalNumber.from_int(abs(k)), m)
    return TGroup(div_exact(m, g))


def eig_group_oracle(
    m: SupernaturalNumber, k: int, level: int, guard: int = 10**4
) -> set[Fraction]:
    """Eigenvalues of translation by k on the level truncation, found by
    walking every cycle of the permutation and collecting j / cycle_length.

    Independent of eig_group: nothing but the finite permutation is used.
    """
    from .dynamics import Odometer, level_modulus

    n = level_modulus(Odometer(m), level)
    if n > guard:
        raise ValueError(f"level-{level} modulus {n} exceeds the enumeration guard {guard}")
    seen = [False] * n
    out: set[Fraction] = set()
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = (x + k) % n
            length += 1
        for j in range(length):
            out.add(Fraction(j, length))
    return out


def eig_truncation(a: SupernaturalNumber, level: int) -> set[Fraction]:
    """The level truncation of T(a): all j / lm(a, level)."""
    from .dynamics import Odometer, level_modulus

    d = level_modulus(Odometer(a), level)
    return {Fraction(j, d) for j in range(d)}


def eig_cross_check(
    m: SupernaturalNumber, k: int, level: int, guard: int = 10**4
) -> dict[str, bool]:
    """Four independent confrontations of eig_group with the permutation
    oracle on finite truncations.

    - cyclic: the oracle group is cyclic generated by 1/(lm(m)/g)
    - contained: every oracle eigenvalue lies in T(m / gcd(|k|, m))
    - monotone: oracle eigenvalues only grow with the level
    - exhausts: raising the level by the largest prime power in |k| makes the
      oracle cover the current truncation of the predicted group
    """
    from .dynamics import Odometer, level_modulus

    if k == 0:
        got = eig_group_oracle(m, k, level, guard)
        return {"cyclic": got == {Fraction(0)}, "contained": True, "monotone": True,
                "exhausts": True}
    a = eig_group(m, k).modulus
    got = eig_group_oracle(m, k, level, guard)

    n = level_modulus(Odometer(m), level)
    g = math.gcd(abs(k), n)
    cyclic = got == {Fraction(j, n // g) for j in range(n // g)}

    contained = all(_divides_denom(a, q.denominator) for q in got)

    monotone = all(
        eig_group_oracle(m, k, lo, guard) <= eig_group_oracle(m, k, lo + 1, guard)
        for lo in range(level)
        if level_modulus(Odometer(m), lo + 1) <= guard
    )

    vmax = 0
    kk = abs(k)
    for p in range(2, kk + 1):
        e = 0
        while kk % p == 0:
            kk //= p
            e += 1
        vmax = max(vmax, e)
    exhausts = True
    for j in range(level + 1):
        probe = j + vmax
        if level_modulus(Odometer(m), probe) > guard:
            break
        deep = eig_group_oracle(m, k, probe, guard)
        if not eig_truncation(a, j) <= deep:
            exhausts = False
            break
    return {"cyclic": cyclic, "contained": contained, "monotone": monotone,
            "exhausts": exhausts}


# ---------------------------------------------------------------------------
# the rigidity gap for products with a free group


@dataclass(frozen=True)
class CounterexampleReport:
    p: int
    q: int
    n: int
    certified: tuple[tuple[str, bool], ...]  # (statement, holds)
    cited: tuple[str, ...]  # used but not machine-checked here

    @property
    def passed(self) -> bool:
        return all(h for _, h in self.certified)


def free_group_counterexample_check(p: int, q: int, n: int) -> CounterexampleReport:
    """Certify the eigenvalue-group separations behind the family of
    non-conjugate but orbit-equivalent product actions built from a rank-2
    free group factor: the n p^inf odometer against the q^inf one.

    Preconditions: p, q distinct primes, n > 1 coprime to both.
    """
    if not (_is_prime(p) and _is_prime(q)) or p == q:
        raise ValueError("p and q must be distinct primes")
    if n <= 1:
        raise ValueError("n must exceed 1")
    if math.gcd(n, p * q) != 1:
        raise ValueError("n must be coprime to p and q")

    npinf = mul(SupernaturalNumber.from_int(n), SupernaturalNumber.from_map({p: INF}))
    pinf = SupernaturalNumber.from_map({p: INF})
    qinf = SupernaturalNumber.from_map({q: INF})

    certified = []
    certified.append(
        (
            f"T({sn_str(npinf)}) != T(1): the twisted side has nontrivial eigenvalues",
            TGroup(npinf) != TGroup(ONE),
        )
    )
    certified.append(
        (
            f"T({sn_str(npinf)}) != T({sn_str(pinf)}): the factor n is visible",
            TGroup(npinf) != TGroup(pinf),
        )
    )
    certified.append(
        (
            f"T({sn_str(qinf)}) is not contained in T({sn_str(npinf)})",
            not tgroup_contains(TGroup(npinf), TGroup(qinf)),
        )
    )
    powers_ok = eig_group(pinf, 0) == TGroup(ONE) and all(
        eig_group(pinf, k) == TGroup(pinf) for k in range(1, n * p + 1)
    )
    certified.append(
        (
            f"every power of the {p}^inf odometer has eigenvalue group T(1) or T({p}^inf)",
            powers_ok,
        )
    )
    cited = (
        "the two product actions are continuously orbit equivalent "
        "(free-group cocycle construction; not machine-checked here)",
    )
    return CounterexampleReport(p, q, n, tuple(certified), cited)
