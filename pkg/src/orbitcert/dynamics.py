"""Products of cyclic translations and odometers, truncated at finite levels.

A system is a finite product of factors.  Each factor is either a cyclic
translation on Z/n or an odometer indexed by a supernatural number M; the
odometer's level-k truncation is the cyclic group Z/level_modulus(M, k), and
those truncations form an inverse tower as k grows.  The acting group is the
product of one copy of Z per odometer factor and Z/n per cyclic factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator, Union

from .supernatural import (
    INF,
    ParseError,
    SupernaturalNumber,
    is_supernatural,
    parse_sn,
    sn_str,
)


@dataclass(frozen=True)
class Cyclic:
    n: int


@dataclass(frozen=True)
class Odometer:
    limit: SupernaturalNumber


Factor = Union[Cyclic, Odometer]


@lru_cache(maxsize=None)
def level_modulus(f: Factor, k: int) -> int:
    """Modulus of the level-k truncation of one factor."""
    if k < 0:
        raise ValueError("level must be >= 0")
    if isinstance(f, Cyclic):
        return f.n
    m = 1
    for p, e in f.limit.factors:
        m *= p ** (k if e is INF else min(e, k))
    return m


@dataclass(frozen=True)
class SystemSpec:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a system needs at least one factor")

    @property
    def rank(self) -> int:
        return len(self.factors)

    def group_moduli(self) -> tuple[int, ...]:
        """Acting-group descriptor: n for a cyclic factor, 0 meaning Z."""
        return tuple(f.n if isinstance(f, Cyclic) else 0 for f in self.factors)

    def space_moduli(self, k: int) -> tuple[int, ...]:
        return _space_moduli(self.factors, k)


@lru_cache(maxsize=None)
def _space_moduli(factors: tuple[Factor, ...], k: int) -> tuple[int, ...]:
    return tuple(level_modulus(f, k) for f in factors)


@dataclass(frozen=True)
class PointAtLevel:
    level: int
    residues: tuple[int, ...]


@dataclass(frozen=True)
class GroupElement:
    coords: tuple[int, ...]


def validate_spec(spec: SystemSpec) -> None:
    """External inputs must use genuine odometers and positive cyclic orders."""
    for f in spec.factors:
        if isinstance(f, Cyclic):
            if f.n < 1:
                raise ValueError("cyclic order must be >= 1")
        elif not is_supernatural(f.limit):
            raise ValueError(f"odometer limit {f.limit} must be supernatural")


def check_point(spec: SystemSpec, x: PointAtLevel) -> None:
    mods = spec.space_moduli(x.level)
    if len(x.residues) != len(mods):
        raise ValueError("point arity does not match the system")
    for r, m in zip(x.residues, mods):
        if not 0 <= r < m:
            raise ValueError(f"residue {r} out of range for modulus {m}")


def canonical_coords(group_moduli: tuple[int, ...], coords: tuple[int, ...]) -> tuple[int, ...]:
    """Reduce cyclic coordinates mod n; Z coordinates pass through."""
    if len(coords) != len(group_moduli):
        raise ValueError("coordinate arity mismatch")
    return tuple(c % m if m else c for c, m in zip(coords, group_moduli))


def add_coords(
    group_moduli: tuple[int, ...], a: tuple[int, ...], b: tuple[int, ...]
) -> tuple[int, ...]:
    return canonical_coords(group_moduli, tuple(x + y for x, y in zip(a, b)))


def neg_coords(group_moduli: tuple[int, ...], a: tuple[int, ...]) -> tuple[int, ...]:
    return canonical_coords(group_moduli, tuple(-x for x in a))


def identity_element(spec: SystemSpec) -> GroupElement:
    return GroupElement((0,) * spec.rank)


def generator(spec: SystemSpec, i: int) -> GroupElement:
    return GroupElement(tuple(1 if j == i else 0 for j in range(spec.rank)))


def act(spec: SystemSpec, k: int, g: GroupElement, x: PointAtLevel) -> PointAtLevel:
    """Translate the level-k truncation by g, coordinatewise."""
    if x.level != k:
        raise ValueError("point level does not match k")
    mods = spec.space_moduli(k)
    if len(g.coords) != len(mods):
        raise ValueError("group element arity mismatch")
    return PointAtLevel(k, tuple((r + c) % m for r, c, m in zip(x.residues, g.coords, mods)))


def project_to(spec: SystemSpec, x: PointAtLevel, k: int) -> PointAtLevel:
    """Image of x under the tower map onto level k <= x.level."""
    if k > x.level:
        raise ValueError(f"cannot project level {x.level} up to level {k}")
    if k == x.level:
        return x
    mods = spec.space_moduli(k)
    return PointAtLevel(k, tuple(r % m for r, m in zip(x.residues, mods)))


def project(spec: SystemSpec, x: PointAtLevel) -> PointAtLevel:
    if x.level == 0:
        raise ValueError("level 0 has no lower level")
    return project_to(spec, x, x.level - 1)


def point_count(spec: SystemSpec, k: int) -> int:
    n = 1
    for m in spec.space_moduli(k):
        n *= m
    return n


def enumerate_points(spec: SystemSpec, k: int, limit: int = 10**6) -> list[PointAtLevel]:
    """All level-k points in lexicographic residue order (first factor most
    significant).  Guarded against accidental blowups."""
    if point_count(spec, k) > limit:
        raise ValueError(f"level-{k} space has more than {limit} points")
    mods = spec.space_moduli(k)
    return [PointAtLevel(k, res) for res in product(*(range(m) for m in mods))]


def orbit(
    spec: SystemSpec, k: int, x: PointAtLevel, g: GroupElement, steps: int
) -> list[PointAtLevel]:
    out = [x]
    for _ in range(steps):
        out.append(act(spec, k, g, out[-1]))
    return out


def box_elements(spec: SystemSpec, radius: int) -> list[GroupElement]:
    """Group elements with every coordinate drawn from [-radius, radius],
    cyclic coordinates canonicalized (so a small cyclic factor is covered
    completely exactly once)."""
    per_factor = []
    for m in spec.group_moduli():
        if m:
            per_factor.append(sorted({c % m for c in range(-radius, radius + 1)}))
        else:
            per_factor.append(list(range(-radius, radius + 1)))
    return [GroupElement(c) for c in product(*per_factor)]


def parse_system_spec(text: str) -> SystemSpec:
    """Comma-separated factor literals: ``odo:<expr>`` or ``cyc:<n>``."""
    factors: list[Factor] = []
    for part in text.split(","):
        part = part.strip()
        if part.startswith("odo:"):
            factors.append(Odometer(parse_sn(part[4:])))
        elif part.startswith("cyc:"):
            body = part[4:].strip()
            if not body.isdigit() or int(body) < 1:
                raise ParseError(f"cyclic order must be a natural >= 1: {part!r}")
            factors.append(Cyclic(int(body)))
        else:
            raise ParseError(f"factor literal must start with odo: or cyc: ({part!r})")
    spec = SystemSpec(tuple(factors))
    validate_spec(spec)
    return spec


def spec_str(spec: SystemSpec) -> str:
    parts = []
    for f in spec.factors:
        if isinstance(f, Cyclic):
            parts.append(f"cyc:{f.n}")
        else:
            parts.append(f"odo:{sn_str(f.limit)}")
    return ",".join(parts)


def odometer_product(limits: tuple[SupernaturalNumber, ...]) -> SystemSpec:
    return SystemSpec(tuple(Odometer(m) for m in limits))
