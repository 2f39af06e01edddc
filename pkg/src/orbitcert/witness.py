"""Constructive witnesses: explicit orbit equivalences and conjugacies
between odometer products, assembled from four elementary moves (splitting a
cyclic factor off an odometer, permuting factors, merging finite cyclic
factors, direct sums) and glued by composition."""
from __future__ import annotations

import math

import numpy as np

from .cocycle import (
    CocycleTable,
    CoeWitness,
    ConjWitness,
    GroupIso,
    GroupValuedMap,
    LCMap,
    compose_coe,
    identity_witness,
    inverse_coe,
    minimized_table,
)
from .decide import coe_decide, conj_decide
from .dynamics import (
    Cyclic,
    GroupElement,
    Odometer,
    PointAtLevel,
    SystemSpec,
    level_modulus,
    odometer_product,
)
from .intmat import IntMatrix, invert_unimodular
from .supernatural import SupernaturalNumber, div_exact, mul

_LEVEL_FUSE = 64  # no level search should ever walk past this


def _e_max(n: int) -> int:
    """Largest prime exponent in n; the level depth at which n divides the
    truncation modulus of any tower containing it."""
    out = 0
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        out = max(out, e)
        d += 1
    return max(out, 1 if n > 1 else 0)


def build_basic_coe(l: int, L: SupernaturalNumber) -> CoeWitness:
    """The seam witness: the l*L odometer is orbit equivalent to the product
    of an l-cycle with the L odometer via v -> (v mod l, v div l)."""
    if l < 1:
        raise ValueError("cyclic order must be >= 1")
    m = mul(SupernaturalNumber.from_int(l), L)
    x = SystemSpec((Odometer(m),))
    y = SystemSpec((Cyclic(l), Odometer(L)))

    def lm_l(k: int) -> int:
        return level_modulus(Odometer(L), k)

    def lm_m(k: int) -> int:
        return level_modulus(Odometer(m), k)

    def lphi(k: int) -> int:
        need = l * lm_l(k)
        j = k
        while lm_m(j) % need:
            j += 1
            if j > k + _LEVEL_FUSE:
                raise AssertionError("level search runaway")
        return j

    def phi_eval(k: int, xp: PointAtLevel) -> PointAtLevel:
        v = xp.residues[0]
        return PointAtLevel(k, (v % l, (v // l) % lm_l(k)))

    def phi_vec(k: int, res: np.ndarray) -> np.ndarray:
        v = res[:, 0]
        return np.stack((v % l, (v // l) % lm_l(k)), axis=1)

    phi = LCMap(x, y, lphi, phi_eval, f"split-{l}", vectorized=phi_vec)

    a_level = 0
    while lm_m(a_level) % l:
        a_level += 1
    a_gen = GroupValuedMap(
        x,
        (l, 0),
        a_level,
        lambda xp: GroupElement((1, 1 if xp.residues[0] % l == l - 1 else 0)),
        f"split-{l}-a",
    )
    a = CocycleTable(x, (l, 0), (a_gen,))

    def psi_eval(k: int, yp: PointAtLevel) -> PointAtLevel:
        j, w = yp.residues
        return PointAtLevel(k, ((j + l * w) % lm_m(k),))

    def psi_vec(k: int, res: np.ndarray) -> np.ndarray:
        return ((res[:, 0] + l * res[:, 1]) % lm_m(k)).reshape(-1, 1)

    psi = LCMap(y, x, lambda k: k, psi_eval, f"merge-{l}", vectorized=psi_vec)

    b_cyc = GroupValuedMap(
        y,
        (0,),
        0,
        lambda yp: GroupElement((1 - l if yp.residues[0] == l - 1 else 1,)),
        f"merge-{l}-b0",
    )
    b_odo = GroupValuedMap(y, (0,), 0, lambda yp: GroupElement((l,)), f"merge-{l}-b1")
    b = CocycleTable(y, (0,), (b_cyc, b_odo))
    return CoeWitness(phi, a, psi, b)


def _mixed_radix_strides(orders: tuple[int, ...]) -> tuple[int, ...]:
    out = [1] * len(orders)
    for i in range(len(orders) - 2, -1, -1):
        out[i] = out[i + 1] * orders[i + 1]
    return tuple(out)


def build_finite_coe(src_orders: tuple[int, ...], tgt_orders: tuple[int, ...]) -> CoeWitness:
    """Orbit equivalence between two finite cyclic products of equal size via
    mixed-radix rank and unrank (first factor most significant)."""
    total = math.prod(src_orders)
    if math.prod(tgt_orders) != total:
        raise ValueError("cyclic products must have equal size")
    if not src_orders or not tgt_orders:
        raise ValueError("at least one factor per side")
    x = SystemSpec(tuple(Cyclic(n) for n in src_orders))
    y = SystemSpec(tuple(Cyclic(n) for n in tgt_orders))
    sx = _mixed_radix_strides(src_orders)
    sy = _mixed_radix_strides(tgt_orders)

    def rank(res: tuple[int, ...], strides: tuple[int, ...]) -> int:
        return sum(r * s for r, s in zip(res, strides))

    def unrank(v: int, strides: tuple[int, ...], orders: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((v // s) % n for s, n in zip(strides, orders))

    def phi_eval(k: int, xp: PointAtLevel) -> PointAtLevel:
        return PointAtLevel(k, unrank(rank(xp.residues, sx), sy, tgt_orders))

    def psi_eval(k: int, yp: PointAtLevel) -> PointAtLevel:
        return PointAtLevel(k, unrank(rank(yp.residues, sy), sx, src_orders))

    def vec(strides_in, strides_out, orders_out):
        si = np.array(strides_in, dtype=np.int64)
        so = np.array(strides_out, dtype=np.int64)
        oo = np.array(orders_out, dtype=np.int64)

        def ev(k: int, res: np.ndarray) -> np.ndarray:
            v = res @ si
            return (v[:, None] // so[None, :]) % oo[None, :]

        return ev

    phi = LCMap(x, y, lambda k: 0, phi_eval, "rank",
                vectorized=vec(sx, sy, tgt_orders))
    psi = LCMap(y, x, lambda k: 0, psi_eval, "unrank",
                vectorized=vec(sy, sx, src_orders))

    def diff_gen(spec_from, spec_to, fwd, i):
        orders_to = spec_to.group_moduli()

        def ev(p: PointAtLevel) -> GroupElement:
            here = fwd(0, p).residues
            moved = fwd(0, PointAtLevel(
                p.level,
                tuple(
                    (r + (1 if t == i else 0)) % n
                    for t, (r, n) in enumerate(zip(p.residues, spec_from.space_moduli(p.level)))
                ),
            )).residues
            return GroupElement(tuple((b - a) % n for a, b, n in zip(here, moved, orders_to)))

        return GroupValuedMap(spec_from, orders_to, 0, ev, f"rank-a[{i}]")

    a = CocycleTable(
        x, y.group_moduli(), tuple(diff_gen(x, y, phi, i) for i in range(x.rank))
    )
    b = CocycleTable(
        y, x.group_moduli(), tuple(diff_gen(y, x, psi, j) for j in range(y.rank))
    )
    return CoeWitness(phi, a, psi, b)


def permutation_witness(spec: SystemSpec, perm: tuple[int, ...]) -> CoeWitness:
    """Reorder factors: output factor j is input factor perm[j]."""
    if sorted(perm) != list(range(spec.rank)):
        raise ValueError("perm must be a permutation of the factor indices")
    inv = [0] * len(perm)
    for j, i in enumerate(perm):
        inv[i] = j
    inv = tuple(inv)
    tgt = SystemSpec(tuple(spec.factors[i] for i in perm))

    def fwd(k: int, xp: PointAtLevel) -> PointAtLevel:
        return PointAtLevel(k, tuple(xp.residues[i] for i in perm))

    def bwd(k: int, yp: PointAtLevel) -> PointAtLevel:
        return PointAtLevel(k, tuple(yp.residues[j] for j in inv))

    phi = LCMap(spec, tgt, lambda k: k, fwd, "perm",
                vectorized=lambda k, res: res[:, perm])
    psi = LCMap(tgt, spec, lambda k: k, bwd, "perm-inv",
                vectorized=lambda k, res: res[:, inv])
    gm_x, gm_y = spec.group_moduli(), tgt.group_moduli()
    a = CocycleTable(
        spec,
        gm_y,
        tuple(
            GroupValuedMap(
                spec, gm_y, 0,
                lambda xp, _j=inv[i]: GroupElement(
                    tuple(1 if t == _j else 0 for t in range(len(gm_y)))
                ),
            )
            for i in range(spec.rank)
        ),
    )
    b = CocycleTable(
        tgt,
        gm_x,
        tuple(
            GroupValuedMap(
                tgt, gm_x, 0,
                lambda yp, _i=perm[j]: GroupElement(
                    tuple(1 if t == _i else 0 for t in range(len(gm_x)))
                ),
            )
            for j in range(tgt.rank)
        ),
    )
    return CoeWitness(phi, a, psi, b)


def direct_sum_coe(parts: list[CoeWitness]) -> CoeWitness:
    """Witness between the concatenated systems acting factorwise."""
    if not parts:
        raise ValueError("at least one part")
    x = SystemSpec(tuple(f for w in parts for f in w.source.factors))
    y = SystemSpec(tuple(f for w in parts for f in w.target.factors))
    xoff, yoff = [0], [0]
    for w in parts:
        xoff.append(xoff[-1] + w.source.rank)
        yoff.append(yoff[-1] + w.target.rank)

    def fwd_level(k: int) -> int:
        return max(w.phi.input_level(k) for w in parts)

    def bwd_level(k: int) -> int:
        return max(w.psi.input_level(k) for w in parts)

    def fwd(k: int, xp: PointAtLevel) -> PointAtLevel:
        res = []
        for t, w in enumerate(parts):
            sub = PointAtLevel(xp.level, xp.residues[xoff[t] : xoff[t + 1]])
            res.extend(w.phi(k, sub).residues)
        return PointAtLevel(k, tuple(res))

    def bwd(k: int, yp: PointAtLevel) -> PointAtLevel:
        res = []
        for t, w in enumerate(parts):
            sub = PointAtLevel(yp.level, yp.residues[yoff[t] : yoff[t + 1]])
            res.extend(w.psi(k, sub).residues)
        return PointAtLevel(k, tuple(res))

    def sum_vec(maps, off):
        if any(m.vectorized is None for m in maps):
            return None

        def ev(k: int, res: np.ndarray) -> np.ndarray:
            outs = []
            for t, m in enumerate(maps):
                lvl = m.input_level(k)
                mods = np.array(m.source.space_moduli(lvl), dtype=np.int64)
                sub = res[:, off[t] : off[t + 1]] % mods[None, :]
                outs.append(m.vectorized(k, sub))
            return np.concatenate(outs, axis=1)

        return ev

    phi = LCMap(x, y, fwd_level, fwd, "sum",
                vectorized=sum_vec([w.phi for w in parts], xoff))
    psi = LCMap(y, x, bwd_level, bwd, "sum-inv",
                vectorized=sum_vec([w.psi for w in parts], yoff))
    gm_x, gm_y = x.group_moduli(), y.group_moduli()

    def lift_gen(t: int, local: GroupValuedMap, src_spec, src_off, tgt_off, tgt_gm):
        def ev(p: PointAtLevel) -> GroupElement:
            sub = PointAtLevel(p.level, p.residues[src_off[t] : src_off[t + 1]])
            inner = local(sub).coords
            out = [0] * len(tgt_gm)
            for d, v in enumerate(inner):
                out[tgt_off[t] + d] = v
            return GroupElement(tuple(out))

        return GroupValuedMap(src_spec, tgt_gm, local.level, ev)

    a = CocycleTable(
        x,
        gm_y,
        tuple(
            lift_gen(t, w.a.generators[i], x, xoff, yoff, gm_y)
            for t, w in enumerate(parts)
            for i in range(w.source.rank)
        ),
    )
    b = CocycleTable(
        y,
        gm_x,
        tuple(
            lift_gen(t, w.b.generators[j], y, yoff, xoff, gm_x)
            for t, w in enumerate(parts)
            for j in range(w.target.rank)
        ),
    )
    return CoeWitness(phi, a, psi, b)


# ---------------------------------------------------------------------------
# the full orbit-equivalence chain


def _rebalanced_pairs(
    ms: tuple[SupernaturalNumber, ...],
    ns: tuple[SupernaturalNumber, ...],
    decision,
) -> list[tuple[int, int, int, int]]:
    """(i, sigma(i), m_i, n_i) with the side products made exactly equal.

    The decision's multipliers satisfy m_i M_i = n_i N_sigma(i) pairwise but
    their products can differ at primes whose total exponent is infinite;
    multiplying the deficient member at a factor whose class key contains the
    prime keeps the pairwise identity (the extra power is absorbed) and
    restores the balance.
    """
    pairs = [[p.left_index, p.right_index, p.m, p.n] for p in decision.pairs]
    pm = math.prod(p[2] for p in pairs)
    pn = math.prod(p[3] for p in pairs)
    g = math.gcd(pm, pn)
    for side, excess in ((3, pm // g), (2, pn // g)):
        # side 3 bumps n_i (m-product is larger), side 2 bumps m_i
        d = 2
        while excess > 1:
            e = 0
            while excess % d == 0:
                excess //= d
                e += 1
            if e:
                for p in pairs:
                    key = ms[p[0]].v(d)
                    if key == math.inf:
                        p[side] *= d**e
                        break
                else:
                    raise AssertionError(
                        f"no factor absorbs the {d}^{e} imbalance; decision unsound"
                    )
            d += 1
    assert math.prod(p[2] for p in pairs) == math.prod(p[3] for p in pairs)
    return [tuple(p) for p in pairs]


def build_coe_witness(
    ms: tuple[SupernaturalNumber, ...],
    ns: tuple[SupernaturalNumber, ...],
    tighten: bool = True,
    point_limit: int = 10**6,
) -> CoeWitness:
    """Explicit orbit equivalence between the odometer products, built as
    split-permute-merge on both sides into a common middle system.  Raises
    ValueError when the systems are not equivalent."""
    decision = coe_decide(ms, ns)
    if not decision:
        raise ValueError(f"not orbit equivalent: {decision.obstruction}")
    if ms == ns:
        return identity_witness(odometer_product(ms))
    pairs = _rebalanced_pairs(ms, ns, decision)
    r = len(pairs)
    bases = []
    for i, j, mi, ni in pairs:
        li = div_exact(ms[i], SupernaturalNumber.from_int(ni))
        assert mul(SupernaturalNumber.from_int(mi), li) == ns[j], "pair identity broke"
        bases.append(li)

    def chain(orders: list[int], limits: list[SupernaturalNumber], perm: tuple[int, ...]):
        split = direct_sum_coe([build_basic_coe(l, L) for l, L in zip(orders, limits)])
        reorder = permutation_witness(split.target, perm)
        merge = direct_sum_coe(
            [build_finite_coe(tuple(orders), (math.prod(orders),))]
            + [identity_witness(SystemSpec((Odometer(L),))) for L in limits]
        )
        return compose_coe(compose_coe(split, reorder), merge)

    # X side: factor i splits off an n_i-cycle
    x_perm = tuple([2 * t for t in range(r)] + [2 * t + 1 for t in range(r)])
    x_chain = chain([p[3] for p in pairs], bases, x_perm)

    # Y side: factor sigma(i) splits off an m_i-cycle; permute back to pair order
    sigma = {p[0]: p[1] for p in pairs}
    y_orders = [0] * r
    y_limits: list[SupernaturalNumber] = [None] * r  # type: ignore[list-item]
    for t, (i, j, mi, ni) in enumerate(pairs):
        y_orders[j] = mi
        y_limits[j] = bases[t]
    y_perm = tuple([2 * sigma[p[0]] for p in pairs] + [2 * sigma[p[0]] + 1 for p in pairs])
    y_split = direct_sum_coe([build_basic_coe(l, L) for l, L in zip(y_orders, y_limits)])
    y_reorder = permutation_witness(y_split.target, y_perm)
    y_merge = direct_sum_coe(
        [build_finite_coe(tuple(p[2] for p in pairs), (math.prod(y_orders),))]
        + [identity_witness(SystemSpec((Odometer(L),))) for L in bases]
    )
    y_chain = compose_coe(compose_coe(y_split, y_reorder), y_merge)

    if x_chain.target != y_chain.target:
        raise AssertionError("the two chains built different middle systems")
    w = compose_coe(x_chain, inverse_coe(y_chain))
    if tighten:
        w = CoeWitness(
            w.phi,
            minimized_table(w.a, point_limit),
            w.psi,
            minimized_table(w.b, point_limit),
        )
    return w


# ---------------------------------------------------------------------------
# conjugacy witnesses


def _crt(a1: int, n1: int, a2: int, n2: int) -> int:
    """x = a1 mod n1 and x = a2 mod n2 for coprime moduli."""
    if n1 == 1:
        return a2 % n2
    if n2 == 1:
        return a1 % n1
    t = ((a2 - a1) * pow(n1, -1, n2)) % n2
    return (a1 + n1 * t) % (n1 * n2)


def build_conj_witness(
    ms: tuple[SupernaturalNumber, ...],
    ns: tuple[SupernaturalNumber, ...],
) -> ConjWitness:
    """Explicit conjugacy: per asymptotic class, the finite multiplier
    coordinates are mapped through the Smith conjugator S while the common
    profinite part is mixed by the same matrix; the two strands are glued by
    the Chinese remainder theorem at every level."""
    decision = conj_decide(ms, ns)
    if not decision:
        raise ValueError(f"not conjugate: {decision.obstruction}")
    r = len(ms)
    x = odometer_product(ms)
    y = odometer_product(ns)

    blocks = []
    rho_rows = [[0] * r for _ in range(r)]
    rho_inv_rows = [[0] * r for _ in range(r)]
    depth = 0
    for blk in decision.blocks:
        s, _t = blk.conjugator
        s_inv = invert_unimodular(s)
        for a_pos, j in enumerate(blk.right_indices):
            for b_pos, i in enumerate(blk.left_indices):
                rho_rows[j][i] = s.get(a_pos, b_pos)
                rho_inv_rows[i][j] = s_inv.get(b_pos, a_pos)
        blocks.append((blk, s, s_inv))
        depth = max(
            depth,
            max(_e_max(q) for q in blk.left_multipliers + blk.right_multipliers),
        )
    rho = GroupIso(
        (0,) * r,
        (0,) * r,
        IntMatrix.from_rows(rho_rows),
        IntMatrix.from_rows(rho_inv_rows),
    )

    def make_eval(forward: bool):
        def ev(k: int, p: PointAtLevel) -> PointAtLevel:
            out = [0] * r
            for blk, s, s_inv in blocks:
                mat = s if forward else s_inv
                src_idx = blk.left_indices if forward else blk.right_indices
                tgt_idx = blk.right_indices if forward else blk.left_indices
                qs_src = blk.left_multipliers if forward else blk.right_multipliers
                tgt_limits = ns if forward else ms
                lm_l = level_modulus(Odometer(blk.base), k)
                u = [p.residues[i] % q for i, q in zip(src_idx, qs_src)]
                w = [p.residues[i] % lm_l for i in src_idx]
                su = mat.apply(tuple(u))
                sw = mat.apply(tuple(w))
                for a_pos, j in enumerate(tgt_idx):
                    whole = level_modulus(Odometer(tgt_limits[j]), k)
                    g = whole // lm_l  # the finite strand visible at this level
                    out[j] = _crt(su[a_pos] % g, g, sw[a_pos] % lm_l, lm_l)
            return PointAtLevel(k, tuple(out))

        return ev

    def make_vectorized(forward: bool):
        def ev(k: int, res):
            out = np.zeros_like(res)
            for blk, s, s_inv in blocks:
                mat = s if forward else s_inv
                src_idx = blk.left_indices if forward else blk.right_indices
                tgt_idx = blk.right_indices if forward else blk.left_indices
                qs_src = blk.left_multipliers if forward else blk.right_multipliers
                tgt_limits = ns if forward else ms
                lm_l = level_modulus(Odometer(blk.base), k)
                m_t = np.array(mat.to_rows(), dtype=np.int64).T
                u = res[:, src_idx] % np.array(qs_src, dtype=np.int64)[None, :]
                w = res[:, src_idx] % lm_l
                su = u @ m_t
                sw = w @ m_t
                for a_pos, j in enumerate(tgt_idx):
                    whole = level_modulus(Odometer(tgt_limits[j]), k)
                    g = whole // lm_l
                    a1 = su[:, a_pos] % g
                    a2 = sw[:, a_pos] % lm_l
                    if g == 1:
                        out[:, j] = a2
                    elif lm_l == 1:
                        out[:, j] = a1
                    else:
                        t = ((a2 - a1) * pow(g, -1, lm_l)) % lm_l
                        out[:, j] = a1 + g * t
            return out

        return ev

    phi = LCMap(x, y, lambda k: max(k, depth), make_eval(True), "conj",
                make_vectorized(True))
    phi_inv = LCMap(y, x, lambda k: max(k, depth), make_eval(False), "conj-inv",
                    make_vectorized(False))
    return ConjWitness(rho, phi, phi_inv)
