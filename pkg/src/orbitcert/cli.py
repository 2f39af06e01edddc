"""Command-line front end: decisions, invariants, certificates, selftests.

Exit codes are a stable contract: 0 for a positive decision or a passing
verification, 1 for a negative decision or a failing verification, 2 for
unusable input (parse errors, malformed certificates, oversized requests).
"""
from __future__ import annotations

import argparse
import sys

from .certificates import (
    CertificateError,
    canonical_json,
    coe_certificate,
    coe_witness_block,
    conj_certificate,
    conj_witness_block,
    counterexample_certificate,
    dumps,
    loads,
    verify_certificate,
)
from .decide import (
    coe_decide,
    conj_decide,
    eig_group,
    free_group_counterexample_check,
    k_invariant,
)
from .supernatural import ParseError, parse_sn, parse_sn_list, sn_str
from .witness import build_coe_witness, build_conj_witness


def _write(cert: dict, out: str | None) -> None:
    text = dumps(cert)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"certificate written to {out}")
    else:
        sys.stdout.write(text)


def _key_str(key) -> str:
    return "{" + ",".join(str(p) for p in sorted(key)) + "}"


def cmd_coe(args) -> int:
    ms = parse_sn_list(args.ms)
    ns = parse_sn_list(args.ns)
    d = coe_decide(ms, ns)
    if not d.equivalent:
        print(f"not orbit equivalent: {d.obstruction}")
        _write(coe_certificate(ms, ns, d), args.out)
        return 1
    pairs = ", ".join(f"{p.m}*M{p.left_index} = {p.n}*N{p.right_index}" for p in d.pairs)
    print(f"orbit equivalent; sigma = {list(d.sigma)}; {pairs}")
    block = None
    if args.witness:
        w = build_coe_witness(ms, ns)
        block = coe_witness_block(w, args.level, args.radius)
    _write(coe_certificate(ms, ns, d, block), args.out)
    return 0


def cmd_conj(args) -> int:
    ms = parse_sn_list(args.ms)
    ns = parse_sn_list(args.ns)
    d = conj_decide(ms, ns)
    if not d.conjugate:
        print(f"not conjugate: {d.obstruction}")
        _write(conj_certificate(ms, ns, d), args.out)
        return 1
    blocks = "; ".join(
        f"L={sn_str(b.base)} left{list(b.left_indices)} right{list(b.right_indices)}"
        for b in d.blocks
    )
    print(f"conjugate; {blocks}")
    block = None
    if args.witness:
        cw = build_conj_witness(ms, ns)
        block = conj_witness_block(cw, args.level, args.radius)
    _write(conj_certificate(ms, ns, d, block), args.out)
    return 0


def cmd_kinv(args) -> int:
    ms = parse_sn_list(args.ms)
    inv = k_invariant(ms)
    print(f"rank: {inv.rank}")
    print(f"total: {sn_str(inv.total)}")
    for key, mult in inv.subset_classes:
        print(f"class {_key_str(key)}: multiplicity {mult}")
    payload = {
        "rank": inv.rank,
        "total": sn_str(inv.total),
        "classes": [[sorted(key), mult] for key, mult in inv.subset_classes],
    }
    print(canonical_json(payload))
    return 0


def cmd_eig(args) -> int:
    m = parse_sn(args.m)
    g = eig_group(m, args.k)
    print(f"eigenvalue group of the power-{args.k} action: T({sn_str(g.modulus)})")
    print(canonical_json({"M": sn_str(m), "k": args.k, "t_group": sn_str(g.modulus)}))
    return 0


def cmd_counterexample(args) -> int:
    report = free_group_counterexample_check(args.p, args.q, args.n)
    for stmt, ok in report.certified:
        print(f"[{'pass' if ok else 'FAIL'}] certified: {stmt}")
    for stmt in report.cited:
        print(f"[cited, not machine-checked] {stmt}")
    _write(counterexample_certificate(report), args.out)
    return 0 if all(ok for _, ok in report.certified) else 1


def cmd_witness(args) -> int:
    ms = parse_sn_list(args.ms)
    ns = parse_sn_list(args.ns)
    if args.relation == "coe":
        d = coe_decide(ms, ns)
        if not d.equivalent:
            print(f"not orbit equivalent: {d.obstruction}")
            return 1
        w = build_coe_witness(ms, ns)
        block = coe_witness_block(w, args.level, args.radius)
        cert = coe_certificate(ms, ns, d, block, kind="coe-witness")
    else:
        d = conj_decide(ms, ns)
        if not d.conjugate:
            print(f"not conjugate: {d.obstruction}")
            return 1
        cw = build_conj_witness(ms, ns)
        block = conj_witness_block(cw, args.level, args.radius)
        cert = conj_certificate(ms, ns, d, block, kind="conj-witness")
    print(f"witness materialized at level {args.level}, radius {args.radius}")
    _write(cert, args.out)
    return 0


def cmd_verify(args) -> int:
    try:
        with open(args.certificate, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CertificateError(f"cannot read {args.certificate}: {e}") from None
    cert = loads(text)
    ok, lines = verify_certificate(cert, args.level, args.radius)
    for line in lines:
        print(line)
    print("verification passed" if ok else "verification FAILED")
    return 0 if ok else 1


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all(args.seed, args.count)
    for r in results:
        print(r.summary())
    ok = all(r.ok for r in results)
    print("selftest passed" if ok else "selftest FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitcert",
        description="decide and certify orbit equivalence and conjugacy of "
        "products of odometers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pair(p):
        p.add_argument("ms", help="comma-separated supernatural numbers, e.g. '5*2^inf,3^inf'")
        p.add_argument("ns", help="comma-separated supernatural numbers")
        p.add_argument("--witness", action="store_true",
                       help="build and embed a materialized witness")
        add_budget(p)
        p.add_argument("--out", metavar="FILE", help="write the certificate here")

    def add_budget(p):
        p.add_argument("--level", type=int, default=4,
                       help="materialization/verification level (default 4)")
        p.add_argument("--radius", type=int, default=6,
                       help="group box radius (default 6)")

    p = sub.add_parser("coe", help="decide continuous orbit equivalence")
    add_pair(p)
    p.set_defaults(fn=cmd_coe)

    p = sub.add_parser("conj", help="decide continuous conjugacy")
    add_pair(p)
    p.set_defaults(fn=cmd_conj)

    p = sub.add_parser("kinv", help="print the ordered K-theoretic invariant")
    p.add_argument("ms", help="comma-separated supernatural numbers")
    p.set_defaults(fn=cmd_kinv)

    p = sub.add_parser("eig", help="rational eigenvalue group of a power of an odometer")
    p.add_argument("m", help="supernatural number")
    p.add_argument("k", type=int, help="power of the action")
    p.set_defaults(fn=cmd_eig)

    p = sub.add_parser("counterexample",
                       help="certify the orbit-equivalent non-conjugate family")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--out", metavar="FILE", help="write the certificate here")
    p.set_defaults(fn=cmd_counterexample)

    p = sub.add_parser("witness", help="emit a materialized witness certificate")
    p.add_argument("relation", choices=("coe", "conj"))
    p.add_argument("ms")
    p.add_argument("ns")
    add_budget(p)
    p.add_argument("--out", metavar="FILE", help="write the certificate here")
    p.set_defaults(fn=cmd_witness)

    p = sub.add_parser("verify", help="re-verify a certificate file")
    p.add_argument("certificate", metavar="FILE")
    p.add_argument("--level", type=int, default=None,
                   help="verification level (default: the embedded one)")
    p.add_argument("--radius", type=int, default=None,
                   help="group box radius (default: the embedded one)")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("selftest", help="run the randomized cross-check suites")
    p.add_argument("--seed", type=int, default=17)
    p.add_argument("--count", type=int, default=200,
                   help="instances for the generator-driven suites (default 200)")
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, CertificateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
