"""Sweep the orbit-equivalent non-conjugate family.

For coprime primes p != q and twist factors n > 1 coprime to pq, the pair
    M = (n*p^inf, q^inf)      N = (p^inf, n*q^inf)
is continuously orbit equivalent (cited construction) but never conjugate;
the separation is visible in rational eigenvalue groups.  This driver
re-certifies the separations for a range of n, pads the family to higher
rank, and optionally writes counterexample certificates.

Usage:
    python3 scripts/counterexample_family.py --p 2 --q 3 --n 5 7 25
"""
from __future__ import annotations

import argparse
import math
import os
import sys

from orbitcert.certificates import counterexample_certificate, dumps
from orbitcert.decide import coe_decide, conj_decide, free_group_counterexample_check
from orbitcert.supernatural import parse_sn, sn_str


def run_one(p: int, q: int, n: int, pad: int, out_dir: str | None) -> bool:
    report = free_group_counterexample_check(p, q, n)
    print(f"--- p={p} q={q} n={n}")
    for stmt, ok in report.certified:
        print(f"  [{'pass' if ok else 'FAIL'}] {stmt}")
    for stmt in report.cited:
        print(f"  [cited] {stmt}")

    ms = (parse_sn(f"{n}*{p}^inf"), parse_sn(f"{q}^inf"))
    ns = (parse_sn(f"{p}^inf"), parse_sn(f"{n}*{q}^inf"))
    padding = (parse_sn(f"{p}^inf"),) * pad
    all_ok = report.passed
    for label, a, b in (
        ("r=2", ms, ns),
        (f"r={2 + pad} padded", ms + padding, ns + padding),
    ):
        coe = coe_decide(a, b).equivalent
        conj = conj_decide(a, b).conjugate
        good = coe and not conj
        all_ok = all_ok and good
        print(
            f"  [{'pass' if good else 'FAIL'}] {label}: "
            f"({', '.join(sn_str(x) for x in a)}) vs "
            f"({', '.join(sn_str(x) for x in b)}) -> "
            f"coe={'yes' if coe else 'no'} conj={'yes' if conj else 'no'}"
        )
    if out_dir:
        path = os.path.join(out_dir, f"counterexample-{p}-{q}-{n}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(counterexample_certificate(report)))
        print(f"  certificate written to {path}")
    return all_ok


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--p", type=int, default=2)
    parser.add_argument("--q", type=int, default=3)
    parser.add_argument("--n", type=int, nargs="+", default=[5, 7, 25, 35])
    parser.add_argument("--pad", type=int, default=1,
                        help="extra p^inf factors for the padded family")
    parser.add_argument("--out-dir", default=None,
                        help="write one certificate per n here")
    args = parser.parse_args(argv)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
    ok = True
    for n in args.n:
        if math.gcd(n, args.p * args.q) != 1 or n <= 1:
            print(f"--- skipping n={n}: must be > 1 and coprime to pq")
            continue
        ok = run_one(args.p, args.q, n, args.pad, args.out_dir) and ok
    print("all separations certified" if ok else "FAILURES present")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
