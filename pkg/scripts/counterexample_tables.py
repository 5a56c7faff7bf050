"""Print the counterexample tables: Holder quotients, divergence at
alpha=1/2, the eigenvector jump, and the resolvent norm-quotient floor.

Usage: python3 scripts/counterexample_tables.py [--n-max 12]
"""

import argparse

import numpy as np

from spectralbranch import eigenvector_jump, holder_quotient, resolvent_weak_vs_norm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=12)
    args = ap.parse_args()

    print("Holder quotient |d(n) - d(0)| / s_n^(1+alpha), closed form vs tracked")
    print(f"{'n':>3} {'alpha':>6} {'closed form':>22} {'numerical':>22} {'rel diff':>10}")
    for n, alpha in ((5, 0.25), (6, 0.25), (3, 1.0), (9, 0.25), (9, 1.0)):
        q = holder_quotient(n, alpha)
        print(f"{n:>3} {alpha:>6.2f} {q.closed_form:>22.12e} {q.numerical:>22.12e} "
              f"{q.rel_diff:>10.2e}")

    print()
    print(f"alpha = 1/2 quotient sequence, n = 3..{args.n_max} (unbounded in n)")
    for n in range(3, args.n_max + 1):
        q = holder_quotient(n, 0.5)
        print(f"  n={n:>2}  {q.numerical:.12e}")

    print()
    jumps = [eigenvector_jump(n) for n in range(2, 11)]
    print(f"eigenvector jump angle, n=2..10: all pi/8, spread {np.ptp(jumps):.2e}")

    print()
    print("resolvent example (m=200): weak quotients vanish pointwise, norm floor stays")
    floor = min(resolvent_weak_vs_norm(200, 1.0 / n)[1] for n in range(2, 51))
    print(f"  min norm quotient over t=1/n, n=2..50: {floor:.12f}")
    for t in (1e-2, 1e-3, 2.0**-12):
        pw = resolvent_weak_vs_norm(200, t)[0]
        print(f"  pointwise max (k <= 5) at t={t:.3e}: {pw:.3e}")


if __name__ == "__main__":
    main()
