#!/usr/bin/env python3
"""Long-running soundness fuzzer for both axiom systems.

Rewrites random terms with random axiom instances and checks that trace
equivalence (classic) or trace-measure equivalence (probabilistic) survives.
Prints any counterexample and exits 1.
"""

import argparse
import random
import time

from fractlang.generate import random_pterm, random_term
from fractlang.lts import unfold, unfold_prob
from fractlang.measure import tzeng_equiv
from fractlang.proofs import rewrite_random
from fractlang.terms import pretty
from fractlang.traces import trace_equiv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--chains", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--system", choices=("classic", "prob", "both"), default="both")
    args = ap.parse_args()

    systems = ("classic", "prob") if args.system == "both" else (args.system,)
    t = time.perf_counter()
    for system in systems:
        for i in range(args.chains):
            rng = random.Random(args.seed * 1_000_003 + i)
            if system == "classic":
                e = random_term(rng)
                f = rewrite_random(e, rng, args.steps, system="classic")
                ok = trace_equiv(unfold(e), 0, unfold(f), 0)[0]
            else:
                e = random_pterm(rng)
                f = rewrite_random(e, rng, args.steps, system="prob")
                ok = tzeng_equiv(unfold_prob(e), 0, unfold_prob(f), 0)[0]
            if not ok:
                print(f"{system} counterexample (chain {i}):\n  {pretty(e)}\n  {pretty(f)}")
                raise SystemExit(1)
        print(f"{system}: {args.chains} chains of {args.steps} steps sound")
    print(f"done in {time.perf_counter() - t:.1f} s")


if __name__ == "__main__":
    main()
