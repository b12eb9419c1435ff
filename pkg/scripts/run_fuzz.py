#!/usr/bin/env python3
"""Run the randomized invariant sweep over generated theories.

For every seed: the theory validates, transition/observation rows sum to one,
closures give complete consistent states, belief updates stay normalized; for
a subset of seeds the compiled program's answer sets are checked for exactly
one occ atom per step and no complementary holds-literals.
"""

import argparse
import time
from fractions import Fraction

from apoplan import compiler, oracle
from apoplan.fuzz import generate_theory
from apoplan.nplp import enumerate_answer_sets
from apoplan.theory import validate_theory


def check_theory(theory) -> None:
    assert validate_theory(theory)
    init = oracle.initial_states(theory)
    assert sum(p for _, p in init) == 1
    for action in theory.actions:
        for state, _ in init:
            if not oracle.is_executable(theory, state, action):
                continue
            row = sum(p for _, _, p, _ in oracle.successors(theory, state, action))
            assert row == 1, f"row sum {row} for {action.name}"
    belief = oracle.initial_belief(theory)
    for action in theory.actions:
        updated = oracle.belief_update(theory, belief, action.name)
        assert sum(updated.values()) == 1


def check_answer_sets(theory, horizon: int) -> None:
    program = compiler.compile_theory(theory, horizon)
    for h in enumerate_answer_sets(program):
        for t in range(horizon):
            occ = [a for a, v in h.items()
                   if a[0] == "occ" and a[2] == t and v >= 1]
            assert len(occ) == 1, occ
        for t in range(horizon + 1):
            holds = {a[1] for a, v in h.items()
                     if a[0] == "holds" and a[2] == t and v >= 1}
            for lit in holds:
                comp = lit[1:] if lit.startswith("-") else "-" + lit
                assert comp not in holds


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=500)
    parser.add_argument("--deep-seeds", type=int, default=25,
                        help="seeds also checked through answer-set enumeration")
    parser.add_argument("--horizon", type=int, default=2)
    args = parser.parse_args()

    t0 = time.time()
    for seed in range(args.seeds):
        theory = generate_theory(seed)
        check_theory(theory)
        if seed < args.deep_seeds:
            check_answer_sets(theory, args.horizon)
    print(f"{args.seeds} theories ({args.deep_seeds} with answer-set checks) "
          f"passed in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
