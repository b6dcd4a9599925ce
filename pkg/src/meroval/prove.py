"""Command-line saturation prover speaking TPTP FOF and SZS statuses.

Axioms and the negated conjecture are clausified and saturated. A
completed saturation without refutation prints GaveUp: the clause form
is not preserved well enough under Skolemization to justify the stronger
CounterSatisfiable claim, and callers compare this verdict against
in-process saturation results.
"""

import argparse

from .fol import Not, clausify_all
from .prover import saturate
from .tptp import read_problem


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="meroval.prove",
        description="saturation prover for TPTP FOF problems")
    parser.add_argument("problem", help="problem file (fof format)")
    parser.add_argument("--time-limit", type=float, default=60.0,
                        help="wall clock budget in seconds")
    parser.add_argument("--max-clauses", type=int, default=None,
                        help="generated-clause budget")
    args = parser.parse_args(argv)

    with open(args.problem, encoding="utf-8") as fh:
        entries = read_problem(fh.read())
    conjectures = [f for _, role, f in entries if role == "conjecture"]
    formulas = [f for _, role, f in entries if role != "conjecture"]
    formulas.extend(Not(c) for c in conjectures)
    clauses = clausify_all(formulas)
    result = saturate(clauses, max_seconds=args.time_limit,
                      max_clauses=args.max_clauses)
    status = {
        "proved": "Theorem" if conjectures else "Unsatisfiable",
        "gaveUp": "GaveUp",
        "timeout": "Timeout",
    }[result.verdict]
    print(f"% SZS status {status} for {args.problem}")
    print(f"% {result.generated} clauses generated, "
          f"{result.processed} processed, {result.seconds:.2f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
