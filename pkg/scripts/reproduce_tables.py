#!/usr/bin/env python3
"""K_I, fitted exponent and verdict for every tabulated chain.

Usage: python3 scripts/reproduce_tables.py [--q-limit 1e24] [--table I] [--csv-dir out/]
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from pgt import Budget, ChainSpec, run
from pgt.cli import dataset_csv

X, T = ChainSpec.xx, ChainSpec.staggered


def S(n_cells: int, g: str) -> ChainSpec:
    return ChainSpec.ssh(n_cells, g=g)


# (spec, tabulated K_I, tabulated exponent or None)
TABLES = {
    "I": [(X(4), 1, 0.49134), (X(5), 1, 0.50031), (X(6), 2, 0.94557), (X(7), 3, 1.5067), (X(8), None, None),
          (X(9), 3, 1.5349), (X(10), 4, 1.8185)],
    "II": [(T(4, 1, 10), 1, 0.500), (T(8, 1, 5), 3, 1.502), (T(8, 1, 100), 3, None)],
    "III": [(S(2, "0"), 1, 0.502), (S(2, "1"), 1, 0.50031), (S(2, "4/3"), 1, 0.4969), (S(2, "sqrt(3)"), 2, 1.0103),
            (S(2, "2"), 2, 0.9896), (S(2, "sqrt(2)"), 3, 1.4443), (S(2, "sqrt(5)"), 3, 1.3986)],
    "IV": [(S(3, "0"), 3, 1.5039), (S(3, "1"), 3, 1.4943), (S(4, "0"), 3, 1.5152), (S(4, "1"), 4, 1.9804),
           (S(5, "0"), 4, None), (S(5, "1"), 4, 2.1082)],
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--q-limit", type=float, default=1e24, help="largest grid index searched")
    parser.add_argument("--table", choices=sorted(TABLES), action="append", help="restrict to a table (repeatable)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--csv-dir", type=Path, help="write each frontier as CSV here")
    args = parser.parse_args(argv)
    budget = Budget(q_limit=int(args.q_limit), workers=args.workers)
    if args.csv_dir:
        args.csv_dir.mkdir(parents=True, exist_ok=True)
    header = f"{'table':<5} {'chain':<40} {'K_I':>3} {'ref':>4} {'alpha':>7} {'ref':>7} {'pts':>4} {'sec':>5}  verdict"
    print(header)
    print("-" * len(header))
    for name in args.table or sorted(TABLES):
        for spec, k_ref, a_ref in TABLES[name]:
            start = time.perf_counter()
            result = run(spec, budget)
            k_i = result.analysis.frequencies.k_i
            fit = result.fit
            alpha = f"{fit.alpha:7.4f}" if fit.n_points >= 2 else "      -"
            print(
                f"{name:<5} {spec.describe():<40} {k_i:>3} {k_ref if k_ref is not None else '-':>4} {alpha} "
                f"{a_ref if a_ref is not None else '-':>7} {fit.n_points:>4} {time.perf_counter() - start:5.1f}  "
                f"{result.verdict.outcome.value}",
                flush=True,
            )
            if args.csv_dir and result.dataset.points:
                slug = spec.describe().replace(" ", "_").replace(">", "").replace("/", "over")
                (args.csv_dir / f"{slug}.csv").write_text(dataset_csv(result.dataset))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
