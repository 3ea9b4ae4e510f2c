#!/usr/bin/env python3
"""Log-log arrival-time plots (SVG) for the N=8 SSH couplings and the XX chains.

Usage: python3 scripts/scaling_figures.py --out figures/ [--q-limit 1e24]
"""

from __future__ import annotations

import argparse
from pathlib import Path

from pgt import Budget, ChainSpec, run
from pgt.svg import loglog_svg

FIGURES = {
    "ssh8": [ChainSpec.ssh(2, g=g) for g in ("0", "1", "4/3", "sqrt(3)", "2", "sqrt(2)", "sqrt(5)")],
    "xx": [ChainSpec.xx(n) for n in (4, 5, 6, 7, 9, 10)],
    "ssh_lengths": [ChainSpec.ssh(n, g=g) for n in (3, 4, 5) for g in ("0", "1")],
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("figures"))
    parser.add_argument("--q-limit", type=float, default=1e24)
    parser.add_argument("--figure", choices=sorted(FIGURES), action="append")
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    budget = Budget(q_limit=int(args.q_limit))
    for name in args.figure or sorted(FIGURES):
        for i, spec in enumerate(FIGURES[name]):
            result = run(spec, budget)
            ds, fit = result.dataset, result.fit
            if not [p for p in ds.points if p.epsilon > 0]:
                print(f"{spec.describe()}: nothing to plot ({result.verdict})")
                continue
            path = args.out / f"{name}_{i}.svg"
            path.write_text(loglog_svg(ds.epsilons(), ds.times(), fit.alpha, fit.prefactor, fit.reference, spec.describe()))
            print(f"{path}: {spec.describe()}, alpha = {fit.alpha:.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
