"""Bifurcation diagram of the canonical family over a mu grid.

    python3 scripts/pitchfork_scan.py [--reversing] [--n 41] [--out out/scan.csv]
"""
import argparse
from pathlib import Path

import numpy as np

from pitchfork import SolverConfig, assemble_bifurcation_report, build_mesh, canonical_family, side_reversing_wrap
from pitchfork.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reversing", action="store_true", help="use the side-reversing variant")
    ap.add_argument("--n", type=int, default=41)
    ap.add_argument("--out", type=Path, default=Path("out/scan.csv"))
    args = ap.parse_args()

    F = canonical_family(2)
    if args.reversing:
        F = side_reversing_wrap(F)
    mus = np.round(np.linspace(-1 / 25, 1 / 25, args.n), 12)
    rep = assemble_bifurcation_report(F, mus, SolverConfig(n_r=16), build_mesh(F.manifold, 64))
    rows = []
    for e in rep.entries:
        plus = float(e.plus.values.mean()) if e.plus is not None else None
        minus = float(e.minus.values.mean()) if e.minus is not None else None
        rows.append([e.mu, plus, minus, np.sqrt(e.mu) if e.mu > 0 else None, e.stability.get("M")])
    write_csv(args.out, ["mu", "plus", "minus", "sqrt_mu", "M"], rows)
    print(f"mu* bracket {rep.mu_star_bracket}")
    for mu, plus, minus, ref, st in rows[:: max(1, len(rows) // 10)]:
        b = f"{plus:+.6f} {minus:+.6f}" if plus is not None else "   no branches   "
        print(f"mu={mu:+.4f}  {b}  M {st}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
