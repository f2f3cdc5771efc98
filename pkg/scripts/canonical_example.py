"""Reproduce the canonical example: verdicts, both branches, and orbit behaviour.

    python3 scripts/canonical_example.py [--dim 3] [--out out/canonical]
"""
import argparse
from pathlib import Path

import numpy as np

from pitchfork import (SolverConfig, build_mesh, canonical_family, check_theorem1, find_mu_star, iterate,
                       rotation_2d, rotation_3d, solve_branches)
from pitchfork.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=2, choices=(2, 3))
    ap.add_argument("--out", type=Path, default=Path("out/canonical"))
    args = ap.parse_args()

    A = rotation_2d(0.3) if args.dim == 2 else rotation_3d([1, 2, 3], 0.7)
    F = canonical_family(args.dim, A)
    res = 256 if args.dim == 2 else 162
    mesh = build_mesh(F.manifold, res)

    lo, hi = find_mu_star(F)
    print(f"mu* in [{lo:.3e}, {hi:.3e}]")

    small = build_mesh(F.manifold, 16 if args.dim == 2 else 42)
    for v in check_theorem1(F, [-1 / 25, -1 / 50, 1 / 50, 1 / 25], mu_star=0.0, mesh=small):
        flags = " ".join(f"{k}={'ok' if c.holds else 'FAIL'}" for k, c in v.conditions.items())
        extra = f"  K=[{v.shell.inner_cut:.4f}, {v.shell.alpha}]  c*={v.report.c_star:.6f}" if v.report else ""
        print(f"mu={v.mu:+.4f}: {flags}{extra}")

    rows = []
    for mu in (1 / 100, 1 / 50, 1 / 25):
        bp = solve_branches(F, mu, SolverConfig(mesh_resolution=res), 0.0, mesh)
        for name, sgn in (("plus", 1), ("minus", -1)):
            g, run = getattr(bp, name), bp.runs[name]
            err = float(np.max(np.abs(g.values - sgn * np.sqrt(mu))))
            rows.append([mu, name, run.iterates, err, run.error_bound, run.c_star_used, run.max_ratio])
            print(f"mu={mu:.4f} {name}: error {err:.1e}, bound {run.error_bound:.1e}, {run.iterates} iterations")
    write_csv(args.out / "branches.csv", ["mu", "branch", "iterations", "error", "error_bound", "c_star",
                                           "max_ratio"], rows)

    u = np.eye(args.dim)[:1]
    x0 = F.manifold.embed(np.array([0.18, 1e-3, 0.05, -0.05]), np.repeat(u, 4, axis=0))
    orbit_rows = []
    for mu in (-1 / 50, 1 / 50):
        tr = iterate(F, mu, x0, 2000)
        for n in range(0, 2001, 50):
            orbit_rows.append([mu, n, *tr.r[n]])
        print(f"mu={mu:+.3f}: r_2000 = {np.array2string(tr.r[-1], precision=6)}")
    write_csv(args.out / "orbits.csv", ["mu", "n", "r_0.18", "r_0.001", "r_0.05", "r_-0.05"], orbit_rows)
    print(f"wrote {args.out}/branches.csv and orbits.csv")


if __name__ == "__main__":
    main()
