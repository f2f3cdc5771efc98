"""Command-line front end: ``pitchfork {check,solve,simulate,scan,gronwall,flow-solve}``.

Every subcommand reads a JSON problem spec (``--spec``), writes its tables
and documents under ``--out`` and finishes with ``manifest.json``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import importlib.util
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dynsys import MapFamily, canonical_family, rotation_2d, rotation_3d, side_reversing_wrap
from .errors import BranchCollapse, NoBifurcation, NotContracting, PitchforkError, SpecError
from .flow import (READINGS, GronwallBounds, GronwallParams, VectorFieldFamily, flow_solve, model_field,
                   time_t_map)
from .geometry import build_mesh
from .graphtransform import (BranchPair, SolverConfig, assemble_bifurcation_report, solve_branches)
from .hypotheses import check_theorem1, default_mesh, find_mu_star
from .io import write_csv, write_json
from .simulate import iterate, start_points

log = logging.getLogger("pitchfork")

FAMILIES = ("canonical", "canonical-reversing", "flow-model", "plugin")
MIN_RESOLUTION = {2: 8, 3: 42}
EXIT_OK, EXIT_ERROR, EXIT_FAILED, EXIT_NO_SOLUTION = 0, 1, 2, 3


# --- problem spec ----------------------------------------------------------------

@dataclass
class ProblemSpec:
    """Validated problem definition.  Unknown keys are rejected."""

    family: str = "canonical"
    plugin: str | None = None
    ambient_dim: int = 2
    rotation: dict = field(default_factory=dict)
    mu: list | None = None
    mu_range: dict | None = None
    alpha: float = 0.2
    alpha1: float = 0.15
    chi: object = "auto"
    mesh_resolution: int | None = None
    n_r: int | None = None
    conditions: list | None = None
    solver: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    gronwall: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    output_dir: str = "out"

    SOLVER_KEYS = ("tol", "max_iter", "method", "depth", "stall_limit", "probe_steps")
    SIMULATE_KEYS = ("r0", "n_dirs", "iterations")
    GRONWALL_KEYS = ("rows", "t", "combine")
    FLOW_KEYS = ("t", "h", "ts", "omega")
    ROTATION_KEYS = ("angle", "axis")
    RANGE_KEYS = ("start", "stop", "step")

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        if not isinstance(d, dict):
            raise SpecError("spec must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise SpecError(f"unknown spec keys: {', '.join(extra)}")
        spec = cls(**d)
        spec.validate()
        return spec

    @classmethod
    def load(cls, path) -> "ProblemSpec":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SpecError(f"cannot read spec {path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec {path} is not valid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def validate(self):
        def sub(name, allowed):
            d = getattr(self, name)
            if d is None:
                return
            if not isinstance(d, dict):
                raise SpecError(f"'{name}' must be an object")
            bad = sorted(set(d) - set(allowed))
            if bad:
                raise SpecError(f"unknown keys in '{name}': {', '.join(bad)}")

        sub("solver", self.SOLVER_KEYS)
        sub("simulate", self.SIMULATE_KEYS)
        sub("gronwall", self.GRONWALL_KEYS)
        sub("flow", self.FLOW_KEYS)
        sub("rotation", self.ROTATION_KEYS)
        sub("mu_range", self.RANGE_KEYS)
        if self.family not in FAMILIES:
            raise SpecError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if (self.family == "plugin") != (self.plugin is not None):
            raise SpecError("'plugin' path is required exactly when family is 'plugin'")
        if self.ambient_dim not in MIN_RESOLUTION:
            raise SpecError("ambient_dim must be 2 or 3")
        if self.mesh_resolution is not None and self.mesh_resolution < MIN_RESOLUTION[self.ambient_dim]:
            raise SpecError(f"mesh_resolution must be >= {MIN_RESOLUTION[self.ambient_dim]} for m={self.ambient_dim}")
        if self.n_r is not None and self.n_r < 8:
            raise SpecError("n_r must be >= 8")
        if not 0 < self.alpha1 < self.alpha:
            raise SpecError("need 0 < alpha1 < alpha")
        if not (self.chi in ("auto", "linear") or isinstance(self.chi, (int, float))):
            raise SpecError("chi must be 'auto', 'linear' or a number")
        if self.mu is not None and self.mu_range is not None:
            raise SpecError("give either 'mu' or 'mu_range', not both")
        if self.mu is not None and not (isinstance(self.mu, list)
                                        and all(isinstance(v, (int, float)) for v in self.mu)):
            raise SpecError("'mu' must be a list of numbers")
        if self.mu_range is not None and set(self.mu_range) != set(self.RANGE_KEYS):
            raise SpecError("'mu_range' needs start, stop and step")

    def mu_values(self) -> list[float]:
        """Parameter values; raises SpecError when none are given."""
        if self.mu is not None:
            vals = [float(v) for v in self.mu]
        elif self.mu_range is not None:
            a, b, h = (float(self.mu_range[k]) for k in self.RANGE_KEYS)
            if h <= 0:
                raise SpecError("mu_range step must be positive")
            n = int(np.floor((b - a) / h + 1e-9)) + 1
            vals = [round(a + i * h, 12) for i in range(max(n, 0))]
        else:
            raise SpecError("spec has no 'mu' or 'mu_range'")
        return vals

    def check_mu(self, F: MapFamily | VectorFieldFamily, mus):
        lo, hi = F.mu_range
        bad = [m for m in mus if not lo - 1e-15 <= m <= hi + 1e-15]
        if bad:
            raise SpecError(f"mu values {bad} outside the family range [{lo:g}, {hi:g}]")

    def solver_config(self) -> SolverConfig:
        flow = self.family == "flow-model"
        base = {"chi": self.chi, "alpha1": self.alpha1,
                "mesh_resolution": self.mesh_resolution or (64 if flow and self.ambient_dim == 2 else None),
                "n_r": self.n_r or (16 if flow else 64)}
        if flow:
            base["probe_steps"] = 25
        base.update(self.solver)
        return SolverConfig(**base)


# --- family construction ----------------------------------------------------------

def _rotation(spec: ProblemSpec):
    angle = float(spec.rotation.get("angle", 0.0))
    if spec.ambient_dim == 2:
        return rotation_2d(angle)
    return rotation_3d(spec.rotation.get("axis", [0.0, 0.0, 1.0]), angle)


def load_plugin(path) -> object:
    path = Path(path)
    if not path.is_file():
        raise SpecError(f"plugin file {path} not found")
    mod_spec = importlib.util.spec_from_file_location(f"pitchfork_plugin_{path.stem}", path)
    mod = importlib.util.module_from_spec(mod_spec)
    mod_spec.loader.exec_module(mod)
    if not hasattr(mod, "build_family"):
        raise SpecError(f"plugin {path} defines no build_family(spec)")
    return mod.build_family


def build_field(spec: ProblemSpec) -> VectorFieldFamily:
    if spec.family != "flow-model":
        raise SpecError(f"family {spec.family!r} is not a flow")
    return model_field(spec.ambient_dim, float(spec.flow.get("omega", 1.0)), spec.alpha)


def build_family(spec: ProblemSpec) -> MapFamily:
    """The map family described by ``spec`` (flows become their time-t map)."""
    if spec.family in ("canonical", "canonical-reversing"):
        F = canonical_family(spec.ambient_dim, _rotation(spec), alpha=spec.alpha)
        return side_reversing_wrap(F) if spec.family == "canonical-reversing" else F
    if spec.family == "flow-model":
        return time_t_map(build_field(spec), float(spec.flow.get("t", 1.0)), float(spec.flow.get("h", 1e-3)))
    F = load_plugin(spec.plugin)(spec.to_dict())
    if not isinstance(F, MapFamily):
        raise SpecError("plugin build_family must return a MapFamily")
    return F


# --- run bookkeeping ----------------------------------------------------------------

@dataclass
class RunManifest:
    spec_hash: str
    version: str
    command: str
    started: str
    finished: str = ""
    outputs: list = field(default_factory=list)
    exit_code: int | None = None

    def write(self, out: Path) -> Path:
        missing = [p for p in self.outputs if not (out / p).exists()]
        if missing:
            raise PitchforkError(f"declared outputs missing: {missing}")
        return write_json(out / "manifest.json", asdict(self))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _tag(mu: float) -> str:
    return f"{mu:+.6f}".replace("+", "p").replace("-", "m").replace(".", "_")


class Run:
    """Collects outputs of one subcommand under ``out``."""

    def __init__(self, spec: ProblemSpec, out: Path, command: str, threads: int, seed: int):
        self.spec, self.out, self.threads, self.seed = spec, out, threads, seed
        self.manifest = RunManifest(spec.digest(), __version__, command, _now())

    def csv(self, name, header, rows):
        write_csv(self.out / name, header, rows)
        self.manifest.outputs.append(name)

    def json(self, name, obj):
        write_json(self.out / name, obj)
        self.manifest.outputs.append(name)

    def map(self, fn, items):
        items = list(items)
        if self.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                return list(ex.map(fn, items))
        return [fn(v) for v in items]

    def finish(self, code: int) -> int:
        self.manifest.finished = _now()
        self.manifest.exit_code = code
        self.manifest.write(self.out)
        return code


# --- subcommands -----------------------------------------------------------------

def cmd_check(run: Run, args) -> int:
    spec = run.spec
    F = build_family(spec)
    mus = spec.mu_values()
    spec.check_mu(F, mus)
    flow = spec.family == "flow-model"
    mesh = build_mesh(F.manifold, spec.mesh_resolution) if spec.mesh_resolution else (
        build_mesh(F.manifold, 16 if F.ambient_dim == 2 else 42) if flow else default_mesh(F))
    n_r = spec.n_r or (16 if flow else 64)
    conds = args.conditions or spec.conditions
    mu_star = 0.0 if spec.family.startswith("canonical") else None
    verdicts = run.map(lambda mu: check_theorem1(F, [mu], alpha1=spec.alpha1, chi=spec.chi, mu_star=mu_star,
                                                  conditions=conds, n_r=n_r, mesh=mesh)[0], mus)
    doc = {"family": F.name, "grid": {"n_r": n_r, "mesh_nodes": len(mesh), "scheme": mesh.scheme},
           "alpha": F.alpha, "alpha1": spec.alpha1, "chi": spec.chi, "mu_star": mu_star,
           "requested": conds, "verdicts": [v.to_dict() for v in verdicts]}
    run.json("verdicts.json", doc)
    for v in verdicts:
        flags = " ".join(f"{k}={'ok' if c.holds else 'FAIL'}" for k, c in v.conditions.items())
        print(f"mu={v.mu:+.6g}: {flags}")
    return EXIT_OK if all(v.overall for v in verdicts) else EXIT_FAILED


def _branch_rows(g):
    mesh = g.mesh
    for i in range(len(mesh)):
        yield [i, *mesh.nodes[i], *np.atleast_1d(mesh.params[i]), g.values[i]]


def _branch_header(mesh):
    m = mesh.nodes.shape[1]
    k = np.atleast_2d(mesh.params).shape[1] if np.ndim(mesh.params) > 1 else 1
    return ["node", *[f"y{j}" for j in range(m)], *[f"p{j}" for j in range(k)], "phi"]


def _export_branches(run: Run, bp: BranchPair, prefix: str):
    for name in ("plus", "minus"):
        g = getattr(bp, name)
        if g is None:
            continue
        tag = f"{prefix}_mu{_tag(bp.mu)}_{name}"
        run.csv(f"{tag}.csv", _branch_header(g.mesh), _branch_rows(g))
        run.csv(f"{tag}_run.csv", ["iteration", "sup_change", "ratio"], bp.runs[name].rows())


def _print_branch_summary(bp: BranchPair):
    s = bp.summary()
    for name in ("plus", "minus"):
        if name in s:
            d = s[name]
            print(f"mu={bp.mu:g} {name} branch: mean offset {d['mean']:.6f}, spread {d['spread']:.1e}, "
                  f"iterations {d['iterations']}, error bound {d['error_bound']:.1e}")
    if bp.swap_deviation is not None:
        print(f"mu={bp.mu:g} swap deviation G(M+) vs M-: {bp.swap_deviation:.1e}")


def cmd_solve(run: Run, args) -> int:
    spec = run.spec
    F = build_family(spec)
    mus = spec.mu_values()
    spec.check_mu(F, mus)
    config = spec.solver_config()
    mu_star = 0.0 if spec.family.startswith("canonical") else None
    if mu_star is None:
        lo, hi = find_mu_star(F, F.mu_range)
        mu_star = 0.5 * (lo + hi)
    mesh = build_mesh(F.manifold, config.mesh_resolution) if config.mesh_resolution else None
    try:
        pairs = run.map(lambda mu: solve_branches(F, mu, config, mu_star, mesh), mus)
    except (NotContracting, NoBifurcation, BranchCollapse) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        run.json("solve_summary.json", {"family": F.name, "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_NO_SOLUTION
    for bp in pairs:
        _export_branches(run, bp, "branch")
        _print_branch_summary(bp)
    run.json("solve_summary.json", {"family": F.name, "mu_star": mu_star,
                                     "entries": [bp.summary() for bp in pairs]})
    return EXIT_OK


def cmd_simulate(run: Run, args) -> int:
    spec = run.spec
    F = build_family(spec)
    mus = spec.mu_values()
    spec.check_mu(F, mus)
    sim = spec.simulate
    r0 = args.r0 if args.r0 is not None else sim.get("r0", [0.05, -0.05])
    n_steps = int(args.iterations or sim.get("iterations", 500))
    n_dirs = int(sim.get("n_dirs", 1))
    step_t = float(F.meta.get("t", 1.0))
    x0 = start_points(F.manifold, r0, n_dirs, seed=run.seed)
    bad = np.abs(np.asarray(r0, dtype=float)) > F.alpha
    if bad.any():
        raise SpecError(f"start offsets {list(np.asarray(r0)[bad])} are outside N(alpha={F.alpha})")
    m = F.ambient_dim
    header = ["mu", "start", "n", "t", *[f"x{j}" for j in range(m)], "r", *[f"y{j}" for j in range(m)]]
    rows = []
    for mu in mus:
        tr = iterate(F, mu, x0, n_steps)
        for j in range(x0.shape[0]):
            if tr.exit_step[j] >= 0:
                log.warning("mu=%g start %d left N(alpha) at step %d", mu, j, tr.exit_step[j])
            last = int(tr.exit_step[j]) if tr.exit_step[j] >= 0 else n_steps + 1
            for n in range(min(last, n_steps + 1)):
                x = tr.points[n, j]
                u = x / np.linalg.norm(x)
                rows.append([mu, j, n, n * step_t, *x, tr.r[n, j], *u])
            fin = tr.r[min(last, n_steps + 1) - 1, j]
            print(f"mu={mu:g} start {j}: r0={tr.r[0, j]:+.6f} -> r_{min(last, n_steps + 1) - 1}={fin:+.3e}")
    run.csv("trajectories.csv", header, rows)
    return EXIT_OK


def cmd_scan(run: Run, args) -> int:
    spec = run.spec
    F = build_family(spec)
    mus = spec.mu_values()
    if not mus:
        raise SpecError("mu range is empty")
    spec.check_mu(F, mus)
    config = spec.solver_config()
    mesh = build_mesh(F.manifold, config.mesh_resolution) if config.mesh_resolution else None
    rep = assemble_bifurcation_report(F, mus, config, mesh, map_fn=run.map)
    lo, hi = rep.mu_star_bracket or (None, None)
    header = ["mu", "branches", "plus_mean", "plus_spread", "minus_mean", "minus_spread",
              "stability_plus", "stability_minus", "stability_M", "mu_star_lo", "mu_star_hi", "note"]
    rows = []
    for e in rep.entries:
        has = e.plus is not None
        rows.append([e.mu, has,
                     float(e.plus.values.mean()) if has else None, float(np.ptp(e.plus.values)) if has else None,
                     float(e.minus.values.mean()) if has else None, float(np.ptp(e.minus.values)) if has else None,
                     e.stability.get("plus"), e.stability.get("minus"), e.stability.get("M"), lo, hi, e.note])
    run.csv("diagram.csv", header, rows)
    run.json("scan.json", rep.to_dict())
    n_b = sum(e.plus is not None for e in rep.entries)
    print(f"{len(mus)} parameter values, branches at {n_b}; mu* bracket {rep.mu_star_bracket}")
    return EXIT_OK


def _read_params_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        unknown = set(r) - {"s", "sigma", "nu", "t"}
        if unknown:
            raise SpecError(f"unknown columns in {path}: {sorted(unknown)}")
        out.append({k: float(v) for k, v in r.items() if v != ""})
    return out


def _bounds_unchecked(p: GronwallParams, combine: str) -> GronwallBounds:
    lam, V = np.linalg.eigh(np.array([[-2 * p.s, p.sigma], [p.sigma, p.nu]]))
    return GronwallBounds(p, float(lam[0]), float(lam[1]), V, combine)


def _reading_name(rd) -> str:
    return f"{rd['labels']}_{rd['gap']}_{rd['e1']}"


def cmd_gronwall(run: Run, args) -> int:
    spec = run.spec
    g = spec.gronwall
    rows_in = _read_params_csv(args.params) if args.params else g.get("rows")
    if not rows_in:
        raise SpecError("no Gronwall parameter rows (spec 'gronwall.rows' or --params)")
    default_t = g.get("t", [1.0])
    combine = g.get("combine", "reference")
    header = ["row", "s", "sigma", "nu", "t", "violation", "violated", "lambda_minus", "lambda_plus",
              "ode_residual", *[f"ref_E{i}" for i in range(4)], *[f"E{i}" for i in range(4)]]
    for rd in READINGS:
        n = _reading_name(rd)
        header += [f"{n}_{k}" for k in ("lambda_minus", "lambda_plus", "kappa1", "kappa2", "kappa1_bar",
                                         "kappa2_bar", "E0", "E1", "E2", "E3", "max_discrepancy")]
    out = []
    for i, r in enumerate(rows_in):
        extra = set(r) - {"s", "sigma", "nu", "t"}
        if extra:
            raise SpecError(f"unknown keys in gronwall row {i}: {sorted(extra)}")
        p = GronwallParams(float(r["s"]), float(r["sigma"]), float(r["nu"]))
        gb = _bounds_unchecked(p, combine)
        bad = p.ineq_violations()
        if not gb.lambda_minus < 0 <= gb.lambda_plus:
            bad = bad + ["eigenvalue signs"]
        ts = np.atleast_1d(r["t"]) if "t" in r else np.asarray(default_t, dtype=float)
        ref = gb.reference(ts)
        used = gb.E(ts)
        for k, t in enumerate(ts):
            row = [i, p.s, p.sigma, p.nu, float(t), bool(bad), ";".join(bad), gb.lambda_minus, gb.lambda_plus,
                   gb.ode_residual([t]), *ref[k], *used[k]]
            for rd in READINGS:
                pr = gb.printed([t], rd)
                E = pr["E"][0]
                with np.errstate(invalid="ignore"):
                    dmax = float(np.nanmax(np.abs(E - ref[k]))) if np.isfinite(E).any() else float("nan")
                row += [pr["lambda_minus"], pr["lambda_plus"], pr["kappa1"], pr["kappa2"], pr["kappa1_bar"],
                        pr["kappa2_bar"], *E, dmax]
            out.append(row)
        if bad:
            print(f"row {i}: (s={p.s:g}, sigma={p.sigma:g}, nu={p.nu:g}) violates {', '.join(bad)}")
    run.csv("gronwall.csv", header, out)
    return EXIT_OK


def cmd_flow_solve(run: Run, args) -> int:
    spec = run.spec
    X = build_field(spec)
    mus = spec.mu_values()
    spec.check_mu(X, mus)
    config = spec.solver_config()
    fl = spec.flow
    kw = {"t": float(fl.get("t", 1.0)), "h": float(fl.get("h", 1e-3)),
          "ts": tuple(fl.get("ts", (0.37, 1.0, 1.5, 2.0))), "alpha1": spec.alpha1}
    try:
        results = run.map(lambda mu: flow_solve(X, mu, config=config, **kw), mus)
    except (NotContracting, NoBifurcation, BranchCollapse) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        run.json("flow_summary.json", {"family": X.name, "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_NO_SOLUTION
    for res in results:
        _export_branches(run, res.branches, "flow")
        _print_branch_summary(res.branches)
        print(f"mu={res.mu:g} invariance across t: max deviation {res.invariance['max']:.1e}")
    run.json("flow_summary.json", {"family": X.name, "entries": [r.to_dict() for r in results]})
    return EXIT_OK


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "simulate": cmd_simulate, "scan": cmd_scan,
            "gronwall": cmd_gronwall, "flow-solve": cmd_flow_solve}


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--spec", type=Path, default=d(None), help="problem spec (JSON)")
    p.add_argument("--out", type=Path, default=d(None), help="output directory (overrides spec output_dir)")
    p.add_argument("--threads", type=int, default=d(1), help="parallel workers across mu values")
    p.add_argument("--seed", type=int, default=d(0), help="seed for sampled start points")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pitchfork", description="Pitchfork bifurcations of invariant hypersurfaces.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)
    sp = {}
    for name in COMMANDS:
        p = sp[name] = sub.add_parser(name)
        # accepted after the subcommand too, without overwriting earlier values
        _global_flags(p, suppress=True)
        p.add_argument("--mu", type=float, nargs="+", help="parameter values (override the spec)")
    sp["check"].add_argument("--conditions", nargs="+", help="e.g. iii v")
    sp["simulate"].add_argument("--r0", type=float, nargs="+")
    sp["simulate"].add_argument("--iterations", type=int)
    sp["gronwall"].add_argument("--params", type=Path, help="CSV with s,sigma,nu[,t]")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    for name in ("conditions", "r0", "iterations", "params"):
        if not hasattr(args, name):
            setattr(args, name, None)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        spec = ProblemSpec.load(args.spec) if args.spec else ProblemSpec()
        if args.mu is not None:
            spec.mu, spec.mu_range = list(args.mu), None
        out = Path(args.out or spec.output_dir)
        run = Run(spec, out, args.command, max(1, args.threads), args.seed)
        code = COMMANDS[args.command](run, args)
        return run.finish(code)
    except (PitchforkError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
