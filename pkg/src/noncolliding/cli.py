"""Command-line interface.

Subcommands ``sample``, ``charpoly``, ``kernel``, ``simulate``, ``verify`` and
``identities`` share the flags ``--seed``, ``--samples``, ``--out``,
``--format`` and ``--threads``.  Exit status is 2 on usage errors, 1 when a
report carries ``pass: false`` and 0 otherwise.  Floats are written with 17
significant digits so reports can be diffed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys

import numpy as np

from .battery import CHECKS, run_battery
from .biorth import InitialConfig, corr_kernel
from .charpoly import closed_form, mc_charpoly
from .ensembles import EnsembleSpec, draw, resolve_seed, write_samples_csv
from .equivalence import verify_density_shift, verify_det_block, verify_onepoint, verify_spacetime
from .processes import simulate_euler, simulate_matrix, warm_start

__all__ = ["main", "run", "parse_alpha", "parse_grid", "parse_rows", "dumps"]


class UsageError(Exception):
    """Bad flag values detected after argparse (exit status 2)."""


# -- parsing ---------------------------------------------------------------------


def _parse_complex(token: str) -> complex:
    tok = token.strip().replace(" ", "")
    if not tok:
        raise UsageError("empty alpha entry")
    try:
        if tok.endswith("i"):
            return complex(tok[:-1] + "j")
        return complex(float(tok), 0.0)
    except ValueError as exc:
        raise UsageError(f"cannot parse alpha entry {token!r}; use 're' or 're+imi'") from exc


def parse_alpha(text: str) -> np.ndarray:
    """Comma list of ``re`` or ``re+imi`` entries (``1.5``, ``0.3-2i``, ``2i``)."""
    values = np.array([_parse_complex(tok) for tok in text.split(",")], dtype=complex)
    return values.real.copy() if np.all(values.imag == 0) else values


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma list of floats."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return np.linspace(float(start), float(stop), int(num))
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}") from exc


def parse_rows(text: str) -> np.ndarray:
    """Rows separated by ``;``, entries by ``,``: ``"-1,1;0,2"`` -> ``[[-1, 1], [0, 2]]``."""
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse rows {text!r}") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError("rows must be non-empty and of equal length")
    return np.array(rows)


# -- output ----------------------------------------------------------------------


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    return format(v, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits.

    Complex numbers become ``[re, im]``; non-finite floats become ``null``.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_fmt_float(obj.real)}, {_fmt_float(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(_fmt_float(float(v)) if math.isfinite(v) else str(float(v)))
            else:
                cells.append(str(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _emit(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# -- subcommands -------------------------------------------------------------------


def _spec(args, n_attr="N") -> EnsembleSpec:
    try:
        return EnsembleSpec(args.ensemble, getattr(args, n_attr), nu=args.nu, sigma2=args.sigma2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_sample(args):
    spec = _spec(args)
    samples = 1 if args.samples is None else args.samples
    x = draw(spec, samples, resolve_seed(args.seed))
    if args.format == "json":
        return dumps({"ensemble": spec.kind, "N": spec.N, "nu": spec.nu, "sigma2": spec.sigma2,
                      "seed": resolve_seed(args.seed), "samples": x}) + "\n", True
    return write_samples_csv(None, x), True


def cmd_charpoly(args):
    spec = _spec(args)
    alpha = parse_alpha(args.alpha)
    report = {"ensemble": spec.kind, "N": spec.N, "nu": spec.nu, "sigma2": spec.sigma2, "alpha": alpha}
    exact = None
    if alpha.size % 2 == 0:
        exact = closed_form(spec, alpha, form=args.form)
        exact = exact.real if np.imag(exact) == 0 else exact
        report["closed_form"] = exact
    elif not args.samples:
        raise UsageError("an odd number of alpha values has no closed form; pass --samples for Monte Carlo")
    ok = True
    if args.samples:
        mc = mc_charpoly(spec, alpha, args.samples, resolve_seed(args.seed), threads=args.threads)
        report["mc"] = {"estimate": mc.estimate, "stderr": mc.stderr, "samples": mc.samples, "seed": mc.seed}
        if exact is not None:
            z = float(mc.z(exact))
            ok = z <= 3.0
            report["z"] = z
            report["pass"] = ok
    report["estimate"] = exact if exact is not None else report["mc"]["estimate"]
    if args.format == "csv":
        flat = [(k, v) for k, v in report.items() if k not in ("alpha", "mc")]
        flat += [(f"mc_{k}", v) for k, v in report.get("mc", {}).items()]
        flat += [(f"alpha_{i + 1}", v) for i, v in enumerate(alpha)]
        return _csv(["key", "value"], [(k, v) for k, v in flat]), ok
    return dumps(report) + "\n", ok


def _initial_config(args) -> InitialConfig:
    if args.atoms is None:
        return InitialConfig.delta0(args.N)
    atoms = parse_grid(args.atoms)
    if atoms.size != args.N:
        raise UsageError("--atoms needs N distinct points")
    return InitialConfig.from_atoms(atoms, [1] * atoms.size)


def cmd_kernel(args):
    xi = _initial_config(args)
    x = parse_grid(args.x)
    y = x if args.y is None else parse_grid(args.y)
    s = args.t if args.s is None else args.s
    if args.y is None:
        xs, ys = x, x
    else:
        xs, ys = (a.ravel() for a in np.meshgrid(x, y, indexing="ij"))
    values = np.atleast_1d(corr_kernel(args.family, s, xs, args.t, ys, xi, args.nu))
    if args.format == "json":
        return dumps({"family": args.family, "N": args.N, "nu": args.nu, "s": s, "t": args.t,
                      "atoms": None if args.atoms is None else list(xi.atoms),
                      "x": xs, "y": ys, "K": values}) + "\n", True
    return _csv(["x", "y", "K"], zip(xs, ys, values)), True


def cmd_simulate(args):
    n_paths = 1 if args.samples is None else args.samples
    seed = resolve_seed(args.seed)
    times = parse_grid(args.times)
    if args.method == "matrix":
        traj = simulate_matrix(args.family, args.N, args.nu, times, seed=seed, n_paths=n_paths)
    else:
        if args.dt is None:
            raise UsageError("--dt is required for the euler method")
        if args.x0 is not None:
            x0 = parse_grid(args.x0)
        elif args.warm_start is not None:
            x0 = warm_start(args.family, args.N, args.nu, args.warm_start, seed=seed, n_paths=n_paths)
        else:
            raise UsageError("the euler method needs --x0 or --warm-start T_EPS")
        traj = simulate_euler(args.family, args.N, args.nu, x0, args.dt, float(times[-1]),
                              seed=seed, n_paths=n_paths, times=times)
        if args.x0 is None:
            traj.extra["warm_start"] = args.warm_start
    if args.format == "json":
        return dumps({"manifest": traj.manifest(), "times": traj.times, "paths": traj.paths}) + "\n", True
    if args.manifest is not None:
        with open(args.manifest, "w") as fh:
            fh.write(dumps(traj.manifest()) + "\n")
    return traj.to_csv(), True


def _default_grid(family):
    return "-2:2:5" if family == "bm" else "0.25:3:5"


def cmd_verify(args):
    family = args.family
    samples = 100_000 if args.samples is None else args.samples
    common = dict(samples=samples, seed=resolve_seed(args.seed), threads=args.threads, route=args.route)
    base = (family, args.N, args.nu, args.sigma2)
    if args.op == "onepoint":
        rep = verify_onepoint(*base, args.t, parse_grid(args.grid or _default_grid(family)), **common)
    elif args.op == "det_block":
        if args.points is None:
            raise UsageError("det_block needs --points 'x1,x2;...'")
        rep = verify_det_block(*base, args.t, parse_rows(args.points), **common)
    elif args.op == "density_shift":
        if args.configs is None:
            raise UsageError("density_shift needs --configs 'y1,...,yN;...'")
        rep = verify_density_shift(*base, args.t, parse_rows(args.configs), **common)
    else:
        if args.s is None or args.pairs is None:
            raise UsageError("spacetime needs --s and --pairs 'x,y;...'")
        rep = verify_spacetime(*base, args.s, args.t, parse_rows(args.pairs), **common)
    if args.format == "csv":
        grid = np.asarray(rep["grid"], dtype=float).reshape(len(rep["z"]), -1)
        cols = [f"g_{j + 1}" for j in range(grid.shape[1])]
        rows = [(*g, e, c, s, z) for g, e, c, s, z in zip(grid, rep["estimates"], rep["closed_form"], rep["stderr"], rep["z"])]
        return _csv(cols + ["estimate", "closed_form", "stderr", "z"], rows), rep["pass"]
    return dumps(rep) + "\n", rep["pass"]


def cmd_identities(args):
    seed = resolve_seed(args.seed)
    names = None if args.checks is None else args.checks.split(",")
    try:
        rep = run_battery(seed, names)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    if args.format == "csv":
        rows = [(c["name"], c["cases"], c["max_rel_err"], c["tol"], str(c["pass"]).lower(), c["seconds"]) for c in rep["checks"]]
        return _csv(["name", "cases", "max_rel_err", "tol", "pass", "seconds"], rows), rep["pass"]
    return dumps(rep) + "\n", rep["pass"]


# -- parser ------------------------------------------------------------------------


def _common(p, default_format):
    p.add_argument("--seed", default=None, help="integer or 0x-hex seed; falls back to $RMT_SEED, then 0")
    p.add_argument("--samples", type=int, default=None, help="draws, Monte Carlo samples or paths")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--threads", type=int, default=1)


def _ensemble_flags(p):
    p.add_argument("--ensemble", required=True, help="gue, chgue, classC or classD")
    p.add_argument("--N", "--n-matrix", dest="N", type=int, default=1, help="matrix size N")
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--sigma2", type=float, default=1.0)


def _family_flags(p, need_t=True):
    p.add_argument("--family", choices=("bm", "besq"), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--nu", type=float, default=0.0)
    if need_t:
        p.add_argument("--t", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noncolliding", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="ensemble draws")
    _common(p, "csv")
    _ensemble_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("charpoly", help="characteristic-polynomial averages")
    _common(p, "json")
    _ensemble_flags(p)
    p.add_argument("--alpha", required=True, help="comma list of re or re+imi")
    p.add_argument("--form", choices=("monic", "pair"), default="monic")
    p.set_defaults(func=cmd_charpoly)

    p = sub.add_parser("kernel", help="correlation kernel on a grid")
    _common(p, "csv")
    _family_flags(p)
    p.add_argument("--s", type=float, default=None, help="time of x (default: --t)")
    p.add_argument("--x", required=True, help="grid: start:stop:num or comma list")
    p.add_argument("--y", default=None, help="second grid; omitted means the diagonal x = y")
    p.add_argument("--atoms", default=None, help="distinct initial points (default N delta_0)")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("simulate", help="noncolliding trajectories")
    _common(p, "csv")
    _family_flags(p, need_t=False)
    p.add_argument("--method", choices=("euler", "matrix"), default="matrix")
    p.add_argument("--times", required=True, help="output times: start:stop:num or comma list")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--x0", default=None, help="ordered start for euler")
    p.add_argument("--warm-start", dest="warm_start", type=float, default=None,
                   help="start euler from an exact matrix-route state at this time")
    p.add_argument("--manifest", default=None, help="write the JSON manifest here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="time-shift equivalence reports")
    vsub = p.add_subparsers(dest="op", required=True)
    for op in ("onepoint", "det_block", "density_shift", "spacetime"):
        q = vsub.add_parser(op, aliases=[op.replace("_", "-")] if "_" in op else [])
        _common(q, "json")
        _family_flags(q)
        q.add_argument("--sigma2", type=float, default=0.5)
        q.add_argument("--route", choices=("classC", "classD"), default=None)
        if op == "onepoint":
            q.add_argument("--grid", default=None)
        elif op == "det_block":
            q.add_argument("--points", default=None, help="blocks 'x1,x2;x1,x2;...'")
        elif op == "density_shift":
            q.add_argument("--configs", default=None, help="configurations 'y1,..,yN;...'")
        else:
            q.add_argument("--s", type=float, default=None)
            q.add_argument("--pairs", default=None, help="'x,y;x,y;...'")
        q.set_defaults(func=cmd_verify, op=op)

    p = sub.add_parser("identities", help="deterministic identity battery")
    _common(p, "json")
    p.add_argument("--checks", default=None, help=f"comma list from {','.join(CHECKS)}")
    p.set_defaults(func=cmd_identities)
    return parser


def run(argv=None) -> int:
    """Run the CLI and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be at least 1")
        if args.samples is not None and args.samples < 0:
            raise UsageError("--samples must be nonnegative")
        if args.seed is not None:
            resolve_seed(args.seed)
        text, ok = args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"noncolliding {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        # two closed forms that should agree did not
        print(f"noncolliding {args.command}: verification failed: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0 if ok else 1


def main():
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)
