"""Command-line front end.

Subcommands: ``criticals``, ``solve``, ``classify``, ``sweep``, ``verify-tree``.
Every subcommand also accepts ``--config FILE``, a flat ``key = value`` file
whose keys mirror the long flag names; explicit flags win over the file.

Exit codes: 0 success, 1 domain/contract error, 2 usage error, 3 regime or
scan-window error, 4 I/O error, 5 enumeration budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import Regime, classify_point
from .criticals import PrefactorConvention, critical_set
from .errors import DomainError, RegimeError, SOSError
from .model import BranchPattern, ModelParams
from .solvers import (
    RootFindConfig,
    SolutionReport,
    choose_h_star,
    solve_b_nonzero,
    solve_b_zero,
    solve_nonTI_23,
    solve_periodic,
    solve_reduced_system,
    solve_ti,
    ti_roots,
)
from .tree import Label, assign_fields, build_tree, check_compatibility, exact_mu_n, root_marginal

EXIT_IO = 4
SWEEP_SCHEMA = "sostree-sweep/1"
SWEEP_COLUMNS = ["theta", "c", "k", "d", "theta_c", "c_star_1", "c_star_2", "N_predicted", "N_found", "regime"]
MAX_SWEEP_POINTS = 10**7


def fmt_machine(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def fmt_human(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


# ----------------------------------------------------------------------------
# shared option groups


def _add_model(p: argparse.ArgumentParser, pattern: bool = True) -> None:
    p.add_argument("--theta", type=float, help="theta = exp(J*beta)")
    p.add_argument("--k", type=int, help="tree order")
    p.add_argument("--m", type=int, default=2, help="largest spin value (analysis needs 2)")
    if pattern:
        p.add_argument("--pattern", type=BranchPattern.parse, help="branching integers a,b,c,d")
    p.add_argument("--c", type=int, help="field parameter c for the b = 0 branch")


def _add_numerics(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scan", default="-40:40:20001", help="scan window lo:hi:points")
    p.add_argument("--tol", type=float, default=1e-10, help="residual tolerance")
    p.add_argument("--convention", type=PrefactorConvention.parse, default=PrefactorConvention.K_OVER_HSTAR,
                   help="c* prefactor: k (k/h*) or d (d/h*)")
    p.add_argument("--h-star-index", type=int, default=None, help="which root h* of h = k f(h) to use")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write machine-readable output to this file")
    p.add_argument("--format", choices=["csv", "json"], default=None, help="machine output format")


def _cfg(args) -> RootFindConfig:
    return RootFindConfig.parse_scan(args.scan, tol_residual=args.tol)


def _params(args) -> ModelParams:
    if args.theta is None or args.k is None:
        raise DomainError("--theta and --k are required")
    return ModelParams(args.theta, args.k, args.m)


def _emit(args, payload: dict, stdout) -> None:
    """Machine output: to ``--out`` if given, else to stdout when ``--format`` is set."""
    if args.format is None and args.out is None:
        return
    text = dump_json(payload) if args.format in (None, "json") else _flat_csv(payload)
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)


def _flat_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = payload.get("rows")
    if rows:
        cols = list(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([fmt_machine(r[c]) for c in cols])
    else:
        for key in sorted(payload):
            w.writerow([key, fmt_machine(payload[key]) if not isinstance(payload[key], (dict, list)) else json.dumps(payload[key], sort_keys=True)])
    return buf.getvalue()


# ----------------------------------------------------------------------------
# criticals


def cmd_criticals(args, stdout) -> int:
    d, theta = args.d, args.theta
    if d is None or theta is None:
        raise DomainError("--d and --theta are required")
    c = args.c if args.c is not None else 0
    k = args.k if args.k is not None else c + d
    h_star = None
    if k >= 1:
        roots = ti_roots(ModelParams(theta, k), _cfg(args))
        if roots:
            h_star = choose_h_star(roots, args.h_star_index)
    sets = {conv: critical_set(theta, d, k, h_star, conv) for conv in PrefactorConvention}
    base = sets[PrefactorConvention.K_OVER_HSTAR]
    p = lambda *a: print(*a, file=stdout)  # noqa: E731
    p(f"d = {d}, theta = {fmt_human(theta)}, k = {k}, h* = {fmt_human(h_star)}")
    p(f"theta_c = {fmt_human(base.theta_c)}")
    p(f"zeta = {fmt_human(base.zeta)}")
    p(f"D = {fmt_human(base.disc)}")
    if not base.has_pair:
        p("unique-solution regime; no critical pair")
    else:
        if base.x1 == base.x2 or abs(base.x2 - base.x1) <= 1e-9 * base.x2:
            p("note: x1 = x2 (double root, theta = theta_c)")
        p(f"x1 = {fmt_human(base.x1)}, x2 = {fmt_human(base.x2)}")
        p(f"eta1 = {fmt_human(base.eta1)}, eta2 = {fmt_human(base.eta2)}")
        for conv, cs in sets.items():
            p(f"[{conv.value}/h*] c*1 = {fmt_human(cs.c_star_1)}, c*2 = {fmt_human(cs.c_star_2)}")
        p("note: the k/h* and d/h* prefactors disagree unless c = 0; root counts follow k/h*")
    payload = {
        conv.name: {key: (val.name if isinstance(val, PrefactorConvention) else val)
                     for key, val in cs.__dict__.items()}
        for conv, cs in sets.items()
    }
    payload["h_star"] = h_star
    payload["k"] = k
    _emit(args, payload, stdout)
    return 0


# ----------------------------------------------------------------------------
# solve / classify

MODES = ("ti", "periodic", "b-nonzero", "b-zero", "eq23", "system")


def _run_solver(args) -> tuple[SolutionReport, BranchPattern | None]:
    params = _params(args)
    cfg = _cfg(args)
    mode = args.mode
    if mode == "ti":
        return solve_ti(params, cfg), None
    if mode == "periodic":
        return solve_periodic(params, cfg), BranchPattern(0, params.k, params.k, 0)
    if mode == "b-zero":
        if args.c is None:
            raise DomainError("--c is required for --mode b-zero")
        return (solve_b_zero(params, args.c, cfg, args.h_star_index),
                BranchPattern(params.k, 0, args.c, params.k - args.c))
    if args.pattern is None:
        raise DomainError(f"--pattern is required for --mode {mode}")
    if mode == "b-nonzero":
        return solve_b_nonzero(args.pattern, params, cfg), args.pattern
    if mode == "eq23":
        return solve_nonTI_23(args.pattern, params, cfg), args.pattern
    return solve_reduced_system(args.pattern, params, cfg), args.pattern


def _print_report(rep: SolutionReport, stdout) -> None:
    for i, root in enumerate(rep.roots):
        if hasattr(root, "h2"):
            where = f"h2 = {fmt_human(root.h2)}, l2 = {fmt_human(root.l2)}"
        else:
            where = f"h = {fmt_human(root)}"
        tag = f" [{rep.tags[i]}]" if i < len(rep.tags) else ""
        print(f"  root {i}: {where}  residual = {rep.residuals[i]:.3g}  "
              f"slope = {fmt_human(rep.derivatives[i])} ({rep.stability[i]}){tag}", file=stdout)
    print(f"  {rep.regime_note}", file=stdout)


def cmd_solve(args, stdout) -> int:
    rep, _ = _run_solver(args)
    print(f"mode {args.mode}: {len(rep)} root(s)", file=stdout)
    _print_report(rep, stdout)
    if args.mode == "periodic" and "g_prime_at_h_star" in rep.info:
        flag = rep.info["g_prime_below_minus_one"]
        print(f"  g'(h*) = {fmt_human(rep.info['g_prime_at_h_star'])}; g'(h*) < -1: {'yes' if flag else 'no'}",
              file=stdout)
    if args.mode == "b-zero":
        print(f"  h* = {fmt_human(rep.info['h_star'])}; roots with l2 > 0: {rep.info['n_positive_l2']}", file=stdout)
    _emit(args, {"mode": args.mode, **rep.as_dict()}, stdout)
    return 0


def cmd_classify(args, stdout) -> int:
    params = _params(args)
    if args.pattern is None:
        if args.c is None:
            raise DomainError("--pattern or --c is required")
        pattern = BranchPattern(params.k, 0, args.c, params.k - args.c)
    else:
        pattern = args.pattern
    rep = classify_point(pattern, params, _cfg(args), args.convention, args.h_star_index)
    print(f"pattern {pattern.as_tuple()}, theta = {fmt_human(params.theta)}, k = {params.k}", file=stdout)
    print(f"regime {rep.regime.name}: predicted >= {rep.n_solutions_predicted}, found {rep.n_solutions_found}",
          file=stdout)
    print(f"  {rep.theorem_applied}", file=stdout)
    if rep.condition_value is not None:
        print(f"  max |psi'| over fixed points = {fmt_human(rep.condition_value)}", file=stdout)
    _print_report(rep.solutions, stdout)
    print("  families: " + ", ".join(t.value for t in rep.family_tags), file=stdout)
    _emit(args, rep.as_dict(), stdout)
    return 0


# ----------------------------------------------------------------------------
# sweep


def _parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"range must be lo:hi:steps, got {text!r}")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if not lo < hi or steps < 2:
        raise DomainError("range needs lo < hi and steps >= 2")
    return lo, hi, steps


def _parse_ints(text: str) -> list[int]:
    if ":" in text:
        lo, hi = (int(s) for s in text.split(":", 1))
        return list(range(lo, hi + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def sweep_row(task: tuple) -> dict:
    theta, c, k, scan, tol, convention, h_index = task
    params = ModelParams(theta, k)
    cfg = RootFindConfig.parse_scan(scan, tol_residual=tol)
    d = k - c
    rep = classify_point(BranchPattern(k, 0, c, d), params, cfg, PrefactorConvention(convention), h_index)
    crit = rep.criticals
    return {
        "theta": theta,
        "c": c,
        "k": k,
        "d": d,
        "theta_c": crit.theta_c if crit else None,
        "c_star_1": crit.c_star_1 if crit else None,
        "c_star_2": crit.c_star_2 if crit else None,
        "N_predicted": rep.n_solutions_predicted,
        "N_found": rep.n_solutions_found,
        "regime": rep.regime.name,
    }


def run_sweep(theta_range, c_values, k, scan="-40:40:20001", tol=1e-10,
              convention=PrefactorConvention.K_OVER_HSTAR, h_star_index=None, workers=1) -> list[dict]:
    """Rows of the b = 0 phase diagram, theta outer and c inner."""
    lo, hi, steps = theta_range
    thetas = np.linspace(lo, hi, steps).tolist()
    if len(thetas) * len(c_values) > MAX_SWEEP_POINTS:
        raise DomainError(f"sweep has more than {MAX_SWEEP_POINTS} points")
    for c in c_values:
        if not 0 <= c <= k:
            raise DomainError(f"c = {c} outside [0, k = {k}]")
    tasks = [(t, c, k, scan, tol, convention.value, h_star_index) for t in thetas for c in c_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [sweep_row(t) for t in tasks]


def render_sweep(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return dump_json({"schema": SWEEP_SCHEMA, "columns": SWEEP_COLUMNS, "rows": rows})
    buf = io.StringIO()
    buf.write(f"# schema: {SWEEP_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([fmt_machine(r[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args, stdout) -> int:
    if args.k is None or args.theta_range is None or args.c_values is None:
        raise DomainError("--k, --theta-range and --c-values are required")
    rows = run_sweep(_parse_range(args.theta_range), _parse_ints(args.c_values), args.k, args.scan, args.tol,
                     args.convention, args.h_star_index, args.workers)
    text = render_sweep(rows, args.format or "csv")
    if args.out:
        Path(args.out).write_text(text)
        counts = {r.name: sum(1 for row in rows if row["regime"] == r.name) for r in Regime}
        print(f"wrote {len(rows)} rows to {args.out}; " + ", ".join(f"{k}={v}" for k, v in counts.items()),
              file=stdout)
    else:
        stdout.write(text)
    return 0


# ----------------------------------------------------------------------------
# verify-tree


def cmd_verify_tree(args, stdout) -> int:
    params = _params(args)
    if args.pattern is None:
        raise DomainError("--pattern is required")
    pattern = args.pattern
    pattern.check(params)
    tree = build_tree(params.k, args.n)
    sols = solve_reduced_system(pattern, params, _cfg(args))
    split = tuple(int(s) for s in args.root_split.split(",")) if args.root_split else None
    label = Label.parse(args.root_label)
    rng = np.random.default_rng(args.seed)
    marginals, rows = [], []
    print(f"pattern {pattern.as_tuple()}, theta = {fmt_human(params.theta)}, k = {params.k}, n = {args.n}, "
          f"{len(sols)} solution(s)", file=stdout)
    for i, r in enumerate(sols.roots):
        fields = assign_fields(tree, pattern, r.h2, r.l2, label, split)
        if args.perturb:
            u = rng.normal(size=6)
            u *= args.perturb / np.linalg.norm(u)
            fields = fields.perturbed(u[:3], u[3:])
        dev = check_compatibility(tree, fields, params.theta)
        marg = root_marginal(exact_mu_n(tree, fields, params.theta))
        marginals.append(marg)
        print(f"  solution {i}: h2 = {fmt_human(r.h2)}, l2 = {fmt_human(r.l2)}  deviation = {dev:.3g}  "
              f"root marginal = ({', '.join(fmt_human(float(x)) for x in marg)})", file=stdout)
        rows.append({"h2": r.h2, "l2": r.l2, "deviation": dev, "root_marginal": [float(x) for x in marg]})
    dists = []
    for (i, a), (j, b) in combinations(enumerate(marginals), 2):
        dist = float(np.max(np.abs(a - b)))
        dists.append({"i": i, "j": j, "sup_distance": dist})
        print(f"  |marginal {i} - marginal {j}|_inf = {dist:.3g}", file=stdout)
    _emit(args, {"solutions": rows, "pairwise": dists, "perturb": args.perturb}, stdout)
    return 0


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sostree", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("criticals", help="critical values theta_c, zeta, D, x_i, eta_i, c*_i")
    p.add_argument("--d", type=int)
    _add_model(p, pattern=False)
    _add_numerics(p)
    _add_output(p)
    p.set_defaults(func=cmd_criticals)

    p = sub.add_parser("solve", help="solve one fixed-point system")
    p.add_argument("--mode", choices=MODES, default="system")
    _add_model(p)
    _add_numerics(p)
    _add_output(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", help="predicted vs found solution counts")
    _add_model(p)
    _add_numerics(p)
    _add_output(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="b = 0 phase diagram over (theta, c)")
    p.add_argument("--k", type=int)
    p.add_argument("--theta-range", help="lo:hi:steps")
    p.add_argument("--c-values", help="'lo:hi' inclusive or comma list")
    p.add_argument("--workers", type=int, default=1)
    _add_numerics(p)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-tree", help="exact finite-tree compatibility check")
    _add_model(p)
    p.add_argument("--n", type=int, default=2, help="ball radius")
    p.add_argument("--root-split", help="#H,#L among the root's k+1 children")
    p.add_argument("--root-label", default="H", help="label of the root, H or L")
    p.add_argument("--perturb", type=float, default=0.0, help="size of a random field perturbation")
    p.add_argument("--seed", type=int, default=0)
    _add_numerics(p)
    _add_output(p)
    p.set_defaults(func=cmd_verify_tree)
    return parser


# flags whose values routinely start with "-" (argparse would read them as options)
_RANGE_FLAGS = ("--scan", "--theta-range")


def _glue_negative_values(argv: list[str]) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in _RANGE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            values = read_config(known.config)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        except SOSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return exc.exit_code
        for action in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
            action.set_defaults(**{k: v for k, v in values.items()})
        argv = [a for i, a in enumerate(argv) if a != "--config" and (i == 0 or argv[i - 1] != "--config")
                and not a.startswith("--config=")]
    args = parser.parse_args(argv)
    try:
        return args.func(args, stdout)
    except RegimeError as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SOSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
