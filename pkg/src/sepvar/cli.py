"""sepvar command line: classify | solve-kbd | separate | web {list,verify,plot} | verify-integrals.

Exit codes: 0 ok, 1 bad input, 2 classification ambiguity, 3 failed gate or Fail tree.
Reports are JSON with "schema": 1 and floats written with 17 significant digits.
"""

import argparse
import math
import os
import sys

import numpy as np

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_AMBIGUOUS, EXIT_GATE = 0, 1, 2, 3

# sane ranges for tolerance overrides
_RANGES = {"svd_tol": (1e-14, 1e-3), "h": (1e-8, 1e-1)}

# boxes away from the singular sets of the built-in systems
DEFAULT_BOXES = {"calogero-moser": ((0.0, 2.0, 4.0), 0.5)}


class InputError(ValueError):
    pass


# -- deterministic JSON -----------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)) or x is None:
        return "null" if x is None else "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        if "e" not in s and "." not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(x, str):
        import json
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, np.ndarray):
        return _fmt(x.tolist())
    if isinstance(x, dict):
        return "{" + ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj):
    return _fmt(obj) + "\n"


def _emit(report, args):
    text = dumps(report)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _gate(name, value, limit, below=True):
    ok = bool(value < limit) if below else bool(value > limit)
    return {"name": name, "value": value, "limit": limit, "pass": ok}


# -- parsing helpers ----------------------------------------------------------

def _floats(s, what):
    try:
        return [float(t) for t in s.replace(" ", "").split(",") if t != ""]
    except ValueError as exc:
        raise InputError(f"cannot parse {what} '{s}': {exc}") from exc


def parse_matrix(s, d):
    """'0' / scalar -> c*I, 'a,b,...' (d entries) -> diag, 'r1;r2;...' rows -> full matrix."""
    if s is None:
        return np.zeros((d, d))
    if ";" in s:
        rows = [_floats(r, "A row") for r in s.split(";")]
        M = np.array(rows)
        if M.shape != (d, d):
            raise InputError(f"A must be {d}x{d}, got {M.shape}")
        if np.abs(M - M.T).max() > 1e-12:
            raise InputError("A must be symmetric")
        return M
    v = _floats(s, "A")
    if len(v) == 1:
        return v[0] * np.eye(d)
    if len(v) == d:
        return np.diag(v)
    raise InputError(f"A needs 1, {d} or {d}x{d} entries")


def parse_params(items):
    out = {}
    for it in items or []:
        for part in it.split(","):
            if not part:
                continue
            if "=" not in part:
                raise InputError(f"parameter '{part}' must look like name=value")
            k, v = part.split("=", 1)
            try:
                out[k.strip()] = float(v)
            except ValueError as exc:
                raise InputError(f"parameter {k}: {exc}") from exc
    return out


def _space(spec):
    from .pseudo_space import SpaceError, parse_space
    try:
        return parse_space(spec)
    except SpaceError as exc:
        raise InputError(str(exc)) from exc


def _potential(spec, space):
    from .potential_dsl import BUILTINS, DSLError, parse_potential
    from .pseudo_space import parse_space
    if spec in BUILTINS and space is None:
        space = parse_space(BUILTINS[spec][1])
    if space is None:
        raise InputError("--space is required for expression potentials")
    try:
        return parse_potential(spec, space), space
    except DSLError as exc:
        raise InputError(str(exc)) from exc


def _box(args, space):
    if args.center is not None:
        c = np.array(_floats(args.center, "center"))
        if len(c) != space.dim:
            raise InputError(f"center needs {space.dim} components")
        return c, float(args.half_width)
    if args.potential in DEFAULT_BOXES:
        c, hw = DEFAULT_BOXES[args.potential]
        return np.array(c), hw
    return np.zeros(space.dim), float(args.half_width)


def _check_range(name, value):
    lo, hi = _RANGES[name]
    if not lo <= value <= hi:
        raise InputError(f"--{name.replace('_', '-')} {value:g} outside [{lo:g}, {hi:g}]")
    return value


def _seed(args):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get("SEPVAR_SEED")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"SEPVAR_SEED must be an integer, got '{env}'") from exc
    return 0


# -- commands -------------------------------------------------------------------

def cmd_classify(args):
    from .canonical_forms import AmbiguityError, DegenerateNullAxialError, classify_ct
    from .concircular import ConcircularTensor
    sp = _space(args.space)
    d = sp.dim
    A = parse_matrix(args.A, d)
    if sp.is_sphere:
        L = ConcircularTensor(sp, A)
    else:
        w = np.zeros(d) if args.w is None else np.array(_floats(args.w, "w"))
        if len(w) != d:
            raise InputError(f"w needs {d} components")
        L = ConcircularTensor(sp, A, w, float(args.m))
    report = {"schema": SCHEMA, "command": "classify", "space": sp.name, "ct": L.to_json()}
    if sp.is_sphere:
        from .bekm import class_key
        report["class"] = {"tag": "Sphere", "key": repr(class_key(L))}
        _emit(report, args)
        return EXIT_OK
    try:
        cls = classify_ct(L)
    except DegenerateNullAxialError as exc:
        report["class"] = {"tag": "DegenerateNullAxial", "detail": str(exc)}
        _emit(report, args)
        return EXIT_OK
    except AmbiguityError as exc:
        report["error"] = str(exc)
        _emit(report, args)
        return EXIT_AMBIGUOUS
    report["class"] = cls.to_json()
    _emit(report, args)
    return EXIT_OK


def cmd_solve_kbd(args):
    from .kbd_solver import KbdError, kbd_solve
    sp = _space(args.space) if args.space else None
    V, sp = _potential(args.potential, sp)
    box = _box(args, sp)
    tol = _check_range("svd_tol", args.svd_tol)
    seed = _seed(args)
    try:
        sol = kbd_solve(V, sp, box=box, seed=seed, svd_tol=tol)
    except KbdError as exc:
        _emit({"schema": SCHEMA, "command": "solve-kbd", "error": str(exc)}, args)
        return EXIT_GATE
    report = {"schema": SCHEMA, "command": "solve-kbd", "space": sp.name, "potential": args.potential,
              "seed": seed, "box": {"center": box[0], "half_width": box[1]}, "svd_tol": tol}
    report.update(sol.to_json())
    _emit(report, args)
    return EXIT_OK


def cmd_separate(args):
    from . import bekm, hamiltonian_lab as hl
    sp = _space(args.space) if args.space else None
    V, sp = _potential(args.potential, sp)
    box = None if sp.is_sphere else _box(args, sp)
    seed = _seed(args)
    res = bekm.bekm_separate(V, sp, box=box, exhaustive=args.exhaustive, seed=seed)
    trees = res if isinstance(res, list) else [res]
    good = [t for t in trees if t.resolved]
    gates = []
    for i, t in enumerate(good):
        w = hl.separation_witness(t, V, seed=seed)
        gates.append(_gate(f"witness[{i}].chkt_offdiag", w["chkt_offdiag"], 1e-6))
        gates.append(_gate(f"witness[{i}].dkdv", w["dkdv"], 1e-6))
    report = {"schema": SCHEMA, "command": "separate", "space": sp.name, "potential": args.potential,
              "seed": seed, "exhaustive": bool(args.exhaustive),
              "charts": [t.name for t in good], "trees": [t.to_json() for t in trees], "gates": gates}
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write("".join(bekm.to_dot(t, f"tree{i}") for i, t in enumerate(trees)))
    _emit(report, args)
    if not good or not all(g["pass"] for g in gates):
        return EXIT_GATE
    if not args.quiet:
        for t in good:
            sys.stderr.write(f"{t.name}\n")
    return EXIT_OK


def _web_space(spec):
    from . import web_catalog as wc
    sp = _space(spec)
    if sp not in (wc.E2, wc.E2_1, wc.DS2, wc.ADS2):
        raise InputError("the web catalog covers E2, E2_1, dS2 and AdS2")
    return sp


def _case_id(sp, case):
    prefix = {"E2": "E2", "E2_1": "E21", "dS2": "DS2", "AdS2": "ADS2"}[sp.name]
    c = str(case)
    return f"{prefix}.case{c}" if c.isdigit() else c


def cmd_web(args):
    from . import web_catalog as wc
    sp = _web_space(args.space)
    if args.action == "list":
        _emit({"schema": SCHEMA, "command": "web list", "space": sp.name, "cases": wc.catalog_list(sp)}, args)
        return EXIT_OK
    if args.case is None:
        raise InputError("--case is required")
    params = parse_params(args.params)
    try:
        charts = wc.get_case(_case_id(sp, args.case), params or None)
    except wc.CatalogError as exc:
        raise InputError(str(exc)) from exc
    if args.region:
        charts = [c for c in charts if c.region == args.region]
        if not charts:
            raise InputError(f"no region '{args.region}'")
    if args.action == "verify":
        seed = _seed(args)
        recs = [wc.verify_chart(c, n=args.n, seed=seed, h=args.h) for c in charts]
        gates = []
        for r in recs:
            gates.append(_gate(f"{r['case']}/{r['region']}.pullback", r["pullback"], 1e-6))
            gates.append(_gate(f"{r['case']}/{r['region']}.offdiag", r["offdiag"], 1e-8))
        _emit({"schema": SCHEMA, "command": "web verify", "space": sp.name, "seed": seed,
               "records": recs, "gates": gates}, args)
        return EXIT_OK if all(g["pass"] for g in gates) and all(r["ok"] for r in recs) else EXIT_GATE
    # plot
    if args.format == "csv":
        text = wc.curves_csv(charts, args.grid)
    else:
        text = wc.emit_web_svg(charts, args.grid)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify_integrals(args):
    from . import bekm, hamiltonian_lab as hl
    sp = _space(args.space) if args.space else None
    args.potential = args.system
    V, sp = _potential(args.system, sp)
    box = None if sp.is_sphere else _box(args, sp)
    seed = _seed(args)
    tree = bekm.bekm_separate(V, sp, box=box, seed=seed)
    if not tree.resolved:
        _emit({"schema": SCHEMA, "command": "verify-integrals", "error": tree.reason}, args)
        return EXIT_GATE
    Fs = hl.first_integrals(bekm.ks_space(tree), V)
    rep = integrals_report(Fs, box, sp, seed, args.trajectories, args.T, args.dt, args.csv)
    rep.update({"schema": SCHEMA, "command": "verify-integrals", "system": args.system,
                "space": sp.name, "seed": seed, "chart": tree.name})
    _emit(rep, args)
    return EXIT_OK if all(g["pass"] for g in rep["gates"]) else EXIT_GATE


def integrals_report(Fs, box, sp, seed, n_traj=5, T=5.0, dt=1e-3, csv_path=None, n_brackets=20,
                     bound=50.0):
    from . import hamiltonian_lab as hl
    rng = np.random.default_rng([seed, 21])
    c, hw = box if box is not None else (np.zeros(sp.dim), 1.0)
    br, sig = 0.0, np.inf
    V = Fs[0].V
    k = 0
    while k < n_brackets:
        q = c + rng.uniform(-hw, hw, sp.dim)
        with np.errstate(all="ignore"):
            if not np.isfinite(V.value(q)):
                continue
        z = hl.PhasePoint(q, rng.normal(size=sp.dim))
        for i in range(len(Fs)):
            for j in range(i + 1, len(Fs)):
                br = max(br, abs(hl.poisson_bracket(Fs[i], Fs[j], z)))
        sig = min(sig, hl.independence_sigma(Fs, z))
        k += 1
    drifts, rejected, trajs = [], 0, []
    # short, low-energy starts; a trajectory counts as nonsingular only if it
    # stays inside |q|,|p| <= bound for the whole run (decided before any drift)
    while len(drifts) < n_traj and rejected < 50:
        q = c + rng.uniform(-hw, hw, sp.dim) * 0.5
        z = hl.PhasePoint(q, 0.3 * rng.normal(size=sp.dim))
        tr = hl.integrate_trajectory(Fs[0], z, T, dt, escape=bound)
        if tr.truncated:
            rejected += 1
            continue
        drifts.append([hl.conservation_drift(F, tr) for F in Fs])
        trajs.append(tr)
    if csv_path and trajs:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(trajs[0].to_csv())
    dmax = max((max(d) for d in drifts), default=float("inf"))
    gates = [_gate("brackets_max", br, 1e-6), _gate("independence_sigma_min", sig, 1e-6, below=False),
             _gate("drift_max", dmax, 1e-6), _gate("trajectories", float(len(drifts)), n_traj - 0.5, below=False)]
    return {"brackets_max": br, "independence_sigma_min": sig, "drifts": drifts,
            "rejected_trajectories": rejected, "gates": gates}


# -- argument parser ------------------------------------------------------------

def _common(p):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $SEPVAR_SEED or 0)")
    p.add_argument("--threads", type=int, default=1, help="cap on worker threads")
    p.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")


def _box_args(p):
    p.add_argument("--center", default=None, help="sample box centre, comma separated")
    p.add_argument("--half-width", type=float, default=1.0)


def build_parser():
    ap = argparse.ArgumentParser(prog="sepvar", description="orthogonal separation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="canonical class of a concircular tensor")
    p.add_argument("--space", required=True)
    p.add_argument("--A", default=None)
    p.add_argument("--w", default=None)
    p.add_argument("--m", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("solve-kbd", help="KBD nullspace for a potential")
    p.add_argument("--potential", required=True)
    p.add_argument("--space", default=None)
    p.add_argument("--svd-tol", type=float, default=1e-9)
    _box_args(p)
    _common(p)
    p.set_defaults(func=cmd_solve_kbd)

    p = sub.add_parser("separate", help="recursive separation tree(s)")
    p.add_argument("--potential", required=True)
    p.add_argument("--space", default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--dot", default=None, help="also write the tree(s) as Graphviz DOT")
    p.add_argument("--quiet", action="store_true")
    _box_args(p)
    _common(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("web", help="catalog of separable webs")
    p.add_argument("action", choices=["list", "verify", "plot"])
    p.add_argument("--space", required=True)
    p.add_argument("--case", default=None)
    p.add_argument("--region", default=None)
    p.add_argument("--params", action="append", default=[], help="name=value[,name=value]")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--h", type=float, default=3e-4)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--format", choices=["svg", "csv"], default="svg")
    _common(p)
    p.set_defaults(func=cmd_web)

    p = sub.add_parser("verify-integrals", help="brackets, independence and conservation")
    p.add_argument("--system", required=True, help="built-in name or expression")
    p.add_argument("--space", default=None)
    p.add_argument("--trajectories", type=int, default=5)
    p.add_argument("--T", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--csv", default=None, help="dump the first trajectory as CSV")
    _box_args(p)
    _common(p)
    p.set_defaults(func=cmd_verify_integrals)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.threads < 1:
        sys.stderr.write("--threads must be >= 1\n")
        return EXIT_INPUT
    os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        if getattr(args, "h", None) is not None and args.command == "web":
            _check_range("h", args.h)
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
