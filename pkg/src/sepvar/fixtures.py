"""Golden fixtures for the two worked systems and the web catalog.

    python -m sepvar.fixtures [all|calogero|morosi|web] [--check]

Measured residuals are stored next to their gate as {"value", "limit", "pass"}
with the value rounded to 3 significant digits, so small numeric noise does not
churn the files.  Regeneration runs twice and refuses to write if the two runs
differ.
"""

import argparse
import difflib
import json
import os
import sys

import numpy as np

FIXTURE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
                           "fixtures")
NAMES = ("calogero", "morosi", "web")
SEED = 0
CM_BOX = ((0.0, 2.0, 4.0), 0.5)


class NondeterminismError(RuntimeError):
    pass


def _r3(x):
    return float(f"{float(x):.3g}")


def _gated(value, limit, below=True):
    ok = value < limit if below else value > limit
    return {"value": _r3(value), "limit": limit, "pass": bool(ok)}


# -- reference Morosi-Tondo Killing tensors, Cartesian (t, x, y) components ----

def mt_reference_K1(q):
    t, x, y = q
    s = np.sqrt(2.0)
    return np.array([[2 * s * x - 1, s * (t - x) + 1, s * y],
                     [s * (t - x) + 1, -2 * s * t - 1, -s * y],
                     [s * y, -s * y, -2 * s * (t + x)]])


def mt_reference_K2(q):
    t, x, y = q
    return np.array([[y * y, -y * y, -2 * (t + x) * y],
                     [-y * y, y * y, 2 * (t + x) * y],
                     [-2 * (t + x) * y, 2 * (t + x) * y, (t + x) ** 2]])


def span_residual(ks, Kfun, points):
    """Relative least-squares residual of Kfun against span(ks), stacked over points."""
    cols = np.stack([np.concatenate([K(x).ravel() for x in points]) for K in ks], axis=1)
    target = np.concatenate([Kfun(x).ravel() for x in points])
    coef, *_ = np.linalg.lstsq(cols, target, rcond=None)
    return float(np.linalg.norm(cols @ coef - target) / np.linalg.norm(target))


# -- fixture builders ---------------------------------------------------------

def _brackets(Fs, space, box, rng, n=20):
    from . import hamiltonian_lab as hl
    c, hw = box
    worst = 0.0
    for _ in range(n):
        z = hl.PhasePoint(c + rng.uniform(-hw, hw, space.dim), rng.normal(size=space.dim))
        for i in range(len(Fs)):
            for j in range(i + 1, len(Fs)):
                worst = max(worst, abs(hl.poisson_bracket(Fs[i], Fs[j], z)))
    return worst


def build_calogero():
    from . import bekm, hamiltonian_lab as hl
    from .kbd_solver import kbd_solve
    from .potential_dsl import parse_potential
    V = parse_potential("calogero-moser", None)
    box = (np.array(CM_BOX[0]), CM_BOX[1])
    sol = kbd_solve(V, V.space, box=box, seed=SEED)
    trees = bekm.bekm_separate(V, V.space, box=box, exhaustive=True, seed=SEED)
    charts = []
    for t in sorted(trees, key=lambda t: t.name):
        w = hl.separation_witness(t, V, seed=SEED)
        charts.append({"name": t.name, "key": repr(t.key), "ks_dim": len(bekm.ks_space(t)),
                       "chkt_offdiag": _gated(w["chkt_offdiag"], 1e-6),
                       "dkdv": _gated(w["dkdv"], 1e-6)})
    return {"name": "calogero",
            "config": {"command": "separate", "potential": "calogero-moser", "space": "E3",
                       "center": list(CM_BOX[0]), "half_width": CM_BOX[1], "seed": SEED,
                       "exhaustive": True},
            "expected": {"nullspace_dim": sol.dim, "branches": len(charts), "charts": charts}}


def build_morosi():
    from . import bekm, hamiltonian_lab as hl
    from .canonical_forms import classify_ct
    from .kbd_solver import kbd_solve
    from .potential_dsl import parse_potential
    V = parse_potential("morosi-tondo", None)
    sp = V.space
    box = (np.zeros(3), 1.0)
    sol = kbd_solve(V, sp, box=box, seed=SEED)
    tree = bekm.bekm_separate(V, sp, box=box, seed=SEED)
    cls = classify_ct(tree.ct)
    ks = bekm.ks_space(tree)
    rng = np.random.default_rng([SEED, 31])
    pts = rng.uniform(-1, 1, size=(20, 3))
    Fs = hl.first_integrals(ks, V)
    return {"name": "morosi",
            "config": {"command": "separate", "potential": "morosi-tondo", "space": "E3_1",
                       "center": [0.0, 0.0, 0.0], "half_width": 1.0, "seed": SEED},
            "expected": {"nullspace_dim": sol.dim, "branches": 1 if tree.resolved else 0,
                         "class": {"tag": cls.tag, "index": cls.index, "sign": cls.sign,
                                   "blocks": _clean_blocks(cls.blocks.to_json())},
                         "reference_K1_span": _gated(span_residual(ks, mt_reference_K1, pts), 1e-8),
                         "reference_K2_span": _gated(span_residual(ks, mt_reference_K2, pts), 1e-8),
                         "brackets_max": _gated(_brackets(Fs, sp, box, rng), 1e-6)}}


def build_web():
    from . import web_catalog as wc
    records = []
    for sp in (wc.E2, wc.E2_1, wc.DS2):
        for case in wc.catalog_list(sp):
            recs = [wc.verify_chart(c, n=100, seed=SEED) for c in wc.get_case(case["case"])]
            records.append({"case": case["case"], "name": case["name"],
                            "regions": [r["region"] for r in recs],
                            "pullback": _gated(max(r["pullback"] for r in recs), 1e-6),
                            "offdiag": _gated(max(r["offdiag"] for r in recs), 1e-8),
                            "ok": all(r["ok"] for r in recs)})
    return {"name": "web", "config": {"command": "web verify", "n": 100, "seed": SEED},
            "expected": {"count": len(records), "records": records}}


BUILDERS = {"calogero": build_calogero, "morosi": build_morosi, "web": build_web}


def _clean_blocks(blocks):
    return [dict(b, re=round(b["re"], 9) + 0.0, im=round(b["im"], 9) + 0.0) for b in blocks]


def dumps(obj):
    return json.dumps(obj, indent=1) + "\n"


def render(name):
    a, b = dumps(BUILDERS[name]()), dumps(BUILDERS[name]())
    if a != b:
        raise NondeterminismError(f"fixture '{name}' differs between two runs")
    return a


def path(name):
    return os.path.join(FIXTURE_DIR, f"{name}.json")


def regenerate_fixtures(which="all", check=False, out=sys.stdout):
    """Rewrite (or with check=True only compare) fixtures; returns the names that changed."""
    names = NAMES if which == "all" else (which,)
    changed = []
    for name in names:
        if name not in BUILDERS:
            raise ValueError(f"unknown fixture '{name}'")
        new = render(name)
        old = open(path(name), encoding="utf-8").read() if os.path.exists(path(name)) else ""
        if new != old:
            changed.append(name)
            out.writelines(difflib.unified_diff(old.splitlines(True), new.splitlines(True),
                                                f"{name}.json (old)", f"{name}.json (new)"))
            if not check:
                os.makedirs(FIXTURE_DIR, exist_ok=True)
                with open(path(name), "w", encoding="utf-8") as fh:
                    fh.write(new)
    return changed


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m sepvar.fixtures")
    ap.add_argument("which", nargs="?", default="all", choices=("all",) + NAMES)
    ap.add_argument("--check", action="store_true", help="only report differences")
    args = ap.parse_args(argv)
    changed = regenerate_fixtures(args.which, args.check)
    print(f"{len(changed)} fixture(s) {'differ' if args.check else 'rewritten'}: {', '.join(changed) or '-'}",
          file=sys.stderr)
    return 1 if args.check and changed else 0


if __name__ == "__main__":
    sys.exit(main())
