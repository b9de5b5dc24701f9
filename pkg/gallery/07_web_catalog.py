"""
The catalog of orthogonal webs in two dimensions
================================================

Lists the charts for E2, E2_1 and dS2, checks a few of them and draws the
coordinate curves of one Minkowski web to gallery/out/.
"""
import os

from sepvar import web_catalog as wc

for sp in (wc.E2, wc.E2_1, wc.DS2):
    cases = wc.catalog_list(sp)
    print(sp, len(cases), "cases:", ", ".join(c["name"] for c in cases))

for cid in ("E2.case3", "E21.case4", "DS2.case7"):
    for chart in wc.get_case(cid):
        r = wc.verify_chart(chart, n=50, seed=0)
        print(f"{cid:10s} region {r['region']}: pullback {r['pullback']:.1e} offdiag {r['offdiag']:.1e} ok={r['ok']}")

# region labels at one point of the Minkowski plane
print(wc.web_region(wc.E2_1, [0.3, 1.2]))

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
os.makedirs(out, exist_ok=True)
with open(os.path.join(out, "real_elliptic_II.svg"), "w") as fh:
    fh.write(wc.emit_web_svg(wc.get_case("E21.case4"), grid_density=8))
print("wrote", os.path.join(out, "real_elliptic_II.svg"))
