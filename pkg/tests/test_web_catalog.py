import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from sepvar import web_catalog as wc


def test_catalog_sizes():
    assert [c["name"] for c in wc.catalog_list(wc.E2)] == ["cartesian", "polar", "elliptic", "parabolic"]
    assert len(wc.catalog_list(wc.E2_1)) == 10
    assert len(wc.catalog_list(wc.DS2)) == 9
    assert len(wc.catalog_list(wc.ADS2)) == 9


def test_timelike_parabolic_transform():
    np.testing.assert_allclose(wc.web_transform(wc.get_chart("E21.case8"), 2.0, 1.0), [2.5, 2.0])


def test_ds2_spherical_base_point():
    np.testing.assert_allclose(wc.web_transform(wc.get_chart("DS2.case3"), 0.0, 0.0), [0.0, 1.0, 0.0], atol=1e-15)


def test_null_parabolic_metric_is_pullback():
    # sign as pulled back from the transform, see the convention notes
    np.testing.assert_allclose(wc.web_metric(wc.get_chart("E21.case10"), 2.0, 1.0), [0.25, -0.25])


def test_ds2_case8_metric():
    np.testing.assert_allclose(wc.web_metric(wc.get_chart("DS2.case8"), 0.5, 0.2), [-1.0, np.e])


def test_region_labels():
    assert wc.web_region(wc.E2_1, [3.0, 0.0], {"a": 1.0})["E21.case4"] == "N"
    assert wc.web_region(wc.E2_1, [1.0, 1.0])["E21.case2"] == "SingularSet"
    t, x = 0.1, 0.9
    p = [t, x, np.sqrt(1 + t * t - x * x)]
    assert wc.web_region(wc.DS2, p)["DS2.case4"] == "1"


def test_parameter_validation():
    with pytest.raises(wc.CatalogError):
        wc.get_case("DS2.case2", {"a": 0.6, "b": 0.6})


def test_range_violation():
    with pytest.raises(wc.ChartRangeError):
        wc.web_transform(wc.get_chart("E21.case4", "N", {"a": 1.0}), -1.0, 5.0)


@pytest.mark.parametrize("chart", wc.all_charts(), ids=lambda c: f"{c.case_id}/{c.region}")
def test_chart_quick_verification(chart):
    rec = wc.verify_chart(chart, n=15, seed=3)
    assert rec["ok"], rec


def test_elliptic_roundtrip_through_eigenfunctions():
    chart = wc.get_chart("E2.case3")
    rng = np.random.default_rng(5)
    u, v = wc.sample_interior(chart, rng, 100)
    assert wc.inverse_error(chart, u, v).max() < 1e-9


def test_fd_jacobian_pullback():
    chart = wc.get_chart("E21.case3")
    rng = np.random.default_rng(9)
    u, v = wc.sample_interior(chart, rng, 100)
    assert wc.pullback_error(chart, u, v).max() < 1e-6


def test_ads2_swap():
    ds = wc.get_chart("DS2.case3")
    ads = wc.ads2_swap(ds)
    u, v = 0.3, 0.2
    np.testing.assert_allclose(wc.web_metric(ads, u, v), [-np.cosh(v) ** 2, 1.0])
    X = wc.web_transform(ads, np.array([0.1, 0.5, -0.7]), np.array([0.2, -0.4, 0.9]))
    q = -X[:, 0] ** 2 - X[:, 1] ** 2 + X[:, 2] ** 2
    np.testing.assert_allclose(q, -1.0, atol=1e-12)
    back = wc._unswap(ads)
    np.testing.assert_allclose(wc.web_metric(back, u, v), wc.web_metric(ds, u, v))


@pytest.mark.parametrize("case", ["ADS2.case1", "ADS2.case3", "ADS2.case8"])
def test_ads2_charts_verify(case):
    for chart in wc.get_case(case):
        assert wc.verify_chart(chart, n=30, seed=1)["ok"]


def _svg(charts, grid=6):
    return ET.fromstring(wc.emit_web_svg(charts, grid))


def test_svg_groups_and_curve_counts():
    charts = wc.get_case("E21.case4", {"a": 1.0})
    root = _svg(charts)
    groups = [g for g in root.iter() if g.tag.endswith("g") and g.get("class") == "region"]
    assert len(groups) == 5
    for g in groups:
        curves = [p for p in g.iter() if p.tag.endswith("path") and p.get("class") in ("u-curve", "v-curve")]
        assert len(curves) == 2 * 6


@pytest.mark.parametrize("case", [c["case"] for sp in (wc.E2, wc.E2_1, wc.DS2) for c in wc.catalog_list(sp)])
def test_every_region_has_two_families_of_curves(case):
    root = _svg(wc.get_case(case), 3)
    for g in root.iter():
        if g.get("class") == "region":
            assert sum(1 for p in g.iter() if p.get("class") in ("u-curve", "v-curve")) == 6


def test_rindler_four_regions_and_cartesian_grid():
    root = _svg(wc.get_case("E21.case2"), 4)
    assert sum(1 for g in root.iter() if g.get("class") == "region") == 4
    text = wc.emit_web_svg(wc.get_case("E21.case1"), 4)
    assert len(re.findall(r'class="u-curve"', text)) == 4
    assert len(re.findall(r'class="v-curve"', text)) == 4


def test_curves_per_family_match_density():
    for chart in wc.get_case("E2.case2"):
        curves = wc.sample_curves(chart, grid_density=5)
        assert sum(f == "u" for f, _, _ in curves) == 5 and sum(f == "v" for f, _, _ in curves) == 5
