import json

import pytest

from sepvar import fixtures


@pytest.mark.parametrize("name", ["calogero", "morosi"])
def test_fixture_is_current(name):
    with open(fixtures.path(name), encoding="utf-8") as fh:
        assert fh.read() == fixtures.render(name)


def test_web_fixture_counts():
    with open(fixtures.path("web"), encoding="utf-8") as fh:
        data = json.load(fh)["expected"]
    assert data["count"] == 23
    cases = [r["case"] for r in data["records"]]
    assert sum(c.startswith("E2.") for c in cases) == 4
    assert sum(c.startswith("E21.") for c in cases) == 10
    assert sum(c.startswith("DS2.") for c in cases) == 9
    assert all(r["ok"] and r["pullback"]["pass"] and r["offdiag"]["pass"] for r in data["records"])


def test_golden_contents():
    with open(fixtures.path("calogero"), encoding="utf-8") as fh:
        cm = json.load(fh)["expected"]
    assert cm["nullspace_dim"] == 4 and cm["branches"] == 5
    with open(fixtures.path("morosi"), encoding="utf-8") as fh:
        mt = json.load(fh)["expected"]
    assert mt["nullspace_dim"] == 2 and mt["branches"] == 1 and mt["class"]["tag"] == "NullAxial"


def test_check_mode_reports_no_change(tmp_path, monkeypatch):
    monkeypatch.setattr(fixtures, "FIXTURE_DIR", str(tmp_path))
    assert fixtures.regenerate_fixtures("morosi", out=open(tmp_path / "log", "w")) == ["morosi"]
    assert fixtures.regenerate_fixtures("morosi", check=True, out=open(tmp_path / "log", "w")) == []
