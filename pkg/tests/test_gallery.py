import glob
import os
import subprocess
import sys

import pytest

GALLERY = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "gallery")
SCRIPTS = sorted(glob.glob(os.path.join(GALLERY, "[0-9]*.py")))


def test_one_script_per_capability():
    assert len(SCRIPTS) >= 9


@pytest.mark.parametrize("script", SCRIPTS, ids=os.path.basename)
def test_gallery_script_runs(script):
    r = subprocess.run([sys.executable, script], capture_output=True, text=True, timeout=300)
    assert r.returncode == 0, r.stderr[-2000:]
    assert r.stdout.strip()
