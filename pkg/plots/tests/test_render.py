import os
import subprocess
import sys

import numpy as np
import pytest

HERE = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RENDER = os.path.join(HERE, "render.py")
FX = os.path.join(HERE, "fixtures")


def run(args):
    return subprocess.run(
        [sys.executable, RENDER, *args], capture_output=True, text=True
    )


def test_pseudo_contour_renders(tmp_path):
    out = tmp_path / "contour.png"
    proc = run([
        "--kind", "pseudo-contour",
        "--in", os.path.join(FX, "grid_diag01.csv"),
        "--eps", "0.25,0.5",
        "--out", str(out),
    ])
    assert proc.returncode == 0, proc.stderr
    assert out.exists() and out.stat().st_size > 2000


def test_contour_has_two_disjoint_loops():
    # eps = 0.25 sublevel of min(|z|, |z-1|) splits into two components
    sys.path.insert(0, HERE)
    import render

    lines = render.render_pseudo_contour(
        [os.path.join(FX, "grid_diag01.csv")], [0.25], os.devnull + ".png"
        if os.name != "posix" else "/tmp/_loops.png",
    )
    segs = [s for level in lines.allsegs for s in level if len(s) > 3]
    assert len(segs) >= 2
    centers = [seg.mean(axis=0) for seg in segs]
    assert any(c[0] < 0.5 for c in centers)
    assert any(c[0] > 0.5 for c in centers)


def test_convergence_renders(tmp_path):
    out = tmp_path / "conv.png"
    proc = run([
        "--kind", "convergence",
        "--in",
        os.path.join(FX, "points_n20.csv"),
        os.path.join(FX, "points_n40.csv"),
        os.path.join(FX, "points_n80.csv"),
        "--labels", "20,40,80",
        "--out", str(out),
    ])
    assert proc.returncode == 0, proc.stderr
    assert out.exists() and out.stat().st_size > 2000


def test_discrete_overlay_renders(tmp_path):
    out = tmp_path / "overlay.png"
    proc = run([
        "--kind", "discrete-overlay",
        "--in",
        os.path.join(FX, "discrete_am.csv"),
        os.path.join(FX, "esscover_am.csv"),
        "--out", str(out),
    ])
    assert proc.returncode == 0, proc.stderr
    assert out.exists() and out.stat().st_size > 2000


def test_missing_csv_fails_cleanly(tmp_path):
    proc = run([
        "--kind", "pseudo-contour",
        "--in", str(tmp_path / "nope.csv"),
        "--eps", "0.5",
        "--out", str(tmp_path / "x.png"),
    ])
    assert proc.returncode != 0
    assert "cannot read" in proc.stderr


def test_garbled_csv_fails_cleanly(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,grid\n1,2,3\n")
    proc = run([
        "--kind", "pseudo-contour",
        "--in", str(bad),
        "--eps", "0.5",
        "--out", str(tmp_path / "x.png"),
    ])
    assert proc.returncode != 0
    assert "header" in proc.stderr


def test_deterministic_output(tmp_path):
    outs = []
    for name in ("a.png", "b.png"):
        out = tmp_path / name
        proc = run([
            "--kind", "discrete-overlay",
            "--in",
            os.path.join(FX, "discrete_am.csv"),
            os.path.join(FX, "esscover_am.csv"),
            "--out", str(out),
        ])
        assert proc.returncode == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
