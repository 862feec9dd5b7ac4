"""Smoke test for the pyportgnn extension module.

Builds the extension with cargo (release), loads it from a scratch
directory, and exercises each exposed operation once.

    python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "portgnn-python"],
        cwd=ROOT,
        check=True,
    )
    target = ROOT / "target" / "release"
    built = next(
        p for name in ("libpyportgnn.so", "libpyportgnn.dylib", "pyportgnn.dll")
        if (p := target / name).exists()
    )
    scratch = Path(tempfile.mkdtemp(prefix="pyportgnn-"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy(built, scratch / f"pyportgnn{suffix}")
    sys.path.insert(0, str(scratch))
    import pyportgnn

    return pyportgnn


def main():
    pg = load_module()

    star = pg.generate("star", 3)
    assert (star.n, star.m) == (4, 3), star
    assert star.neighbors(1) == [2, 3, 4]
    assert pg.Graph.from_json(star.to_json()).edges() == star.edges()

    ports = pg.port_numbering(star)
    for (v, i), (u, j) in ports.assignments():
        assert ports.lookup(u, j) == (v, i)
    assert ports.lookup(2, 2) is None

    c6 = pg.generate("cycle", 6)
    colors = pg.weak_two_coloring(c6)
    assert pg.is_weak_two_coloring(c6, colors)

    for seed in range(10):
        labels = pg.simulate(star, "single_leaf", pg.port_numbering(star, seed))
        assert pg.verify_single_leaf(star, labels), labels
    assert pg.simulate(c6, "identity") == [2] * 6

    for kind in ("mb", "sb"):
        out = pg.Model.random(kind, 3, width=5, seed=1, scale=1.0).forward(star)
        assert out[1] == out[2] == out[3], kind
    vvc = pg.Model.random("vvc", 3, width=8, seed=2, scale=1.0)
    assert len(vvc.forward(star, ports)) == 4
    assert pg.Model.from_json(vvc.to_json()).to_json() == vvc.to_json()

    assert pg.min_dominating_set(c6) == [1, 4]
    assert len(pg.min_vertex_cover(c6)) == 3
    assert len(pg.max_matching(c6)) == 3
    assert pg.approx_ratio(4, 1, "mds") == "4"
    assert pg.approx_ratio(2, 3, "matching") == "3/2"

    successes, report = pg.train("vvc", iterations=50, trials=2, seed=0)
    parsed = json.loads(report)
    assert len(parsed["trials"]) == 2 and 0 <= successes <= 2

    try:
        pg.generate("star", 0)
    except ValueError:
        pass
    else:
        raise AssertionError("star 0 must be rejected")

    print("pyportgnn smoke test passed")


if __name__ == "__main__":
    main()
