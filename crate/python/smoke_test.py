"""Smoke test for the pyslicekit extension.

Build first with
    cargo build --release -p slicekit-py --features extension-module
then run `python3 python/smoke_test.py`. An installed `pyslicekit` is used
when present, otherwise the library is loaded from target/.
"""

import importlib.machinery
import importlib.util
import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import pyslicekit

        return pyslicekit
    except ImportError:
        pass
    names = ["libpyslicekit.so", "libpyslicekit.dylib", "pyslicekit.dll"]
    for profile in ["release", "debug"]:
        for name in names:
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("pyslicekit", str(path))
                spec = importlib.util.spec_from_file_location("pyslicekit", path, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("pyslicekit not found; build it with cargo first")


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    sk = load()

    square = sk.Body("V", [[1, 1], [1, -1]])
    assert square.dim == 2 and square.rep == "V"
    assert close(square.support([math.sqrt(0.5), math.sqrt(0.5)]), math.sqrt(2), 1e-12)
    assert close(sk.Body.cross_polytope(3).gauge([1.0, -2.0, 0.5]), 3.5, 1e-12)
    assert square.polar().polar() == square

    m = sk.john(square)
    assert all(close(m[i][j], float(i == j), 1e-6) for i in range(2) for j in range(2))
    m = sk.lowner(square)
    assert all(close(m[i][j], 0.5 * (i == j), 1e-6) for i in range(2) for j in range(2))

    ellipse = sk.Body("V", [[2 * math.cos(t), math.sin(t)] for t in
                            (math.pi * j / 512 for j in range(512))])
    p = sk.slice_map(ellipse)
    assert close(p[0][0], 2.0, 1e-3) and close(p[1][1], 1.0, 1e-3)

    disk = sk.Body.ball(2, 512)
    assert close(sk.hausdorff(square, disk), math.sqrt(2) - 1, 1e-5)
    assert close(sk.bm_distance(square, disk), math.sqrt(2), 1e-3)

    a = sk.random_corpus(42, 2, 1)[0]
    moved = a.act([[2.0, 0.3], [-0.4, 0.7]])
    assert sk.quotient_distance(a, moved) < 1e-4
    assert sk.Body.from_json(a.to_json()) == a

    assert sk.discontinuity_table(100)[99] == (100, 0.1)
    assert close(sk.demo_map("circle", 3.0, 4.0), 5.0, 1e-15)

    try:
        sk.Body("V", [[0, 0], [1, 0]])
    except ValueError:
        pass
    else:
        raise AssertionError("zero generator accepted")

    print("pyslicekit smoke test passed")


if __name__ == "__main__":
    main()
