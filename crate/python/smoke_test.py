"""Smoke test for the `hellinger` extension module.

Build the module first:

    cargo build --release -p hellinger-discord-py --features extension-module

The script imports an installed `hellinger` if there is one, otherwise it
loads target/release/libhellinger.so from this repository.
"""

import importlib
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        return importlib.import_module("hellinger")
    except ImportError:
        pass
    built = ROOT / "target" / "release" / "libhellinger.so"
    if not built.exists():
        sys.exit(f"extension not found; build it first ({built} missing)")
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(built, tmp / "hellinger.so")
    sys.path.insert(0, str(tmp))
    return importlib.import_module("hellinger")


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    h = load()
    s = 1 / math.sqrt(2)

    bell = h.State.pure([0, s, s, 0], [2, 2])
    report = h.discord(bell)
    close(report.value, 1 - s, 1e-9)
    assert report.method == "pure-bipartite"
    doc = json.loads(report.to_json())
    assert set(doc) >= {"value", "method", "basis", "probabilities", "diagnostics"}

    close(h.dh_werner_2qubit(0.5), 0.0489434837, 1e-9)
    close(h.discord(method="werner", r=0.5).value, h.dh_werner_2qubit(0.5), 1e-15)
    close(h.dh_bell_diagonal([1, 0, 0, 0]), 1 - s, 1e-12)
    close(h.dh_isotropic_mlevel(3, 1.0), 1 - 1 / math.sqrt(3), 1e-12)

    w3 = [0] * 8
    for i in (1, 2, 4):
        w3[i] = 1 / math.sqrt(3)
    w = h.State.pure(w3, [2, 2, 2])
    close(h.dh_symmetric(w), 1 - 1 / math.sqrt(3), 1e-5)
    close(h.dh_optimize(w), 1 - 1 / math.sqrt(3), 1e-5)

    state = h.State.from_json(bell.to_json())
    close(h.dh_pure_bipartite(state), 1 - s, 1e-12)
    try:
        h.State.from_json('{"dims":[2],"amplitudes":[[1,0],[1,0]]}')
    except ValueError:
        pass
    else:
        raise AssertionError("non-normalized state accepted")

    rows = h.scan("lmg-iso", start=0.5, stop=1.5, points=3, n=10)
    assert len(rows) == 3 and rows[0][1] > 1e-3 and rows[2][1] < 1e-8

    passed, deviation, summary = h.verify("multilevel")
    assert passed and deviation < 1e-10, summary

    print("python smoke test passed")


if __name__ == "__main__":
    main()
