"""Smoke test for the Python bindings.

Build the extension first:

    cargo build --release -p hjselect-py

then run `python3 python/smoke_test.py`. The script loads
target/release/libhjselect_py.so directly unless `hjselect_py` is already
importable (for example after `maturin develop`).
"""

import importlib.machinery
import importlib.util
import math
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        import hjselect_py

        return hjselect_py
    except ImportError:
        pass
    for name in ("libhjselect_py.so", "libhjselect_py.dylib", "hjselect_py.dll"):
        path = ROOT / "target" / "release" / name
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("hjselect_py", str(path))
            spec = importlib.util.spec_from_file_location("hjselect_py", path, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            sys.modules["hjselect_py"] = module
            return module
    sys.exit("hjselect_py not built; run `cargo build --release -p hjselect-py`")


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    return bool(cond)


def main():
    hj = load()
    ok = True

    h = hj.Flux.paper()
    ok &= check(h.value(0.5) == 0.125, "H(1/2) = 1/8")
    ok &= check(h.deriv(-1.5) == 2.25, "H'(-3/2) = 9/4")
    ok &= check(all(h.value(p) == h.value(-p) for p in (0.3, 0.9, 1.4)), "flux is even")
    ok &= check(hj.Flux.from_json(h.to_json()).value(1.1) == h.value(1.1), "flux JSON round trip")

    v0 = hj.Profile.counterexample()
    ok &= check(v0.value(-100.0) == -1.5, "profile left state")

    sol = hj.Counterexample(mode="paper", dt=1e-3, t_end=120.0)
    c = sol.constants()
    ok &= check(abs(c["t0"] - 4 / 11) < 1e-12, "t0 = 4/11")
    ok &= check(abs(c["L"] - 711 / 44) < 1e-6, "L = 711/44")
    ok &= check(len(sol.shocks()) >= 3, "shocks tracked")
    report = sol.entropy_report()
    witness = report["witness"]
    ok &= check(witness is not None and abs(witness["margin"] - 0.151) < 2e-3, "entropy witness margin")
    ok &= check(sol.rh_residual() < 1e-4, "Rankine-Hugoniot residual")

    g = sol.potential_grid(-12.0, 0.05, 400, 0.0, 1.0, 3)
    ok &= check(g.shape == (3, 401), "potential grid shape")
    r = sol.regularity(-12.0, 0.05, 400, 2.0, 1.0, 3)
    ok &= check(abs(r["lipschitz"] - 1.5) < 1e-6, "Lipschitz constant 3/2")

    q = hj.Flux.quadratic()
    ramp = hj.Profile([-1.0, 1.0], [-1.0, 1.0], -1.0, 1.0)
    grid, ledger = hj.godunov(q, ramp, -5.0, 5.0, 1.0, 400, 4)
    ok &= check(grid.shape[0] == 5 and ledger["relative_error"] < 1e-12, "Godunov mass balance")

    try:
        hj.Counterexample(mode="sideways")
        ok &= check(False, "bad mode raises")
    except ValueError:
        ok &= check(True, "bad mode raises ValueError")

    with tempfile.TemporaryDirectory() as tmp:
        code, path = hj.run("solve", str(Path(tmp) / "s"), {"t_max": 0.2, "cells": 200})
        ok &= check(code == 0 and (Path(path) / "grid.csv").exists(), "CLI solve through run()")

    ok &= check(math.isfinite(sol.eval(50.0, 3.0)), "pointwise evaluation")
    print("smoke test", "passed" if ok else "FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
