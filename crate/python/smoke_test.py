"""Smoke test for the symdae Python module.

Build first with `cargo build -p symdae-py --release` (or without --release),
then run `python3 python/smoke_test.py`. Set SYMDAE_LIB to point at a
specific shared library.
"""

import importlib.util
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CASE = os.path.join(ROOT, "crates", "core", "cases", "kundur.json")


def find_library():
    if os.environ.get("SYMDAE_LIB"):
        return os.environ["SYMDAE_LIB"]
    for profile in ("release", "debug"):
        path = os.path.join(ROOT, "target", profile, "libsymdae_py.so")
        if os.path.exists(path):
            return path
    sys.exit("libsymdae_py.so not found; run `cargo build -p symdae-py` first")


def import_symdae():
    # the extension must be named after its module to be importable
    tmp = tempfile.mkdtemp()
    target = os.path.join(tmp, "symdae.so")
    shutil.copy(find_library(), target)
    spec = importlib.util.spec_from_file_location("symdae", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    symdae = import_symdae()

    assert symdae.diff("x**2 * sin(y)", "x") == symdae.simplify("2*x*sin(y)")

    case = symdae.load_case(CASE)
    counts = dict(case.counts())
    assert counts["Bus"] == 10 and counts["GENROU"] == 4, counts

    system = symdae.System(case)
    converged, iterations, mismatch = system.power_flow()
    assert converged and iterations <= 10 and mismatch < 1e-8
    assert abs(system.get("Bus", "v")[0] - 1.0) < 1e-10

    system.initialize()
    modes = system.eig()
    oscillatory = [m for m in modes if m[1] > 0]
    assert all(-1.0 <= m[2] <= 1.0 for m in modes)
    # modes come sorted by damping ratio
    weakest = oscillatory[0]
    print("least damped mode %.4f Hz, zeta %.4f" % (weakest[1] / (2 * math.pi), weakest[2]))

    out = system.tds(tmax=1.0, events=["toggle:Line:Line_7:0.5"])
    assert len(out["t"]) == 31 and len(out["x"][0]) == len(out["x_names"])

    try:
        symdae.parse_case('{"Bogus": []}')
    except ValueError as e:
        print("rejected bad case:", e)
    else:
        raise AssertionError("bad case accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
