"""Smoke test for the `bilevel` extension module.

Build first:
    cargo build -p bilevel-py --release --features extension-module
The script imports `bilevel` from sys.path, or falls back to
target/release/libbilevel.so (copied to a temp dir as bilevel.so).
"""

import importlib
import json
import math
import os
import shutil
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))


def load():
    try:
        return importlib.import_module("bilevel")
    except ImportError:
        pass
    lib = os.path.join(HERE, "..", "target", "release", "libbilevel.so")
    if not os.path.exists(lib):
        sys.exit("bilevel extension not found; build it with cargo first")
    tmp = tempfile.mkdtemp()
    shutil.copy(lib, os.path.join(tmp, "bilevel.so"))
    sys.path.insert(0, tmp)
    return importlib.import_module("bilevel")


def main():
    bl = load()

    # Quadratic weight with identical data: closed form, minimum at alpha = 0.
    g = bl.Grid.interval(0.0, math.pi, 128)
    u = bl.Signal(g, [math.sin(x) for x in g.nodes()])
    fam = bl.Family.weight_l2()
    norm = u.l2_norm_sq()
    for a in (0.1, 1.0, 10.0):
        got = bl.upper_value(fam, a, [u], [u])
        want = (a / (1 + a)) ** 2 * norm
        assert abs(got - want) < 1e-10, (a, got, want)
    rep = bl.learn(fam, [u], [u], "0.001:100:10:log", 0)
    assert rep["report"]["argmin"]["kind"] == "lower_edge"

    # The report validates against the published schema when jsonschema is available.
    try:
        import jsonschema

        jsonschema.validate(rep, json.loads(bl.REPORT_SCHEMA))
    except ImportError:
        pass

    # TV reconstruction and its certificate.
    ramp = bl.Signal(bl.Grid.interval(-1.0, 1.0, 256), [x for x in bl.Grid.interval(-1.0, 1.0, 256).nodes()])
    w, info = bl.solve(bl.Family.aubert_kornprobst(), "lower", ramp)
    assert max(abs(v) for v in w.values()) < 1e-6, info
    assert info["certificate_gap"] < 1e-8

    # Spectral window of the two-mode pair.
    clean, noisy = bl.two_mode_example(32, 10)
    lo, hi = bl.mu_window([clean], [noisy], 10)
    assert abs(hi - math.log(200) / (100 * math.log(2))) < 1e-6
    assert abs(lo - 0.0236) < 5e-4
    s_hat, _, boundary = bl.learn_s([clean], [noisy], 0.05, 10)
    assert 0 < s_hat < 1 and not boundary

    # Lipschitz constants of the sawtooth pair.
    c, n = bl.builtin_dataset("example-4.2b")
    assert abs(n.lipschitz_constant() - 29.7) < 1e-9
    d = bl.Signal(n.grid, [2 * a - b for a, b in zip(n.values(), c.values())])
    assert abs(d.lipschitz_constant() - 29.4) < 1e-9

    # Signal files round-trip.
    with tempfile.TemporaryDirectory() as tmp:
        p = os.path.join(tmp, "u.csv")
        u.write(p)
        back = bl.Signal.read(p)
        assert max(abs(a - b) for a, b in zip(u.values(), back.values())) <= 1e-6

    demo = bl.run_demo("remark-7.4")
    assert demo["pass"], demo

    try:
        bl.Family.from_json('{"family": "weight", "base": {"kind": "nope"}}')
        raise AssertionError("bad family accepted")
    except ValueError:
        pass

    print("python smoke test passed")


if __name__ == "__main__":
    main()
