"""Smoke test for the `vperc` extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import json

import vperc


def main():
    cx = vperc.Complex.sample((-20.0, -20.0, 20.0, 20.0), 1.0, 7)
    n = len(cx)
    assert n > 1000, n
    for i in range(0, n, 97):
        for j in cx.neighbors(i):
            assert i in cx.neighbors(j)
    dump = cx.dump()
    assert len(dump["nuclei"]) == n

    black = vperc.Coloring.constant(n, True)
    white = black.inverted()
    cross = vperc.Event.cross(4.0, 4.0)
    assert vperc.detect(cx, black, cross)
    assert not vperc.detect(cx, white, cross)

    c = vperc.Coloring.sample(n, 0.5, 3)
    assert c.flip(5).flip(5).signs == c.signs
    four = vperc.Event.arms(1.0, 6.0, 4)
    y = vperc.count_interfaces(cx, c, 1.0, 6.0)
    assert (y >= 4) == vperc.detect(cx, c, four), (y, four)
    assert vperc.detect_circuit(cx, black, 6.0, 0.25) == 1

    est = vperc.annealed(cross, 200, seed=11)
    assert abs(est["value"] - 0.5) <= 3 * est["std_error"] + 1e-12, est
    q = vperc.quenched(vperc.Event.arms(2.0, 8.0, 1), 10, 10, seed=12)
    assert 0.0 <= q["mean_q"]["value"] <= 1.0

    config = {
        "experiment": "cross-prob",
        "master_seed": 5,
        "geometry": {"scales": [4, 6]},
        "budget": {"replicates": 40},
    }
    a = vperc.run(json.dumps(config))
    b = vperc.run(json.dumps(config), workers=3)
    assert a["csv"] == b["csv"]
    assert len(a["rows"]) == 2

    config["budget"]["replicates"] = 0
    try:
        vperc.run(json.dumps(config))
    except ValueError as e:
        assert json.loads(str(e))["path"] == "budget.replicates"
    else:
        raise AssertionError("zero replicates accepted")

    assert "theta-scan" in vperc.EXPERIMENTS
    print("smoke test passed:", n, "cells;", "P[cross] =", round(est["value"], 3))


if __name__ == "__main__":
    main()
