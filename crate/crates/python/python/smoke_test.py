"""Smoke test for the pyvaxgame extension module.

Build and install first, e.g. `maturin build --release` in crates/python and
`pip install` the produced wheel, then run `python python/smoke_test.py`.
"""

import json
import math

import pyvaxgame as vg


def main():
    single = vg.DegreeDistribution.explicit({4: 1.0})
    game = vg.Game(single, 2.0, vg.Weighting.identity(), 1.0 / 3.0)
    eq = game.solve_pne()
    assert eq["threshold"] == 4
    assert abs(eq["fraction"] - 0.75) < 1e-9
    assert abs(eq["v"] - 0.25) < 1e-9
    assert eq["max_violation"] <= 1e-8

    state = vg.endemic_state(single, 2.0, [1.0])
    assert abs(state["v"] - 0.5) < 1e-12

    w = vg.Weighting.prelec(0.5)
    assert abs(w.weight(vg.PRELEC_FIXED_POINT) - vg.PRELEC_FIXED_POINT) < 1e-15
    assert abs(w.round_trip(1e-9) - 1e-9) < 1e-12
    assert w.check_shape(10_000)

    dist = vg.DegreeDistribution.power_law(1, 100, 3.0)
    assert len(dist) == 100
    assert 0.003 <= dist.tail_mass(10) < 0.004
    rows = []
    for c in (0.1, 0.5, 0.9):
        truthful = vg.Game(dist, 2.0, vg.Weighting.identity(), c).solve_pne()
        weighted = vg.Game(dist, 2.0, w, c).solve_pne()
        bound = vg.threshold_upper_bound(dist, 2.0, vg.Weighting.identity(), c)
        assert truthful["threshold"] <= bound
        rows.append((c, truthful["threshold"], weighted["threshold"]))

    ineff = vg.Game(single, 2.0, vg.Weighting.identity(), 1.0 / 3.0).inefficiency()
    assert ineff["ordering_holds"] and ineff["bound_holds"]

    sandwich = vg.ratio_sandwich(vg.DegreeDistribution.power_law(2, 500, 3.0), 2.0, 0.75, [0.8, 0.9])
    assert all(r["lower_t"] <= r["d_t"] <= r["upper_t"] for r in sandwich)

    scenario = {
        "distribution": {"type": "explicit", "mass": {"4": 1.0}},
        "delta": 2.0,
        "cost": 1.0 / 3.0,
    }
    table = json.loads(vg.run_scenario("pne", json.dumps(scenario), "json"))
    assert table[0]["threshold"] == 4

    try:
        vg.Weighting.prelec(1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha outside (0, 1] must be rejected")

    print("thresholds (c, identity, prelec 0.5):", rows)
    print("smoke test passed")


if __name__ == "__main__":
    main()
