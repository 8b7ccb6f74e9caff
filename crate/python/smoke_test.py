"""Smoke test for the raysinger Python extension.

Build and install it first:
    pip install --no-build-isolation -e crates/python
"""

import json
import math
import pathlib

import raysinger

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "configs"


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    # Str(e1 ê1) through both routes, n = 1: key 0b11
    a = raysinger.Clifford(1, [(0b11, "1"), (0, "3/2")])
    results.append(check("supertrace duality", a.supertrace() == a.supertrace_via_berezin(), a.supertrace()))
    r = raysinger.Clifford.random(3, 7, 0.3)
    results.append(check("random supertrace duality", r.supertrace() == r.supertrace_via_berezin()))

    exact, value = raysinger.euler_of_matrix([["0", "1/2"], ["-1/2", "0"]])
    results.append(check("euler of exact matrix", abs(value - 1 / (4 * math.pi)) < 1e-15, exact))

    samples = (CONFIGS / "fixed_points_reflection.json").read_text()
    results.append(check("fixed-point rhs", abs(raysinger.fixed_point_rhs("hF", samples) - 1.2) < 1e-12))

    lhs, rhs = raysinger.pipeline(3, 2, 2)
    results.append(check("pipeline routes agree", abs(lhs - rhs) < 1e-10))

    cfg = json.loads((CONFIGS / "circle_reflection.json").read_text())
    cfg["n"] = 256
    rep = raysinger.CircleModel(json.dumps(cfg)).anomaly()
    results.append(check("circle reflection anomaly", rep["rel_error"] < 2e-2, f"lhs {rep['lhs']:.6f} rhs {rep['rhs']:.6f}"))

    hol = json.loads((CONFIGS / "circle_holonomy.json").read_text())
    hol["n"] = 128
    tau = raysinger.CircleModel(json.dumps(hol)).renormalized_log_torsion()
    results.append(check("holonomy torsion finite", math.isfinite(tau), f"{tau:.8f}"))

    torus = json.loads((CONFIGS / "torus_minus_id.json").read_text())
    torus["n"] = 8
    trep = raysinger.TorusModel(json.dumps(torus)).anomaly()
    results.append(check("torus -id anomaly", trep["rel_error"] < 5e-2))

    suites = raysinger.run_suite("algebra", seed=42)
    results.append(check("algebra suite", all(c["passed"] for c in suites[0]["checks"])))

    try:
        raysinger.run_suite("nope")
        results.append(check("unknown suite rejected", False))
    except ValueError:
        results.append(check("unknown suite rejected", True))

    print(f"{sum(results)}/{len(results)} passed")
    raise SystemExit(0 if all(results) else 1)


if __name__ == "__main__":
    main()
