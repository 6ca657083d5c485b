#!/usr/bin/env python3
"""Smoke test for the `flexrate` Python extension module.

Builds nothing itself: it expects `cargo build -p flexrate-py` (or
`--release`) to have produced `libflexrate.so` under `target/`, copies it
next to a temp dir as `flexrate.so`, imports it, and exercises the main
types and operations end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO_ROOT / "target" / "release" / "libflexrate.so",
        REPO_ROOT / "target" / "debug" / "libflexrate.so",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "libflexrate.so not found; run `cargo build -p flexrate-py` first"
        )
    so = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="flexrate_py_"))
    shutil.copy2(so, stage / "flexrate.so")
    sys.path.insert(0, str(stage))
    import flexrate  # noqa: E402

    print(f"loaded {so}")
    return flexrate


def approx(a, b, rel=1e-9, abs_tol=0.0):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_tol)


def main():
    fx = load_module()
    checks = 0

    def ok(cond, label):
        nonlocal checks
        checks += 1
        if not cond:
            sys.exit(f"FAIL: {label}")
        print(f"ok {checks:2d}: {label}")

    # numerology table
    n3 = fx.numerology_lookup(3)
    ok(n3.tti_ms == 0.125 and n3.rb_bandwidth_khz == 1440, "numerology row mu=3")
    ok(approx(n3.cp_us, 0.58625, rel=0, abs_tol=1e-15), "cp length mu=3")
    ok(n3.is_mmwave_band and n3.is_mmwave_eligible, "mu=3 mmWave flags")
    n2 = fx.numerology_lookup(2)
    ok((not n2.is_mmwave_band) and n2.is_mmwave_eligible, "mu=2 mmWave flags")
    try:
        fx.numerology_lookup(5)
        sys.exit("FAIL: mu=5 must raise")
    except ValueError:
        ok(True, "mu=5 rejected")

    # blockage geometry
    hand = fx.BodyGeometry(width_m=0.4, distance_m=0.3, height_m=0.4)
    pocket = fx.BodyGeometry(width_m=0.4, distance_m=0.0, height_m=0.4)
    near = fx.Deployment(ap_height_m=5.0, ap_distance_m=1.0)
    far = fx.Deployment(ap_height_m=5.0, ap_distance_m=10.0)
    ok(fx.blockage_free_radius(hand, near) == 3.75, "blockage-free zone 3.75 m")
    ok(fx.blockage_probability(pocket, far) == 0.5, "pocket p = 1/2 exactly")
    ok(fx.blockage_probability(hand, near) == 0.0, "hand close p = 0 exactly")
    ok(
        approx(fx.blockage_probability(hand, far), 0.187167041810958, rel=1e-9),
        "hand far p = atan(2/3)/pi",
    )
    ok(
        approx(fx.shadow_cone_width(hand), 2.0 * math.atan(2.0 / 3.0)),
        "shadow cone width",
    )
    ok(fx.los_slot_probability(3, 0.5, 1) == 0.125, "LOS slot probability (1/2)^3")

    # frame efficiency
    ok(fx.slots_per_interval(4, 1.0) == 16, "xi = 16 for mu=4, tau=1ms")
    ok(
        approx(fx.slot_aggregation_efficiency(2, 1.0), 1.0 - 0.75 / 14.0),
        "zeta(mu=2, tau=1ms)",
    )
    try:
        fx.slots_per_interval(2, 0.3)
        sys.exit("FAIL: non-multiple tau must raise")
    except ValueError:
        ok(True, "non-multiple tau rejected")

    # channel model
    office = fx.Environment.office()
    budget = fx.LinkBudget()
    ok(approx(budget.snr_budget_db, 114.0), "link budget 114 dB")
    ybar = office.mean_snr("LOS", near, budget)
    ok(approx(ybar, 1135444.013, rel=1e-6), "office LOS mean SNR at 1 m")
    ccdf = fx.SnrCcdf.for_link(office, "LOS", near, budget)
    ok(ccdf.value(0.0) == 1.0, "ccdf exactly 1 at zero")
    ok(ccdf.value(10.0 * ybar) < ccdf.value(0.1 * ybar), "ccdf decays")
    es = ccdf.expected_spectral_efficiency()
    ok(approx(es, 19.359664903206, rel=1e-6), "office LOS E[S] at 1 m")

    # rate engine
    sc = fx.Scenario(office, hand, near)
    rep = sc.evaluate(mu=2, tau_ms=1.0)
    ok(rep.p == 0.0 and rep.xi == 4, "report fields for office/hand/1m")
    ok(approx(rep.zeta, 1.0 - 0.75 / 14.0), "report zeta")
    ok(
        approx(rep.rate_time_avg_bps / 1e6, 1832.254, rel=1e-4),
        "office/hand/1m mu=2 tau=1ms time-avg rate",
    )

    rec = sc.recommend()
    ok((rec.best_mu, rec.best_tau_ms) == (2, 5.0), "office/hand/1m best (2, 5)")
    ok(len(rec.ranked) == 6, "full ranked list")

    car = fx.Environment.car_park()
    sc2 = fx.Scenario(car, pocket, far)
    rec2 = sc2.recommend()
    ok(
        (rec2.best_mu, rec2.best_tau_ms) == (4, 0.25),
        "car_park/pocket/10m best (4, 0.25)",
    )

    sim = sc2.simulate(mu=4, tau_ms=0.25, trials=20000, seed=42)
    ok(sim.trials == 20000, "simulation trial count")
    analytic = sc2.evaluate(mu=4, tau_ms=0.25)
    ok(
        abs(sim.mean_rate_bps - analytic.rate_aggregate_bps)
        <= 3.0 * sim.rate_std_err_bps,
        "simulated rate within 3 SE of the closed form",
    )
    sim_b = sc2.simulate(mu=4, tau_ms=0.25, trials=20000, seed=42)
    ok(sim.mean_rate_bps == sim_b.mean_rate_bps, "simulation deterministic for a seed")

    print(f"\nsmoke test passed: {checks} checks")


if __name__ == "__main__":
    main()
