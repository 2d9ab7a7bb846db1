"""Acceptance suite.

Each criterion prints one `ACCEPTANCE <id>: PASS/FAIL` line (run with -s to
see them on success). The heavy Monte Carlo criteria (8a, 8b) use two worker
processes; everything is seeded, so reruns are bit-identical.
"""

import itertools

import numpy as np
import pytest

from risra import access as ac
from risra import channel as ch
from risra import cli
from risra import power_metrics as pm
from risra import receiver as rx
from risra.access import Policy
from risra.config import parse_config
from risra.engine import run_monte_carlo
from oracles import exhaustive_decode

IRSAP_MEAN_DEGREE_S20 = 3.7344627969933493
STATIC_9_DBW = 7.943282347242815

K_GRID = tuple(range(2, 21, 2))
COARSE_S_GRID = (2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 26, 33, 40)
COARSE_TRIALS = 2500
TRIALS = 10_000
WORKERS = 2


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def make_cfg(*overrides):
    cfg, _ = parse_config(None, list(overrides))
    return cfg


def ee_ci(agg) -> float:
    """Conservative 95% half-width for the ratio-of-means efficiency."""
    return (agg.ci95_throughput + agg.ee_ratio_of_means * agg.ci95_power_w) / agg.mean_power_w


def test_c1_replica_count_exactness():
    frames = 10_000
    rng = np.random.default_rng(101)
    k, s = 10, 20
    crdsap, sscp2, sscp3 = Policy("crdsap"), Policy("sscp", 2), Policy("sscp", 3)
    ok = True
    for _ in range(frames):
        if ac.decide_access(crdsap, None, rng, k, s).total_replicas != 2 * k:
            ok = False
            break
    for policy, count in ((sscp2, 2), (sscp3, 3)):
        for _ in range(frames):
            quality = ac.measure_quality(rng.uniform(0.0, 100.0, (k, s)))
            if ac.decide_access(policy, quality, rng, k, s).total_replicas != count * k:
                ok = False
                break
    report("1", ok, f"crdsap=2K and sscp(s)=sK replica totals over {frames} frames")
    assert ok


def test_c2_irsap_degree_statistics():
    n, s = 100_000, 20
    rng = np.random.default_rng(202)
    decision = ac.decide_access(Policy("irsap"), None, rng, n, s)
    sizes = np.array([len(chosen) for chosen in decision.slots_per_device])

    mean_ok = abs(sizes.mean() - IRSAP_MEAN_DEGREE_S20) <= 0.01 * IRSAP_MEAN_DEGREE_S20
    pmf = ac.irsap_degree_pmf(s)
    freq = np.bincount(sizes, minlength=s + 1)[2:] / n
    se = np.sqrt(pmf * (1 - pmf) / n)
    pmf_ok = bool(np.all(np.abs(freq - pmf) <= 3 * se))
    report(
        "2",
        mean_ok and pmf_ok,
        f"mean replicas {sizes.mean():.4f} vs {IRSAP_MEAN_DEGREE_S20:.4f} (1%), "
        f"degree pmf within 3 SE: {pmf_ok}",
    )
    assert mean_ok and pmf_ok


def test_c3_carp_probability_normalization():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(10_000):
        row = rng.uniform(0.0, 1e4, int(rng.integers(1, 41)))
        p = ac.carp_probabilities(row)
        worst = max(worst, abs(p.sum() - 1.0))
    uniform_ok = True
    for s in (1, 2, 5, 20, 40):
        p = ac.carp_probabilities(np.full(s, 3.7))
        uniform_ok = uniform_ok and bool(np.all(p == p[0]))
    ok = worst <= 1e-12 and uniform_ok
    report("3", ok, f"max |sum(p) - 1| = {worst:.2e}; equal rows exactly uniform: {uniform_ok}")
    assert ok


def test_c4_array_factor_peak():
    worst = 0.0
    for n_x, n_z in itertools.product((1, 2, 5, 10, 20), repeat=2):
        ris = ch.RisGeometry(n_x, n_z, 0.1, 0.1, 0.1)
        for theta in ch.phase_shift_set(5).angles:
            value = abs(ch.array_factor(ris, theta, theta))
            worst = max(worst, abs(value - ris.n_elements) / ris.n_elements)
    ok = worst <= 1e-9
    report("4", ok, f"aligned |array factor| = N across 25 geometries, worst rel err {worst:.2e}")
    assert ok


def test_c5_sic_matches_exhaustive_oracle():
    rng = np.random.default_rng(505)
    instances = 10_000
    ok = True
    for _ in range(instances):
        k = int(rng.integers(1, 7))
        s = int(rng.integers(1, 7))
        mask = rng.random((k, s)) < 0.45
        for device in range(k):
            if not mask[device].any():
                mask[device, int(rng.integers(s))] = True
        snr = np.where(rng.random((k, s)) < 0.7, 2.0, 0.5)
        slot_sets = [set(np.nonzero(mask[:, slot])[0].tolist()) for slot in range(s)]
        occ = rx.SlotOccupancy(tuple(frozenset(devs) for devs in slot_sets))
        decoded = rx.sic_decode(occ, snr, 1.0).decoded

        if decoded != exhaustive_decode(slot_sets, snr >= 1.0):
            ok = False
            break
        # scan-order invariance: decode with slots relabeled by a random shuffle
        perm = rng.permutation(s)
        shuffled = rx.SlotOccupancy(tuple(frozenset(slot_sets[j]) for j in perm))
        if rx.sic_decode(shuffled, snr[:, perm], 1.0).decoded != decoded:
            ok = False
            break
    report("5", ok, f"{instances} random instances equal the all-schedules oracle, any scan order")
    assert ok


def test_c6_closed_form_single_device_throughput():
    base = (
        "sim.k=1",
        "sim.s=5",
        "sim.trials=3000",
        "mtd.d_min_m=25",
        "mtd.d_max_m=25",
        "mtd.angle_min_rad=0",
        "mtd.angle_max_rad=0",
    )
    from risra.engine import simulate_frame, trial_rng

    expected = {"carp": 1.0 / ((1.0 + 0.2) * 5 * 1.0), "crdsap": 1.0 / ((1.0 + 0.0) * 5 * 1.0)}
    ok = True
    means = {}
    for kind, g_expected in expected.items():
        cfg = make_cfg(*base, f"policy.kind={kind}")
        # the per-frame contract is exact; aggregate means only accumulate
        # summation ulps on top of bit-identical per-frame values
        for trial in range(500):
            frame = simulate_frame(cfg, trial_rng(cfg.seed, trial))
            ok = ok and frame.successes == 1 and frame.throughput_pps == g_expected
        agg = run_monte_carlo(cfg)
        means[kind] = agg.mean_throughput
        ok = (
            ok
            and agg.mean_a == 1.0
            and agg.ci95_throughput <= 1e-15
            and agg.mean_throughput == pytest.approx(g_expected, rel=1e-14)
        )
    report(
        "6",
        ok,
        f"aligned device decodes every frame; G = {means['carp']:.6f} (carp), "
        f"{means['crdsap']:.6f} (crdsap)",
    )
    assert ok


def test_c7_power_spot_values():
    params = pm.PowerParams(1.2, 0.1, ch.dbw_to_watts(9.0), 1.2, 0.01, 0.04, 0.0015)
    ris_ok = pm.ris_power(100, 0.0015) == pytest.approx(0.15, rel=1e-12)
    ap_value = pm.ap_power(params, 20, True)
    ap_ok = ap_value == pytest.approx(2.4 + STATIC_9_DBW, rel=1e-6)
    mtd_ok = pm.mtd_power(params, 2) == pytest.approx(0.064, rel=1e-12)
    ok = ris_ok and ap_ok and mtd_ok
    report(
        "7",
        ok,
        f"P_ris(100)=150 mW, P_ap(20 slots)={ap_value:.6f} W, P_mtd(2)=64 mW",
    )
    assert ok


@pytest.fixture(scope="module")
def baseline_k20():
    results = {}
    for kind in ("carp", "crdsap", "irsap"):
        cfg = make_cfg(
            f"policy.kind={kind}", "sim.k=20", "sim.s=20",
            f"sim.trials={TRIALS}", f"sim.workers={WORKERS}",
        )
        results[kind] = run_monte_carlo(cfg)
    return results


def test_c8a_carp_dominates_at_high_load(baseline_k20):
    carp = baseline_k20["carp"]
    ok = True
    details = []
    for other_kind in ("crdsap", "irsap"):
        other = baseline_k20[other_kind]
        g_gap = (carp.mean_throughput - carp.ci95_throughput) - (
            other.mean_throughput + other.ci95_throughput
        )
        ee_gap = (carp.ee_ratio_of_means - ee_ci(carp)) - (
            other.ee_ratio_of_means + ee_ci(other)
        )
        ok = ok and g_gap > 0 and ee_gap > 0
        details.append(f"{other_kind}: G gap {g_gap:+.4f}, EE gap {ee_gap:+.5f}")
    report("8a", ok, "carp above crdsap and irsap at K=20 with separated CIs; " + "; ".join(details))
    assert ok


@pytest.fixture(scope="module")
def optimal_ee_curve():
    def run(kind: str, k: int, s: int, trials: int):
        cfg = make_cfg(
            f"policy.kind={kind}", f"sim.k={k}", f"sim.s={s}",
            f"sim.trials={trials}", f"sim.workers={WORKERS}",
        )
        return run_monte_carlo(cfg)

    def curve(kind: str):
        # two-stage grid search over the slot count: a coarse sweep locates
        # the efficiency peak, a step-1 window around it is then evaluated at
        # the full trial count (the efficiency curve is flat near its peak,
        # so coarse-only searches understate it between grid points)
        points = []
        for k in K_GRID:
            coarse = [
                (run(kind, k, s, COARSE_TRIALS).ee_ratio_of_means, s)
                for s in COARSE_S_GRID
            ]
            s_peak = max(coarse)[1]
            best = None
            for s in range(max(2, s_peak - 3), min(40, s_peak + 3) + 1):
                agg = run(kind, k, s, TRIALS)
                if best is None or agg.ee_ratio_of_means > best.ee_ratio_of_means:
                    best = agg
            points.append((k, best.ee_ratio_of_means, ee_ci(best)))
        return points

    cache = {}

    def get(kind: str):
        if kind not in cache:
            cache[kind] = curve(kind)
        return cache[kind]

    return get


@pytest.mark.parametrize("kind", ["carp", "sscp", "crdsap", "irsap"])
def test_c8b_optimal_ee_decreases_with_devices(optimal_ee_curve, kind):
    points = optimal_ee_curve(kind)
    violations = []
    for (k_prev, ee_prev, ci_prev), (k_next, ee_next, ci_next) in zip(points, points[1:]):
        allowance = 2 * max(ci_prev, ci_next)
        excess = (ee_next + ci_next) - (ee_prev - ci_prev)
        if excess > allowance:
            violations.append(f"K={k_prev}->{k_next}: EE {ee_prev:.5f}->{ee_next:.5f}")
    ok = not violations
    summary = ", ".join(f"{k}:{ee:.4f}" for k, ee, _ in points)
    report("8b", ok, f"{kind} optimal-over-S EE vs K [{summary}]"
           + ("" if ok else f"; rises: {violations}"))
    assert ok, f"{kind}: optimal EE rises with K at {violations}"


def test_c9_manifest_determinism(tmp_path):
    argv = [
        "sweep", "--axis", "K", "--values", "2,6", "--trials", "200",
        "--policies", "carp,crdsap", "--set", "sim.s=8",
    ]
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    workers = tmp_path / "workers.csv"
    assert cli.main(argv + ["--out", str(first)]) == 0
    assert cli.main(argv + ["--out", str(second)]) == 0
    assert cli.main(argv + ["--out", str(workers), "--set", "sim.workers=2"]) == 0
    replayed = tmp_path / "replayed.csv"
    cli.replay_manifest(tmp_path / "first.csv.manifest.json", replayed)
    ok = (
        first.read_bytes() == second.read_bytes() == workers.read_bytes()
        and replayed.read_bytes() == first.read_bytes()
    )
    report("9", ok, "rerun, worker-count change and manifest replay all byte-identical")
    assert ok
