"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
complete. Every tolerance is pinned here; the sweeps are deterministic
(fixed seeds), so results are reproducible bit-for-bit.
"""

import numpy as np
import pytest

from rescover import environment as env
from rescover.harness import (
    TrialConfig,
    attack_shortcut_sweep,
    bound_sweep,
    consistency_sweep,
    random_instance,
    run_experiment,
)
from rescover.objective import check_monotone, check_submodular
from rescover.protocol import run_distributed

CONSISTENCY_INSTANCES = 500
BOUND_INSTANCES = 100
SHORTCUT_INSTANCES = 100
CALL_RATIO_LIMIT = 4.0
SETTING1_MIN_RATIO = 0.70


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def consistency_result():
    return consistency_sweep(CONSISTENCY_INSTANCES, seed=20260809)


def test_consistency_distributed_equals_centralized(consistency_result):
    mismatches = [
        f
        for f in consistency_result["failures"]
        if any("mismatch" in r for r in f["reasons"])
    ]
    report(
        "consistency",
        not mismatches,
        f"{CONSISTENCY_INSTANCES - len(mismatches)}/{CONSISTENCY_INSTANCES} instances "
        f"(N in 2..8, |Vi| in 1..4, K in 0..N) match the centralized plan exactly",
    )


def test_convergence_round_bounds(consistency_result):
    violations = [
        f
        for f in consistency_result["failures"]
        if any("phase" in r for r in f["reasons"])
    ]
    report(
        "convergence-rounds",
        not violations,
        f"{CONSISTENCY_INSTANCES - len(violations)}/{CONSISTENCY_INSTANCES} instances: "
        f"removal phase agrees within d(G) rounds, complement phase within 2(N-K+1)d(G)",
    )


def test_approximation_bound():
    result = bound_sweep(BOUND_INSTANCES, seed=97)
    report(
        "approximation-bound",
        not result["failures"],
        f"{BOUND_INSTANCES - len(result['failures'])}/{BOUND_INSTANCES} brute-force-sized "
        f"instances satisfy the worst-case guarantee at tolerance 1e-9",
    )


def test_oracle_call_complexity():
    per_n_means = {}
    worst = 0.0
    for n in (10, 20, 30):
        rng = np.random.default_rng(1000 + n)
        ratios = []
        for _ in range(3):
            inst = random_instance(n, rng, max_actions=4, field_size=64, edge_probability=0.3)
            k = n // 2
            run = run_distributed(inst.f, inst.action_sets, inst.graph, k)
            n_sel = n - len(run.removals)
            for i, calls in enumerate(run.oracle_calls):
                ratios.append(calls / (max(1, n_sel) ** 2 * len(inst.action_sets[i])))
        per_n_means[n] = float(np.mean(ratios))
        worst = max(worst, max(ratios))
    bounded = worst <= CALL_RATIO_LIMIT
    flat = per_n_means[30] <= 1.5 * per_n_means[10]
    report(
        "oracle-call-complexity",
        bounded and flat,
        f"calls/((N-K)^2 |Vi|) max={worst:.2f} (limit {CALL_RATIO_LIMIT}), "
        f"means per N={ {n: round(v, 3) for n, v in per_n_means.items()} } (no growth)",
    )


def test_setting1_statistical_reproduction():
    cfg = TrialConfig()  # N=5, K=3, brute-force worst-case attacks, all methods
    _, summary = run_experiment(cfg, 200, base_seed=20260809)
    m = summary["methods"]
    dist_med = m["distributed-resilient"]["post_value"]["median"]
    others_med = {
        name: m[name]["post_value"]["median"]
        for name in ("semi-dist", "cent-greedy", "cent-rand")
    }
    dist_min = m["distributed-resilient"]["ratio"]["min"]
    rand_min = m["cent-rand"]["ratio"]["min"]
    ok_median = all(dist_med >= v for v in others_med.values())
    ok_floor = dist_min >= SETTING1_MIN_RATIO
    ok_rand = rand_min < dist_min
    report(
        "setting1-reproduction",
        ok_median and ok_floor and ok_rand,
        f"200 trials N=5 K=3: dist median {dist_med:.2f} vs {({k: round(v, 2) for k, v in others_med.items()})}; "
        f"dist min ratio {dist_min:.3f} (gate {SETTING1_MIN_RATIO}); rand min ratio {rand_min:.3f}",
    )


def test_setting2_statistical_reproduction():
    lines = []
    ok = True
    for n in (30, 40, 50):
        cfg = TrialConfig(
            n_robots=n,
            k_attacks=None,
            k_fraction_range=(0.5, 0.75),
            attack="greedy",
            noise_mean_frac=0.10,
            noise_var_frac=0.05,
            methods=("distributed-resilient", "semi-dist", "cent-greedy", "cent-rand"),
        )
        _, summary = run_experiment(cfg, 50, base_seed=1000 + n)
        means = {name: e["post_value"]["mean"] for name, e in summary["methods"].items()}
        ordered = (
            means["distributed-resilient"] >= means["semi-dist"] >= means["cent-rand"]
            and means["distributed-resilient"] >= means["cent-greedy"]
        )
        ok = ok and ordered
        lines.append(
            f"N={n} dist={means['distributed-resilient']:.1f} semi={means['semi-dist']:.1f} "
            f"greedy={means['cent-greedy']:.1f} rand={means['cent-rand']:.1f}"
        )
    report(
        "setting2-reproduction",
        ok,
        "mean post-attack utility ordering (dist >= semi >= rand, dist >= greedy): "
        + "; ".join(lines),
    )


def test_property_suite():
    rng = np.random.default_rng(31337)
    field = env.generate_field(200, 200, rng)
    poses = env.random_poses(5, rng)
    actions = env.build_actions(poses, 10.0, 10.0, field)
    base = env.coverage_objective(field, actions)
    noisy = env.noisy_objective(base, 0.10, 0.05, rng)

    checks = []
    for name, f in (("coverage", base), ("noisy", noisy)):
        sub_ok, _ = check_submodular(f, 1000, rng_seed=1)
        mono_ok, _ = check_monotone(f, 1000, rng_seed=2)
        checks.append((f"{name}-submodular", sub_ok))
        checks.append((f"{name}-monotone", mono_ok))

    shortcut = attack_shortcut_sweep(SHORTCUT_INSTANCES, seed=55)
    checks.append(("attack-shortcut", not shortcut["failures"]))

    ok = all(flag for _, flag in checks)
    report(
        "property-suite",
        ok,
        "1000-chain submodularity/monotonicity on coverage and noisy objectives, "
        f"exact-size vs <=K attack on {SHORTCUT_INSTANCES} instances: "
        + ", ".join(f"{name}={'ok' if flag else 'FAIL'}" for name, flag in checks),
    )
