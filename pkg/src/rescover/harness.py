"""Experiment harness: trial configuration, method execution, attacks,
metrics, and file outputs (trials.csv / summary.json / trace.jsonl /
field.txt).

A trial is fully determined by its config (including the seed): the seed
spawns independent child streams for the field, poses, graph, attack-count
draw, reward noise, and the random baseline, in that fixed order, so every
trial replays bit-exactly.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import environment as env
from . import oracles
from .commgraph import CommGraph, random_connected_graph
from .objective import SetFunction
from .protocol import run_distributed

METHODS = ("distributed-resilient", "semi-dist", "cent-greedy", "cent-rand", "optimal")

CSV_COLUMNS = (
    "trial",
    "method",
    "pre_value",
    "post_value",
    "ratio",
    "rounds",
    "oracle_calls",
    "k",
    "n",
    "seed",
)


class ConfigError(ValueError):
    """Invalid trial configuration; the message names the offending field."""


@dataclass(frozen=True)
class TrialConfig:
    n_robots: int = 5
    k_attacks: int | None = 3
    k_fraction_range: tuple[float, float] | None = None
    field_width: int = 200
    field_height: int = 200
    sensing_radius: float = 10.0
    step: float | None = None  # defaults to sensing_radius
    edge_probability: float = 0.3
    basis_count_range: tuple[int, int] = (3, 6)
    # bump widths near the sensing radius give graded importance across the
    # deployment region; much wider bumps flatten the field (methods become
    # indistinguishable), much narrower ones leave most actions worthless
    sigma_range: tuple[float, float] = (8.0, 16.0)
    weight_range: tuple[float, float] = (0.5, 1.0)
    pose_x_range: tuple[float, float] = (50.0, 100.0)
    pose_y_range: tuple[float, float] = (50.0, 100.0)
    noise_mean_frac: float = 0.0
    noise_var_frac: float = 0.0
    methods: tuple[str, ...] = METHODS
    attack: str = "brute_force"
    seed: int = 0

    def validate(self) -> None:
        if self.n_robots < 1:
            raise ConfigError("n_robots must be >= 1")
        if (self.k_attacks is None) == (self.k_fraction_range is None):
            raise ConfigError("exactly one of k_attacks / k_fraction_range must be set")
        if self.k_attacks is not None and not (0 <= self.k_attacks <= self.n_robots):
            raise ConfigError("k_attacks must be in [0, n_robots]")
        if self.k_fraction_range is not None:
            lo, hi = self.k_fraction_range
            if not (0.0 <= lo <= hi <= 1.0):
                raise ConfigError("k_fraction_range must satisfy 0 <= lo <= hi <= 1")
        if self.field_width < 1 or self.field_height < 1:
            raise ConfigError("field dimensions must be >= 1")
        if self.sensing_radius <= 0:
            raise ConfigError("sensing_radius must be positive")
        if self.step is not None and self.step <= 0:
            raise ConfigError("step must be positive")
        if not (0.0 <= self.edge_probability <= 1.0):
            raise ConfigError("edge_probability must be in [0, 1]")
        if self.noise_mean_frac < 0 or self.noise_var_frac < 0:
            raise ConfigError("noise fractions must be >= 0")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; valid: {', '.join(METHODS)}")
        if self.attack not in ("brute_force", "greedy"):
            raise ConfigError("attack must be 'brute_force' or 'greedy'")


_TUPLE_FIELDS = {
    "k_fraction_range",
    "basis_count_range",
    "sigma_range",
    "weight_range",
    "pose_x_range",
    "pose_y_range",
    "methods",
}


def config_from_dict(data: dict) -> TrialConfig:
    known = {f.name for f in dataclasses.fields(TrialConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    clean = {}
    for key, val in data.items():
        if key in _TUPLE_FIELDS and val is not None:
            if not isinstance(val, (list, tuple)):
                raise ConfigError(f"config key {key!r} must be a list")
            val = tuple(val)
        clean[key] = val
    cfg = TrialConfig(**clean)
    cfg.validate()
    return cfg


def load_config(path) -> TrialConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level config must be a JSON object")
    return config_from_dict(data)


@dataclass
class MethodResult:
    method: str
    solution: tuple[int, ...] = ()
    pre_value: float | None = None
    attack_ids: tuple[int, ...] = ()
    post_value: float | None = None
    ratio: float | None = None
    rounds: int | None = None
    oracle_calls: int | None = None
    error: str | None = None


@dataclass
class TrialRecord:
    trial: int
    n: int
    k: int
    seed: int
    methods: dict[str, MethodResult]


def _draw_k(cfg: TrialConfig, rng: np.random.Generator) -> int:
    if cfg.k_attacks is not None:
        return cfg.k_attacks
    lo, hi = cfg.k_fraction_range
    # round() is banker's rounding, fixed for reproducibility
    k = round(float(rng.uniform(lo * cfg.n_robots, hi * cfg.n_robots)))
    return min(max(k, 0), cfg.n_robots)


def build_trial_instance(cfg: TrialConfig):
    """Field, poses, actions, graph, objective, and k for one trial seed."""
    cfg.validate()
    streams = np.random.SeedSequence(cfg.seed).spawn(6)
    rng_field, rng_poses, rng_graph, rng_k, rng_noise, rng_rand = (
        np.random.default_rng(s) for s in streams
    )
    field_ = env.generate_field(
        cfg.field_width,
        cfg.field_height,
        rng_field,
        cfg.basis_count_range,
        cfg.sigma_range,
        cfg.weight_range,
    )
    poses = env.random_poses(cfg.n_robots, rng_poses, cfg.pose_x_range, cfg.pose_y_range)
    step = cfg.step if cfg.step is not None else cfg.sensing_radius
    actions = env.build_actions(poses, step, cfg.sensing_radius, field_)
    graph = random_connected_graph(cfg.n_robots, cfg.edge_probability, rng_graph)
    k = _draw_k(cfg, rng_k)
    f: SetFunction = env.coverage_objective(field_, actions)
    if cfg.noise_mean_frac > 0 or cfg.noise_var_frac > 0:
        f = env.noisy_objective(f, cfg.noise_mean_frac, cfg.noise_var_frac, rng_noise)
    action_sets = [tuple(a.id for a in group) for group in actions]
    return field_, graph, f, action_sets, k, rng_rand


def _attack(f: SetFunction, solution, k: int, model: str) -> oracles.AttackResult:
    if model == "greedy":
        return oracles.greedy_attack(f, solution, k)
    return oracles.worst_case_attack(f, solution, k)


def run_trial(cfg: TrialConfig, trace: list | None = None) -> TrialRecord:
    """Run every configured method on one generated instance, attack each
    solution, and record utilities. A method whose brute-force guard trips
    records an error and the trial continues."""
    field_, graph, f, action_sets, k, rng_rand = build_trial_instance(cfg)

    results: dict[str, MethodResult] = {}
    for method in cfg.methods:
        res = MethodResult(method)
        try:
            if method == "distributed-resilient":
                run = run_distributed(f, action_sets, graph, k, trace=trace)
                res.solution = tuple(sorted(run.solution))
                res.rounds = run.total_rounds
                res.oracle_calls = max(run.oracle_calls)
            elif method == "semi-dist":
                res.solution = tuple(sorted(oracles.semi_distributed_resilient(f, action_sets, graph, k)))
            elif method == "cent-greedy":
                res.solution = tuple(sorted(oracles.centralized_greedy(f, action_sets)))
            elif method == "cent-rand":
                res.solution = tuple(sorted(oracles.centralized_random(action_sets, rng_rand)))
            elif method == "optimal":
                sol, _ = oracles.brute_force_optimal(f, action_sets, k)
                res.solution = tuple(sorted(sol))
            res.pre_value = f.evaluate(res.solution)
            attack = _attack(f, res.solution, k, cfg.attack)
            res.attack_ids = tuple(sorted(attack.removed))
            res.post_value = attack.surviving_value
        except oracles.InstanceTooLargeError as exc:
            res.error = str(exc)
        results[method] = res

    # Ratios are only well-defined under worst-case attacks, where the
    # maximin optimum dominates every other solution's post-attack value.
    opt = results.get("optimal")
    if (
        cfg.attack == "brute_force"
        and opt is not None
        and opt.error is None
        and opt.post_value > 0
    ):
        for res in results.values():
            if res.error is None:
                res.ratio = res.post_value / opt.post_value
    return TrialRecord(trial=0, n=cfg.n_robots, k=k, seed=cfg.seed, methods=results)


def _indexed_trial(args) -> TrialRecord:
    i, cfg = args
    rec = run_trial(cfg)
    rec.trial = i
    return rec


def run_experiment(
    cfg: TrialConfig, n_trials: int, base_seed: int | None = None, workers: int = 1
) -> tuple[list[TrialRecord], dict]:
    """Monte Carlo batch: trial i runs with seed base_seed + i. Records come
    back in trial order regardless of worker completion order."""
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    if base_seed is None:
        base_seed = cfg.seed
    jobs = [(i, dataclasses.replace(cfg, seed=base_seed + i)) for i in range(n_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_indexed_trial, jobs))
    else:
        records = [_indexed_trial(job) for job in jobs]
    return records, summarize(records)


def _stats(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "count": int(arr.size),
        "mean": float(arr.mean()),
        "median": float(np.median(arr)),
        "q1": float(np.quantile(arr, 0.25)),
        "q3": float(np.quantile(arr, 0.75)),
        "min": float(arr.min()),
        "max": float(arr.max()),
    }


def summarize(records: Sequence[TrialRecord]) -> dict:
    per_method: dict[str, dict] = {}
    methods = list(records[0].methods) if records else []
    for method in methods:
        utils = [r.methods[method].post_value for r in records if r.methods[method].error is None]
        ratios = [
            r.methods[method].ratio
            for r in records
            if r.methods[method].error is None and r.methods[method].ratio is not None
        ]
        errors = sum(1 for r in records if r.methods[method].error is not None)
        entry: dict = {"errors": errors}
        if utils:
            entry["post_value"] = _stats(utils)
        if ratios:
            entry["ratio"] = _stats(ratios)
        per_method[method] = entry
    return {"n_trials": len(records), "methods": per_method}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trials_csv(records: Sequence[TrialRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            for method, res in rec.methods.items():
                writer.writerow(
                    [
                        rec.trial,
                        method,
                        _fmt(res.pre_value),
                        _fmt(res.post_value),
                        _fmt(res.ratio),
                        _fmt(res.rounds),
                        _fmt(res.oracle_calls),
                        rec.k,
                        rec.n,
                        rec.seed,
                    ]
                )


def write_summary_json(summary: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trace_jsonl(trace: Sequence[dict], path) -> None:
    with open(path, "w") as fh:
        for record in trace:
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Random small instances for verification sweeps and tests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    f: SetFunction
    action_sets: tuple[tuple[int, ...], ...]
    graph: CommGraph


def random_instance(
    n_robots: int,
    rng,
    max_actions: int = 4,
    field_size: int = 48,
    radius_range: tuple[float, float] = (5.0, 10.0),
    edge_probability: float | None = None,
) -> Instance:
    """Small coverage instance with 1..max_actions actions per robot
    (motion primitives subsampled and re-indexed densely) on a random
    connected graph."""
    rng = env.as_rng(rng)
    field_ = env.generate_field(field_size, field_size, rng, basis_count_range=(2, 4), sigma_range=(6.0, 18.0))
    margin = field_size * 0.15
    poses = env.random_poses(n_robots, rng, (margin, field_size - margin), (margin, field_size - margin))
    radius = float(rng.uniform(*radius_range))
    all_actions = env.build_actions(poses, radius, radius, field_)
    counts = [int(rng.integers(1, max_actions + 1)) for _ in range(n_robots)]
    kept: list[list[env.MotionAction]] = []
    next_id = 0
    for group, count in zip(all_actions, counts):
        picked = rng.choice(len(group), size=count, replace=False)
        acts = []
        for j in sorted(int(p) for p in picked):
            acts.append(dataclasses.replace(group[j], id=next_id))
            next_id += 1
        kept.append(acts)
    p = float(rng.random()) if edge_probability is None else edge_probability
    graph = random_connected_graph(n_robots, p, rng)
    f = env.coverage_objective(field_, kept)
    return Instance(f, tuple(tuple(a.id for a in g) for g in kept), graph)


# ---------------------------------------------------------------------------
# Verification sweeps (shared by the CLI `verify` subcommand and tests)
# ---------------------------------------------------------------------------


def consistency_sweep(n_instances: int, seed: int, n_range=(2, 8), max_actions: int = 4) -> dict:
    """Distributed run must match the centralized plan exactly, and the
    round/agreement bounds must hold, on every random instance."""
    from .commgraph import diameter

    rng = np.random.default_rng(seed)
    failures = []
    for idx in range(n_instances):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        inst = random_instance(n, rng, max_actions=max_actions)
        k = int(rng.integers(0, n + 1))
        run = run_distributed(inst.f, inst.action_sets, inst.graph, k)
        plan = oracles.centralized_resilient(inst.f, inst.action_sets, k)
        d = max(1, diameter(inst.graph))
        reasons = []
        if run.solution != plan.solution:
            reasons.append("solution mismatch")
        if {s.action for s in run.removals} != {s.action for s in plan.removals}:
            reasons.append("removal-set mismatch")
        if run.complements != plan.complements:
            reasons.append("complement-sequence mismatch")
        if not 0 <= run.phase1_agreement_round <= d:
            reasons.append(f"phase-1 agreement after {run.phase1_agreement_round} > {d} rounds")
        if run.phase2_rounds > 2 * (n - len(run.removals) + 1) * d:
            reasons.append(f"phase-2 took {run.phase2_rounds} rounds, bound {2 * (n - len(run.removals) + 1) * d}")
        if reasons:
            failures.append({"instance": idx, "n": n, "k": k, "reasons": reasons})
    return {"checked": n_instances, "failures": failures}


def bound_sweep(n_instances: int, seed: int) -> dict:
    """Theorem bound check on brute-force-sized instances (k >= 1; at k=0
    the 1/(1+k) term degenerates to a false optimality claim)."""
    rng = np.random.default_rng(seed)
    failures = []
    for idx in range(n_instances):
        n = int(rng.integers(2, 6))
        inst = random_instance(n, rng, max_actions=3)
        k = int(rng.integers(1, min(3, n) + 1))
        plan = oracles.centralized_resilient(inst.f, inst.action_sets, k)
        check = oracles.verify_bound(inst.f, inst.action_sets, k, plan.solution)
        if not check.holds:
            failures.append({"instance": idx, "n": n, "k": k, "lhs": check.lhs, "rhs": check.rhs})
    return {"checked": n_instances, "failures": failures}


def attack_shortcut_sweep(n_instances: int, seed: int) -> dict:
    """The exact-size worst-case enumeration must match the full <=k one."""
    rng = np.random.default_rng(seed)
    failures = []
    for idx in range(n_instances):
        n = int(rng.integers(2, 7))
        inst = random_instance(n, rng, max_actions=3)
        k = int(rng.integers(0, n + 1))
        solution = frozenset(acts[0] for acts in inst.action_sets)
        fast = oracles.worst_case_attack(inst.f, solution, k)
        ids = sorted(solution)
        slow = min(
            inst.f.evaluate(set(ids) - set(removed))
            for m in range(min(k, len(ids)) + 1)
            for removed in itertools.combinations(ids, m)
        )
        if abs(fast.surviving_value - slow) > 1e-9:
            failures.append({"instance": idx, "n": n, "k": k})
    return {"checked": n_instances, "failures": failures}
