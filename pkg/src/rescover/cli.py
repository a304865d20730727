"""Command-line entry point.

Subcommands:
  trial       run one trial and print per-method results (optional trace file)
  experiment  run a Monte Carlo batch and write trials.csv + summary.json
  verify      run the invariant sweeps (consistency, bounds, attack shortcut)
  field       export the importance grid a config+seed would generate
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import environment as env
from . import harness
from .harness import ConfigError, TrialConfig


def _load_cfg(args) -> TrialConfig:
    cfg = harness.load_config(args.config) if args.config else TrialConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    cfg.validate()
    return cfg


def _cmd_trial(args) -> int:
    cfg = _load_cfg(args)
    trace: list | None = [] if args.trace else None
    record = harness.run_trial(cfg, trace=trace)
    print(f"trial seed={record.seed} n={record.n} k={record.k}")
    for method, res in record.methods.items():
        if res.error is not None:
            print(f"  {method:22s} error: {res.error}")
            continue
        ratio = f" ratio={res.ratio:.4f}" if res.ratio is not None else ""
        rounds = f" rounds={res.rounds}" if res.rounds is not None else ""
        print(
            f"  {method:22s} pre={res.pre_value:.4f} post={res.post_value:.4f}"
            f"{ratio}{rounds} attacked={list(res.attack_ids)}"
        )
    if trace is not None:
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "trace.jsonl"
        harness.write_trace_jsonl(trace, path)
        print(f"wrote {path}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _load_cfg(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, summary = harness.run_experiment(
        cfg, args.trials, base_seed=cfg.seed, workers=args.workers
    )
    harness.write_trials_csv(records, out_dir / "trials.csv")
    harness.write_summary_json(summary, out_dir / "summary.json")
    print(f"wrote {out_dir / 'trials.csv'} and {out_dir / 'summary.json'}")
    for method, entry in summary["methods"].items():
        if "post_value" in entry:
            st = entry["post_value"]
            print(f"  {method:22s} median={st['median']:.4f} min={st['min']:.4f} max={st['max']:.4f}")
    return 0


def _cmd_verify(args) -> int:
    n_cons, n_bound, n_attack = (120, 30, 40) if args.small else (500, 100, 100)
    sweeps = {
        "consistency": harness.consistency_sweep(n_cons, args.seed),
        "approximation-bound": harness.bound_sweep(n_bound, args.seed + 1),
        "attack-shortcut": harness.attack_shortcut_sweep(n_attack, args.seed + 2),
    }
    failed = 0
    for name, result in sweeps.items():
        n_fail = len(result["failures"])
        failed += n_fail
        status = "PASS" if n_fail == 0 else "FAIL"
        print(f"[{status}] {name}: {result['checked'] - n_fail}/{result['checked']} ok")
        for detail in result["failures"][:5]:
            print(f"         failure: {detail}")
    return 0 if failed == 0 else 1


def _cmd_field(args) -> int:
    cfg = _load_cfg(args)
    streams = np.random.SeedSequence(cfg.seed).spawn(6)
    field_ = env.generate_field(
        cfg.field_width,
        cfg.field_height,
        np.random.default_rng(streams[0]),
        cfg.basis_count_range,
        cfg.sigma_range,
        cfg.weight_range,
    )
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "field.txt"
    env.write_field_grid(field_.importance, path)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rescover", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults apply if omitted)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out-dir", default=None, help="output directory")

    p_trial = sub.add_parser("trial", help="run a single trial")
    common(p_trial)
    p_trial.add_argument("--trace", action="store_true", help="write a per-round trace.jsonl")
    p_trial.set_defaults(fn=_cmd_trial)

    p_exp = sub.add_parser("experiment", help="run a trial batch")
    common(p_exp)
    p_exp.add_argument("--trials", type=int, required=True)
    p_exp.add_argument("--workers", type=int, default=1)
    p_exp.set_defaults(fn=_cmd_experiment)

    p_verify = sub.add_parser("verify", help="run the invariant sweeps")
    p_verify.add_argument("--small", action="store_true", help="reduced instance counts")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(fn=_cmd_verify)

    p_field = sub.add_parser("field", help="export a generated importance grid")
    common(p_field)
    p_field.set_defaults(fn=_cmd_field)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out_dir", None) is None and args.command == "experiment":
        parser.error("experiment requires --out-dir")
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
