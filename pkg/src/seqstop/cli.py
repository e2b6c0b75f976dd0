"""Command-line entry point.

Subcommands:
    run            execute configured studies and write the report files
    sensitivity    stopping-stage sweep over alternative cost schedules
    synth-validate exact-world oracle checks (no dataset required)
    report         print a human-readable summary of an output directory
    fetch-data     materialize the study source files

Exit codes: 0 success, 1 config/ingestion error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import diagnostics, fetch, harness, stopping, synth
from .core import CostSchedule, LossSpec


def _cmd_run(args) -> int:
    try:
        configs = harness.load_study_configs(args.config)
    except (OSError, harness.IngestionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.study:
        missing = [s for s in args.study if s not in configs]
        if missing:
            print(f"config error: unknown studies {missing}; configured: "
                  f"{sorted(configs)}", file=sys.stderr)
            return 1
        selected = {s: configs[s] for s in args.study}
        require_all = True
    else:
        selected = configs
        require_all = False

    artifacts = []
    for name, cfg in selected.items():
        if not Path(cfg.source).exists():
            msg = f"{name}: source file missing ({cfg.source})"
            if require_all:
                print(f"ingestion error: {msg}", file=sys.stderr)
                return 1
            print(f"skipping {msg}", file=sys.stderr)
            continue
        try:
            art = harness.run_study(
                cfg,
                n_reps=args.reps,
                master_seed=args.seed,
                bridge_reps=args.bridge_reps,
                workers=args.workers,
            )
        except harness.IngestionError as exc:
            print(f"ingestion error: {exc}", file=sys.stderr)
            return 1
        except RuntimeError as exc:
            print(f"runtime error: {exc}", file=sys.stderr)
            return 2
        artifacts.append(art)
        print(f"{name}: {art.n_reps} reps, preferred stage "
              f"{art.stopping.stage_labels[art.stopping.preferred_stage]}")
    if not artifacts:
        print("ingestion error: no runnable studies (all source files missing)",
              file=sys.stderr)
        return 1
    files = harness.emit_reports(artifacts, args.out)
    print(f"wrote {len(files)} files to {args.out}")
    return 0


def _cmd_sensitivity(args) -> int:
    try:
        configs = harness.load_study_configs(args.config)
        with open(args.schedules) as fh:
            docs = [d for d in yaml.safe_load_all(fh) if d]
    except (OSError, harness.IngestionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if not docs:
        print("config error: empty schedules file", file=sys.stderr)
        return 1
    rows = []
    for doc in docs:
        study = str(doc.get("study", ""))
        if study not in configs:
            print(f"config error: schedules reference unknown study {study!r}",
                  file=sys.stderr)
            return 1
        losses = [float(x) for x in doc["losses"]]
        schedules = [CostSchedule(tuple(float(c) for c in s))
                     for s in doc["schedules"]]
        for schedule, report in zip(
            schedules, stopping.sensitivity_sweep(losses, schedules)
        ):
            rows.append((study, schedule.cumulative, report))
            totals = ", ".join(f"{v:.3f}" for v in report.total)
            print(f"{study} schedule {schedule.cumulative}: totals ({totals}) "
                  f"-> {report.stage_labels[report.preferred_stage]}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    harness._write_csv(
        out / "sensitivity.csv",
        ["study", "schedule"]
        + [f"total_F{t + 1}" for t in range(max(len(r[2].total) for r in rows))]
        + ["preferred"],
        [[study, ":".join(repr(float(c)) for c in schedule)]
         + list(report.total)
         + [report.stage_labels[report.preferred_stage]]
         for study, schedule, report in rows],
    )
    print(f"wrote {out / 'sensitivity.csv'}")
    return 0


def _cmd_synth_validate(args) -> int:
    worst_mart = 0.0
    worst_rev = 0.0
    worst_decomp = 0.0
    worst_bellman = 0.0
    upper_bound_ok = True
    loss = LossSpec(c_fp=1.0, c_fn=5.0)
    for i in range(args.worlds):
        world = synth.random_world(args.seed + i)
        worst_mart = max(worst_mart, synth.martingale_check(world))
        worst_rev = max(worst_rev, synth.reverse_martingale_check(world))
        atoms = _decomposition_atoms(world)
        for d, x, y, w in atoms:
            lhs, rhs = diagnostics.decomposition_check(d, x, y, weights=w)
            worst_decomp = max(worst_decomp, abs(lhs - rhs))
        costs = CostSchedule(tuple(0.02 * t for t in range(world.horizon + 1)))
        sol = stopping.bellman_solve(world, loss, costs)
        if _enumerable(world):
            brute = stopping.exhaustive_policy_cost(world, loss, costs)
            worst_bellman = max(worst_bellman, abs(sol.total_cost - brute))
        retro = _retrospective_on_world(world, loss, costs)
        if min(retro) < sol.total_cost - 1e-12:
            upper_bound_ok = False
    print(f"martingale max violation        {worst_mart:.3e}")
    print(f"reverse martingale max violation {worst_rev:.3e}")
    print(f"decomposition max |lhs-rhs|     {worst_decomp:.3e}")
    print(f"bellman vs enumeration max gap  {worst_bellman:.3e}")
    print(f"retrospective >= bellman        {'yes' if upper_bound_ok else 'NO'}")
    good = (worst_mart <= 1e-12 and worst_rev <= 1e-12
            and worst_decomp <= 1e-12 and worst_bellman <= 1e-12
            and upper_bound_ok)
    print("PASS" if good else "FAIL")
    return 0 if good else 2


def _decomposition_atoms(world):
    """(d, x, y, weight) atom vectors for each signal stage with a coarsening."""
    posteriors = synth.exact_posteriors(world)
    projections = synth.exact_projections(world)
    joints = synth.stage_joints(world)
    hists = [synth.history_tuples(world, t) for t in range(world.horizon + 1)]
    out = []
    for t in range(1, world.horizon + 1):
        cells = world.coarsenings[t - 1]
        joint = joints[t]
        d_atoms, x_atoms, y_atoms, w_atoms = [], [], [], []
        for idx, h in enumerate(hists[t]):
            for d in (0, 1):
                w = joint[d, idx]
                if w <= 0:
                    continue
                d_atoms.append(float(d))
                x_atoms.append(posteriors[t][h])
                y_atoms.append(projections[t - 1][int(cells[idx])])
                w_atoms.append(w)
        out.append((np.asarray(d_atoms), np.asarray(x_atoms),
                    np.asarray(y_atoms), np.asarray(w_atoms)))
    return out


def _enumerable(world) -> bool:
    states = sum(world.n_histories(t) for t in range(world.horizon))
    return states <= 16


def _retrospective_on_world(world, loss, costs):
    """Exact expected acting loss per stage plus cumulative cost."""
    totals = []
    joints = synth.stage_joints(world)
    for t, joint in enumerate(joints):
        prob = joint.sum(axis=0)
        live = prob > 0
        post = joint[1][live] / prob[live]
        expected = float(np.sum(prob[live] * stopping.acting_loss(post, loss)))
        totals.append(expected + costs.cumulative[t])
    return totals


def _cmd_report(args) -> int:
    path = Path(args.indir) / "report.json"
    if not path.exists():
        print(f"config error: {path} not found", file=sys.stderr)
        return 1
    with open(path) as fh:
        doc = json.load(fh)
    for study, art in sorted(doc.get("studies", {}).items()):
        print(f"== {study} ({art['n_reps']} reps, c* = {art['loss']['c_star']:.4f})")
        stages = art["stage_labels"]
        for metric in ("auc", "brier", "decision_loss"):
            vals = ", ".join(
                f"{row['stage']} {row['mean']:.4f} (sd {row['sd']:.4f})"
                for row in art["metrics"][metric])
            print(f"   {metric:13s} {vals}")
        stop = art["stopping"]
        totals = ", ".join(f"{s} {v:.4f}" for s, v in zip(stages, stop["total"]))
        print(f"   total cost    {totals}  -> preferred {stop['preferred_stage']}")
        for d in art["drift"]:
            print(f"   drift {d['transition']}: M {d['mean_drift']['mean']:+.4f} "
                  f"S {d['mean_square_drift']['mean']:.5f}")
        bridge = art["bridge"]
        print(f"   stability     {['%.3f' % s for s in bridge['stability']]} "
              f"distance {['%.3f' % s for s in bridge['threshold_distance']]}")
    for row in doc.get("sensitivity", []):
        print(f"sensitivity {row['study']} {row['schedule']}: -> {row['preferred']}")
    return 0


def _cmd_fetch(args) -> int:
    for message in fetch.fetch_all(args.out, args.study or None):
        print(message)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="seqstop", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run configured studies")
    p.add_argument("--config", required=True)
    p.add_argument("--study", action="append",
                   help="run only this study (repeatable)")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="results")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--bridge-reps", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sensitivity", help="stopping sweep over cost schedules")
    p.add_argument("--config", required=True)
    p.add_argument("--schedules", required=True)
    p.add_argument("--out", default="results")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("synth-validate", help="exact-world oracle checks")
    p.add_argument("--worlds", type=int, default=100)
    p.add_argument("--seed", type=int, default=20260810)
    p.set_defaults(func=_cmd_synth_validate)

    p = sub.add_parser("report", help="print a summary of an output directory")
    p.add_argument("--in", dest="indir", required=True)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("fetch-data", help="materialize study source files")
    p.add_argument("--out", default="data")
    p.add_argument("--study", action="append",
                   choices=["bcw", "cleveland", "pima", "eicu"])
    p.set_defaults(func=_cmd_fetch)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
