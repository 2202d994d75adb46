"""Command-line experiment runner.

Subcommands: verify, build, build-tm, counter, simulate, lv-run, mc-run,
stats, run.  Every stochastic command takes a mandatory --seed, and all
artifacts are pure functions of their inputs and that seed.  The default
output directory is the BROWNIANSIM_OUT environment variable or the current
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import builder, counter, dynamics, machine, observer, stats, tmbuilder, turing
from .kernel import BACKEND


def _read_tm(path: str) -> turing.TMSpec:
    return turing.parse_tm(Path(path).read_text())


def _out_dir(args) -> Path:
    base = getattr(args, "out_dir", None) or os.environ.get("BROWNIANSIM_OUT", ".")
    path = Path(base)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    try:
        spec = _read_tm(args.tm)
    except (OSError, turing.ParseError) as exc:
        print(f"error: {args.tm}: {exc}", file=sys.stderr)
        return 2
    report = turing.check_reversible(spec)
    print(f"forward_deterministic:  {report.forward_deterministic}")
    print(f"backward_deterministic: {report.backward_deterministic}")
    for kind, a, b in report.witnesses:
        print(f"  {kind} clash: {a}")
        print(f"          with: {b}")
    status = 0 if report.ok() else 1
    if args.r is not None:
        inputs = [builder.standard_initial_config(spec, bits)
                  for bits in builder.bitstrings(args.r)]
        try:
            traces = turing.chains(spec, inputs, args.max_steps)
            print(f"chains: {len(traces)} disjoint, max length "
                  f"{max(len(t) for t in traces)}")
        except turing.ChainCollision as exc:
            print(f"chains: collision: {exc}")
            status = 1
        except turing.StepLimit as exc:
            print(f"chains: {exc}")
            status = 1
    return status


def cmd_counter(args) -> int:
    report = counter.verify_counter(counter.CounterParams(args.k))
    print(f"k={report.k} increments={report.increments} "
          f"total_steps={report.total_steps}")
    print(f"halt: state={report.halt_state} tape={report.halt_tape} "
          f"head={report.halt_head}")
    if args.trace:
        spec, config = counter.build_counter(counter.CounterParams(args.k))
        trace, _ = turing.run(spec, config, 64 * 2**args.k + 64)
        for i, c in enumerate(trace):
            print(f"{i:6d} {c.state} {c.tapes[0]} head={c.heads[0]}")
    return 0


def _build_graph(args):
    spec = _read_tm(args.tm)
    if args.mode == "lv":
        return builder.lv_from_tm(spec, args.r, args.T)
    return builder.mc_from_tm(spec, args.r, args.T)


def cmd_build(args) -> int:
    graph = _build_graph(args)
    out = _out_dir(args) / args.out
    _write(out, machine.dump_graph(graph))
    print(f"mode={args.mode} nodes={graph.n} edges={graph.n_edges} "
          f"layers={graph.n_layers}")
    return 0


def cmd_build_tm(args) -> int:
    spec = _read_tm(args.tm)
    out_dir = _out_dir(args)
    if args.mode == "lv":
        asm = tmbuilder.assemble_lv_tm(spec, tmbuilder.AugmentParams.lv(args.T, args.r))
    else:
        asm = tmbuilder.assemble_mc_tm(spec, tmbuilder.AugmentParams.mc(args.T, args.r))
    produced = asm.spec
    _write(out_dir / args.out, turing.format_tm(produced))
    _write(out_dir / args.meta_out, asm.meta_sidecar())
    print(f"mode={args.mode} states={len(produced.states)} "
          f"rules={len(produced.rules)}")
    return 0


def cmd_simulate(args) -> int:
    graph = machine.load_graph(Path(args.graph).read_text())
    emb = dynamics.Embedding.adiabatic(graph)
    occupancy = dynamics.occupancy_sample(emb, args.start, args.duration,
                                          args.trials, args.seed)
    lines = ["node,probability"]
    lines += [f"{u},{occupancy[u]:.6g}" for u in range(graph.n)]
    _write(_out_dir(args) / args.out, "\n".join(lines) + "\n")
    return 0


def _records_csv(measurements) -> str:
    lines = ["index,sim_time,metadata,value,accepted"]
    for m in measurements:
        lines.append(f"{m.index},{m.sim_time:.6f},{m.metadata},"
                     f"{m.value.decode()},{int(m.accepted)}")
    return "\n".join(lines) + "\n"


def _mc_records_csv(records) -> str:
    lines = ["index,sim_time,metadata,value,accepted"]
    for rec in records:
        lines.append(f"{rec.measurement_index},{rec.sim_time:.6f},"
                     f"{rec.metadata_at_read},{rec.value.decode()},1")
    return "\n".join(lines) + "\n"


def _resolve_wait(graph, wait, seed) -> float:
    if wait is not None and wait > 0:
        return wait
    return observer.calibrate_wait(graph, 0.25, seed, exact=True)


def cmd_lv_run(args) -> int:
    spec = _read_tm(args.tm)
    graph = builder.lv_from_tm(spec, args.r, args.T)
    wait = _resolve_wait(graph, args.wait, args.seed)
    params = observer.ProtocolParams(wait=wait, max_measurements=args.measurements)
    result = observer.lv_protocol(dynamics.Embedding.adiabatic(graph), params,
                                  args.seed)
    _write(_out_dir(args) / args.out, _records_csv(result.measurements))
    print(f"wait={wait:.3f} measurements={len(result.measurements)} "
          f"accepted={len(result.accepted)}")
    return 0


def cmd_mc_run(args) -> int:
    spec = _read_tm(args.tm)
    graph = builder.mc_from_tm(spec, args.r, args.T)
    wait = _resolve_wait(graph, args.wait, args.seed)
    params = observer.ProtocolParams(wait=wait, c=args.c)
    records = observer.mc_protocol(dynamics.Embedding.adiabatic(graph), params,
                                   args.count, args.seed)
    _write(_out_dir(args) / args.out, _mc_records_csv(records))
    print(f"wait={wait:.3f} c={args.c} records={len(records)}")
    return 0


def _parse_target(text: str) -> dict:
    target = {}
    for part in text.split(","):
        key, prob = part.split(":")
        target[key.strip()] = float(prob)
    return target


def cmd_stats(args) -> int:
    rows = [line.split(",") for line in
            Path(args.records).read_text().strip().splitlines()[1:]]
    accepted = [row for row in rows if row[4] == "1"]
    values = [row[3] for row in accepted]
    if not values:
        print("no accepted records", file=sys.stderr)
        return 1
    emp = stats.EmpiricalDist.from_samples(values)
    print(f"accepted: {emp.total}")
    print(f"chi_square_uniform: {stats.chi_square_uniform(emp.counts):.4f}")
    if args.target:
        print(f"tv_to_target: {stats.tv_distance(emp, _parse_target(args.target)):.6f}")
    try:
        lag = stats.lag_independence(values)
        df = stats.lag_independence_df(values)
        print(f"lag1_chi_square: {lag:.4f} (df={df}, "
              f"1%crit={stats.chi2_critical(max(df, 1), 0.01)})")
    except stats.DegenerateTable:
        print("lag1_chi_square: degenerate (constant sequence)")
    return 0


# ---------------------------------------------------------------------------
# Full experiment
# ---------------------------------------------------------------------------

def _load_config(path: str, overrides) -> dict:
    config: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    for item in overrides or []:
        key, value = item.split("=", 1)
        config[key] = value
    return config


def cmd_run(args) -> int:
    config = _load_config(args.config, args.set)
    missing = [key for key in ("mode", "tm", "r", "seed") if key not in config]
    if missing:
        print(f"error: config missing required keys: {', '.join(missing)}",
              file=sys.stderr)
        return 2
    mode = config["mode"]
    spec = _read_tm(config["tm"])
    r = int(config["r"])
    T = int(config["T"]) if "T" in config else None
    seed = int(config["seed"])
    out_dir = Path(config.get("output_dir") or
                   os.environ.get("BROWNIANSIM_OUT", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    t_start = time.time()

    if mode == "lv":
        graph = builder.lv_from_tm(spec, r, T)
    elif mode == "mc":
        graph = builder.mc_from_tm(spec, r, T)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    _write(out_dir / "graph.txt", machine.dump_graph(graph))

    wait_cfg = config.get("wait", "auto")
    if wait_cfg == "auto":
        wait = observer.calibrate_wait(
            graph, float(config.get("efficiency_target", 0.25)), seed, exact=True)
    else:
        wait = float(wait_cfg)
    emb = dynamics.Embedding.adiabatic(graph)
    metrics: dict = {
        "mode": mode,
        "backend": BACKEND,
        "nodes": graph.n,
        "layers": graph.n_layers,
        "wait": wait,
        "seed": seed,
    }

    if mode == "lv":
        measurements = int(config.get("measurements", 20000))
        params = observer.ProtocolParams(wait=wait, max_measurements=measurements)
        result = observer.lv_protocol(emb, params, seed)
        _write(out_dir / "records.csv", _records_csv(result.measurements))
        values = [rec.value.decode() for rec in result.accepted]
        emp = stats.EmpiricalDist.from_samples(values)
        curve = stats.acceptance_curve(result.attempts)
        curve_lines = ["k,empirical,geometric_bound"]
        curve_lines += [f"{k},{e:.6f},{g:.6f}" for k, e, g in curve]
        _write(out_dir / "curve.csv", "\n".join(curve_lines) + "\n")
        p_minus, p_plus = observer.exact_lv_efficiency(graph, wait)
        metrics.update({
            "measurements": len(result.measurements),
            "accepted": len(result.accepted),
            "jump_events": result.jump_events,
            "efficiency_minus": p_minus,
            "efficiency_plus": p_plus,
            "value_counts": dict(sorted(emp.counts.items())),
        })
        if "target" in config and ":" in config.get("target", ""):
            metrics["tv_to_target"] = stats.tv_distance(
                emp, _parse_target(config["target"]))
    else:
        count = int(config.get("samples", 10000))
        c = float(config.get("c", 1.0))
        tv_rows = []
        jump_events = 0
        target = _parse_target(config["target"]) if ":" in config.get("target", "") \
            else None
        for mult in (c, 2 * c):
            params = observer.ProtocolParams(wait=wait, c=mult)
            walk_stats: dict = {}
            records = observer.mc_protocol(emb, params, count, seed,
                                           stats_out=walk_stats)
            jump_events += walk_stats.get("jump_events", 0)
            if mult == c:
                _write(out_dir / "records.csv", _mc_records_csv(records))
            values = [rec.value.decode() for rec in records]
            emp = stats.EmpiricalDist.from_samples(values)
            tv = stats.tv_distance(emp, target) if target else float("nan")
            tv_rows.append((mult, tv))
        lines = ["c,tv_to_target"]
        lines += [f"{mult:.6g},{tv:.6f}" for mult, tv in tv_rows]
        _write(out_dir / "tv_series.csv", "\n".join(lines) + "\n")
        metrics.update({
            "samples": count,
            "jump_events": jump_events,
            "tv_series": [{"c": mult, "tv": tv} for mult, tv in tv_rows],
        })

    metrics["wall_clock_s"] = round(time.time() - t_start, 3)
    _write(out_dir / "metrics.json", json.dumps(metrics, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="browniansim",
        description="Build, simulate, and certify Brownian sampler machines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check a machine for reversibility")
    p.add_argument("--tm", required=True)
    p.add_argument("--r", type=int, default=None,
                   help="also run chains over all r-bit inputs")
    p.add_argument("--max-steps", type=int, default=10000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counter", help="build and verify the counter machine")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_counter)

    p = sub.add_parser("build", help="build a sampler graph from a machine")
    p.add_argument("--mode", choices=("lv", "mc"), required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--out", default="graph.txt")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("build-tm", help="assemble the sampler Turing machine")
    p.add_argument("--mode", choices=("lv", "mc"), required=True)
    p.add_argument("--tm", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--out", default="machine.tm")
    p.add_argument("--meta-out", default="machine.meta")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_build_tm)

    p = sub.add_parser("simulate", help="sample walk occupancy on a graph dump")
    p.add_argument("--graph", required=True)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="occupancy.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lv-run", help="run the Las Vegas observer protocol")
    p.add_argument("--tm", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--wait", type=float, default=None,
                   help="measurement spacing (default: calibrate to 1/4)")
    p.add_argument("--measurements", type=int, default=20000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="records.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_lv_run)

    p = sub.add_parser("mc-run", help="run the Monte Carlo observer protocol")
    p.add_argument("--tm", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--wait", type=float, default=None)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="records.csv")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_mc_run)

    p = sub.add_parser("stats", help="compute metrics from a records file")
    p.add_argument("--records", required=True)
    p.add_argument("--target", default=None,
                   help="target distribution, e.g. '0:0.25,1:0.75'")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("run", help="full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config entry")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
