from __future__ import annotations
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from src.characterize.baselines import Method, evaluate_characterizers, train_baseline
from src.characterize.cache_model import HIDDEN as CACHE_HIDDEN, LAYERS as CACHE_LAYERS, train_cache_model
from src.characterize.characterizer import HIDDEN as CHAR_HIDDEN, LAYERS as CHAR_LAYERS, train_characterizer
from src.engine.report import SimulationReport, compare_report, improvement_metric
from src.engine.simulate import ModelRegistry
from src.experiments.config import (
    ConfigError, RunConfig, apply_overrides, load_config, validate_config,
)
from src.experiments.plot import render
from src.nn.serialize import load_model, save_model
from src.oracle.benefit import aggregate_page_stats
from src.oracle.replay import majority_baseline, oracle_replay, parse_labeled, write_labeled
from src.traces.generator import (
    SCENARIOS, TRACE_STATS, category_profile, concatenate, generate_scenario,
    generate_synthetic, profile_for_trace,
)
from src.traces.trace import Trace, WorkloadCategory, capacity_for_working_set, parse_trace, write_trace

logger = logging.getLogger(__name__)

CATEGORY_NAMES = {
    "mail": WorkloadCategory.MailServer,
    "web": WorkloadCategory.WebServer,
    "database": WorkloadCategory.Database,
    "file": WorkloadCategory.FileServer,
}
CATEGORY_NAMES.update({c.name: c for c in WorkloadCategory})
DEFAULT_FRACTION = 0.2


def _category(name: str) -> WorkloadCategory:
    try:
        return CATEGORY_NAMES[name]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown category {name!r}; expected one of {', '.join(sorted(CATEGORY_NAMES))}") from None


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="Overrides config seed")
    p.add_argument("--capacity", type=int, default=None, help="SSD capacity in pages")
    p.add_argument("--capacity-fraction", type=float, default=None,
                   help="Capacity as a fraction of the trace's working set (default 0.2)")
    p.add_argument("--config", type=Path, default=None, help="key = value run configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Override one config key")
    p.add_argument("--verbose", action="store_true", help="DEBUG logging")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(description="SSD cache simulation pipeline: gen, label, train, simulate, compare, report")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", parents=[common], help="Generate a synthetic trace")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--category", type=_category, help="mail | web | database | file")
    src.add_argument("--profile", choices=sorted(TRACE_STATS), help="Reference trace row")
    src.add_argument("--scenario", choices=sorted(SCENARIOS), help="Interleaved server scenario")
    src.add_argument("--concat", type=_category, nargs="+", help="Categories back to back (workload change)")
    g.add_argument("-n", type=int, default=20000, help="Requests (per stream for --scenario/--concat)")
    g.add_argument("--chunk", type=int, default=1000, help="Interleave block for --scenario")
    g.add_argument("--out", type=Path, required=True)

    lb = sub.add_parser("label", parents=[common], help="Oracle-label a trace")
    lb.add_argument("--trace", type=Path, default=None)
    lb.add_argument("--out", type=Path, default=None)

    t = sub.add_parser("train", parents=[common], help="Train a characterizer, cache model or baseline")
    t.add_argument("--kind", choices=["characterizer", "cache-model", "baseline"], required=True)
    t.add_argument("--method", choices=[m.value for m in Method] + ["all"], default="twsd",
                   help="Baseline summary; `all` also trains the recurrent characterizer and compares")
    t.add_argument("--trace", type=Path, nargs="+", default=[], help="Category-tagged traces (characterizer/baseline)")
    t.add_argument("--labeled", type=Path, default=None, help="Labeled trace (cache-model)")
    t.add_argument("--epochs", type=int, default=None)
    t.add_argument("--hidden", type=int, default=None)
    t.add_argument("--layers", type=int, default=None)
    t.add_argument("--batch-size", type=int, default=None)
    t.add_argument("--lr", type=float, default=None)
    t.add_argument("--out", type=Path, default=None, help="Model file (.npz)")

    for name, helptext in (("simulate", "Run one policy"), ("compare", "Run several policies")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--trace", type=Path, default=None)
        if name == "simulate":
            s.add_argument("--policy", default=None)
        else:
            s.add_argument("--policies", nargs="+", default=None)
        s.add_argument("--out", type=Path, default=None, help="Report directory")

    r = sub.add_parser("report", parents=[common], help="Plot window series and print summaries")
    r.add_argument("reports", type=Path, nargs="+", help="Report directories")
    r.add_argument("--save", type=Path, default=Path("results/plots"))
    return ap


# ---------- helpers ----------

def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.capacity is not None:
        cfg.capacity_pages = args.capacity
    return cfg


def _capacity(cfg: RunConfig, args, trace: Trace) -> int:
    if cfg.capacity_pages is not None:
        return cfg.capacity_pages
    cap = capacity_for_working_set(trace, args.capacity_fraction or DEFAULT_FRACTION)
    logger.info("capacity %d pages from working set", cap)
    return cap


def _need(path: Optional[Path], field: str) -> Path:
    if path is None:
        raise ConfigError("path required", field)
    return path


def _registry(cfg: RunConfig) -> ModelRegistry:
    m = cfg.models
    return ModelRegistry(
        characterizer=load_model(m.characterizer) if m.characterizer else None,
        cache=load_model(m.cache) if m.cache else None,
        per_category={c: load_model(p) for c, p in m.per_category.items()},
    )


# ---------- commands ----------

def cmd_gen(args, cfg: RunConfig) -> None:
    if args.n < 1:
        raise ConfigError("must be ≥ 1", "-n")
    if args.category is not None:
        trace = generate_synthetic(category_profile(args.category, seed=cfg.seed), args.n)
    elif args.profile is not None:
        trace = generate_synthetic(profile_for_trace(args.profile, seed=cfg.seed), args.n)
    elif args.scenario is not None:
        trace = generate_scenario(args.scenario, args.n, seed=cfg.seed, chunk=args.chunk)
    else:
        trace = concatenate([
            generate_synthetic(category_profile(c, seed=cfg.seed + k), args.n)
            for k, c in enumerate(args.concat)
        ])
    write_trace(trace, args.out)
    print(f"Wrote {args.out} ({len(trace)} requests)")


def cmd_label(args, cfg: RunConfig) -> None:
    trace_path = _need(args.trace or cfg.paths.trace, "paths.trace")
    out = _need(args.out or cfg.paths.labeled, "paths.labeled")
    validate_config(cfg)
    trace = parse_trace(trace_path)
    cap = _capacity(cfg, args, trace)
    labeled = oracle_replay(trace, cap, aggregate_page_stats(trace, cfg.device))
    write_labeled(labeled, out, trace)
    cached, dur = majority_baseline(labeled)
    print(f"Wrote {out} ({len(labeled)} rows, capacity {cap} pages)")
    print(f"cached fraction {sum(r.cached for r in labeled) / len(labeled):.4f}; "
          f"majority baseline cached {cached:.4f}, duration {dur:.4f}")


def cmd_train(args, cfg: RunConfig) -> None:
    ts = cfg.train
    if args.epochs is not None:
        ts.epochs = args.epochs
    if args.hidden is not None:
        ts.hidden = args.hidden
    if args.layers is not None:
        ts.layers = args.layers
    if args.batch_size is not None:
        ts.batch_size = args.batch_size
    if args.lr is not None:
        ts.learning_rate = args.lr
    validate_config(cfg)
    tc = ts.train_config(cfg.seed)

    if args.kind == "baseline":
        traces = [parse_trace(p) for p in _traces(args, cfg)]
        if args.method == "all":
            scores = evaluate_characterizers(traces, tc, ts.window, ts.hidden or CHAR_HIDDEN, ts.layers or CHAR_LAYERS)
            for name, acc in scores.items():
                print(f"{name}: held-out acc {acc:.4f}")
            return
        _, train_acc, held_acc = train_baseline(Method(args.method), traces, tc, ts.window)
        print(f"{args.method} baseline: train acc {train_acc:.4f}, held-out acc {held_acc:.4f}")
        return

    out = _need(args.out, "--out")
    if args.kind == "characterizer":
        traces = [parse_trace(p) for p in _traces(args, cfg)]
        result = train_characterizer(traces, tc, ts.hidden or CHAR_HIDDEN, ts.layers or CHAR_LAYERS, ts.window)
    else:
        labeled = parse_labeled(_need(args.labeled or cfg.paths.labeled, "paths.labeled"))
        result = train_cache_model(labeled, tc, ts.hidden or CACHE_HIDDEN, ts.layers or CACHE_LAYERS, ts.window)

    save_model(result.model, out)
    hist = out.with_suffix(".history.csv")
    result.history.write_csv(hist)
    print(f"Wrote {out} ({args.kind}, {len(result.history)} epochs); history {hist}")
    print(f"train acc {_fmt(result.train_accuracy)}; held-out acc {_fmt(result.held_accuracy)}")

    if args.kind == "cache-model" and result.held_accuracy:
        base_c, base_d = majority_baseline(labeled)
        acc_c, acc_d = result.held_accuracy
        try:
            imp = improvement_metric(acc_c, acc_d, base_c, base_d)
            print(f"baseline cached {base_c:.4f}, duration {base_d:.4f}; improvement {imp}%")
        except (ValueError, ZeroDivisionError) as e:
            print(f"improvement not computable: {e}")


def _traces(args, cfg: RunConfig) -> List[Path]:
    paths = list(args.trace) or ([cfg.paths.trace] if cfg.paths.trace else [])
    if not paths:
        raise ConfigError("at least one trace required", "paths.trace")
    return paths


def _fmt(acc) -> str:
    if acc is None:
        return "n/a"
    return ", ".join(f"{a:.4f}" for a in acc)


def cmd_simulate(args, cfg: RunConfig) -> None:
    if getattr(args, "policy", None):
        cfg.policies = [args.policy]
    if getattr(args, "policies", None):
        cfg.policies = list(args.policies)
    if args.cmd == "simulate" and len(cfg.policies) != 1:
        raise ConfigError("simulate runs exactly one policy (use compare)", "policies")
    if args.trace:
        cfg.paths.trace = args.trace
    if args.out:
        cfg.paths.reports = args.out
    trace_path = _need(cfg.paths.trace, "paths.trace")
    validate_config(cfg)

    trace = parse_trace(trace_path)
    cap = _capacity(cfg, args, trace)
    sim = cfg.simulate
    report = compare_report(
        trace, cap, cfg.policies, models=_registry(cfg), device=cfg.device,
        config={"seed": cfg.seed, "trace": str(trace_path)},
        seed=cfg.seed, monitor_every=sim.monitor_every,
        inference_overhead_ms=sim.inference_overhead_ms, one_shot_demotion=sim.one_shot_demotion,
    )
    written = report.write(cfg.paths.reports, window_series=sim.window_series)
    _print_summary(report)
    for p in written:
        print(f"Wrote {p}")


def _print_summary(report: SimulationReport) -> None:
    cols = ["policy", "hit_ratio", "normalized_hit_ratio", "replacements_per_100",
            "ssd_writes_per_100", "mean_latency_ms"]
    print(report.table()[cols].to_string(index=False, float_format=lambda v: f"{v:.4f}"))


def cmd_report(args, cfg: RunConfig) -> None:
    series = []
    for d in args.reports:
        summary = d / "summary.csv"
        if summary.exists():
            print(f"== {d}")
            print(pd.read_csv(summary).to_string(index=False))
        if (d / "window_series.csv").exists():
            series.append(d / "window_series.csv")
    if not series:
        raise ValueError("no window_series.csv found in the given report directories")
    render(series, args.save)


COMMANDS = {
    "gen": cmd_gen,
    "label": cmd_label,
    "train": cmd_train,
    "simulate": cmd_simulate,
    "compare": cmd_simulate,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.cmd](args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
