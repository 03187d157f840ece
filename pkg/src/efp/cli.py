"""Command-line entry point wiring the modules into file-based pipelines.

Subcommands: ``simulate`` (spec -> XES), ``inject`` (XES -> XES with
faults), ``mine`` (XES -> model file), ``run`` (replay a log through the
event bus, emitting a prediction stream), and ``evaluate`` (rate/scenario
sweep, or metrics straight from confusion counts via ``--from-matrix``).
Every randomized subcommand takes an explicit ``--seed`` (falling back to
the ``EFP_SEED`` environment variable, then 0) and echoes the effective
seed; outputs are byte-identical across reruns with the same seed.
Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import DisconnectedSpec, EfpError, EmptyLog, SpecFormatError
from .evaluation import (
    ConfusionMatrix,
    PipelineConfig,
    metrics,
    plot_data,
    sweep,
    sweep_table,
)
from .events import Outcome, Scenario
from .model import mine_model, read_model, write_model
from .predictors import FrequencyModel
from .recurrent import RecurrentModel
from .runtime import Bus
from .synthesis import (
    FAULT_TYPES,
    default_fault_plan,
    default_spec,
    generate,
    inject_faults,
    read_spec,
)
from .traversal import TraversalLimits
from .xes import read_xes, write_xes

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _effective_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("EFP_SEED")
    return int(env) if env else 0


def _load_spec(value: str):
    if value == "default":
        return default_spec()
    return read_spec(Path(value).read_text(encoding="utf-8"))


def _limits(args) -> TraversalLimits:
    return TraversalLimits(
        max_depth=args.max_depth,
        max_breadth=args.max_breadth,
        min_probability=args.min_probability,
    )


def _add_limit_flags(parser) -> None:
    parser.add_argument("--max-depth", type=int, default=20,
                        help="traversal depth limit (default 20)")
    parser.add_argument("--max-breadth", type=int, default=5,
                        help="children expanded per node (default 5)")
    parser.add_argument("--min-probability", type=float, default=1e-4,
                        help="partial-path probability cutoff (default 1e-4)")


def cmd_simulate(args) -> int:
    seed = _effective_seed(args)
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    spec = replace(_load_spec(args.spec), seed=seed)
    traces = generate(spec, args.n)
    Path(args.out).write_bytes(write_xes(traces))
    print(f"seed {seed}")
    print(f"wrote {len(traces)} traces to {args.out}")
    return 0


def cmd_inject(args) -> int:
    seed = _effective_seed(args)
    if not 0.0 <= args.rate <= 1.0:
        raise UsageError("--rate must lie in [0, 1]")
    fault_types = tuple(args.fault_types.split(","))
    for ft in fault_types:
        if ft not in FAULT_TYPES:
            raise UsageError(f"unknown fault type {ft!r}")
    spec = _load_spec(args.spec)
    plan = default_fault_plan(spec, args.rate, fault_types)
    log = read_xes(Path(args.infile).read_bytes())
    injected = inject_faults(list(log.traces), plan, seed=seed)
    Path(args.out).write_bytes(write_xes(injected))
    failed = sum(1 for t in injected if t.outcome_label is Outcome.FAIL)
    print(f"seed {seed}")
    print(f"injected {failed}/{len(injected)} traces "
          f"(rate {args.rate:g}, types {','.join(fault_types)})")
    return 0


def cmd_mine(args) -> int:
    log = read_xes(Path(args.infile).read_bytes())
    model = mine_model(list(log.traces))
    Path(args.out).write_text(write_model(model), encoding="utf-8")
    print(f"mined {len(model.states)} states, {len(model.allowed)} edges "
          f"from {len(log.traces)} traces")
    return 0


def cmd_run(args) -> int:
    seed = _effective_seed(args)
    log = read_xes(Path(args.infile).read_bytes())
    traces = list(log.traces)
    catalog = log.catalog

    if args.model:
        model = read_model(Path(args.model).read_text(encoding="utf-8"))
    else:
        model = mine_model(traces)

    if args.classifier == "frequency":
        classifier = FrequencyModel(catalog, window=args.window, alpha=args.alpha)
    else:
        classifier = RecurrentModel(catalog, seed=seed)

    if args.train:
        train_log = read_xes(Path(args.train).read_bytes(), catalog)
        train_traces = list(train_log.traces)
        if isinstance(classifier, FrequencyModel):
            classifier.fit_bins(train_traces)
        classifier.train(train_traces)
    elif isinstance(classifier, FrequencyModel):
        classifier.fit_bins(traces)

    limits = _limits(args)
    bus = Bus()
    lines = []
    lead_times = []
    failures = 0
    for trace in traces:
        instance = bus.start_instance(
            trace.instance_id, classifier, model, limits
        )
        before = len(bus.prediction_queue)
        for event in trace.events:
            bus.publish(event)
        stream = bus.prediction_queue[before:]
        lines.extend(p.line() for p in stream)
        if args.report_paths and stream:
            lines.append("# paths at last event:")
            lines.extend(
                "# " + line
                for line in format_report_paths(stream[-1])
            )
        if instance.label is Outcome.FAIL:
            failures += 1
            detection = next(
                (p.at_event_index for p in stream if p.p_fail >= args.threshold),
                None,
            )
            if detection is not None:
                lead_times.append(stream[-1].at_event_index - detection)

    out_text = "\n".join(lines) + ("\n" if lines else "")
    summary = [f"# seed {seed}",
               f"# instances {len(traces)}, failures {failures}"]
    if lead_times:
        arr = np.array(lead_times)
        summary.append(
            f"# lead time: mean {arr.mean():.1f}, min {arr.min()}, "
            f"max {arr.max()}, detected {len(arr)}/{failures}"
        )
    out_text += "\n".join(summary) + "\n"
    if args.out:
        Path(args.out).write_text(out_text, encoding="utf-8")
    else:
        sys.stdout.write(out_text)
    return 0


def format_report_paths(prediction) -> list[str]:
    return [
        f"{'->'.join(p.suffix)} {p.probability:.3f} {p.outcome.value}"
        for p in prediction.top_paths
    ]


def cmd_evaluate(args) -> int:
    seed = _effective_seed(args)
    if args.from_matrix:
        parts = [float(x) for x in args.from_matrix.split(",")]
        if len(parts) != 4:
            raise UsageError("--from-matrix expects tp,fn,fp,tn")
        tp, fn, fp, tn = parts
        cm = ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn)
        precision, recall, mcc = metrics(cm)
        print(f"precision {precision:.3f}")
        print(f"recall {recall:.3f}")
        print(f"mcc {mcc:.3f}")
        print("note: metrics of a mean matrix can differ slightly from "
              "means of per-fold metrics; both summaries are valid")
        return 0

    spec = _load_spec(args.spec)
    rates = [float(r) for r in args.rate.split(",")]
    scenarios = [Scenario.parse(s) for s in args.scenario.split(",")]
    fault_types = tuple(args.fault_types.split(","))
    factory = None
    if args.classifier == "recurrent":
        factory = lambda catalog: RecurrentModel(catalog, seed=seed)
    config = PipelineConfig(
        limits=_limits(args),
        threshold=args.threshold,
        window=args.window,
        alpha=args.alpha,
        classifier_factory=factory,
    )
    cells = sweep(
        spec,
        lambda rate: default_fault_plan(spec, rate, fault_types),
        rates,
        scenarios,
        k=args.k,
        n_instances=args.n,
        config=config,
        seed=seed,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "results.tsv").write_text(sweep_table(cells), encoding="utf-8")
    for metric in ("precision", "recall", "mcc"):
        (out_dir / f"{metric}.tsv").write_text(
            plot_data(cells, metric), encoding="utf-8"
        )
    print(f"seed {seed}")
    print(f"wrote {len(cells)} reports to {out_dir}")
    for cell in cells:
        print(f"rate {cell.rate:g} scenario {cell.scenario}: "
              f"mcc {cell.report.mcc:.3f}")
    return 0


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efp",
        description="Event-based failure prediction for distributed "
        "business processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic collaboration log")
    p.add_argument("--spec", default="default",
                   help="spec file path or 'default' (bundled 6-partner chain)")
    p.add_argument("--n", type=int, required=True, help="number of instances")
    p.add_argument("--seed", type=int, default=None,
                   help="generation seed (default: EFP_SEED or 0)")
    p.add_argument("--out", required=True, help="output XES path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inject", help="inject faults into a log")
    p.add_argument("--in", dest="infile", required=True, help="input XES path")
    p.add_argument("--out", required=True, help="output XES path")
    p.add_argument("--rate", type=float, required=True,
                   help="per-trace fault injection probability")
    p.add_argument("--spec", default="default",
                   help="spec the log was generated from (for fault plans)")
    p.add_argument("--fault-types", default="step,event,data",
                   help="comma list from {step,event,data} (default all)")
    p.add_argument("--seed", type=int, default=None,
                   help="injection seed (default: EFP_SEED or 0)")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("mine", help="mine a directly-follows model")
    p.add_argument("--in", dest="infile", required=True, help="input XES path")
    p.add_argument("--out", required=True, help="output model path")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("run", help="replay a log and emit predictions")
    p.add_argument("--in", dest="infile", required=True, help="input XES path")
    p.add_argument("--model", default=None,
                   help="model file (default: mine from the input log)")
    p.add_argument("--train", default=None,
                   help="XES log to pre-train the classifier on")
    p.add_argument("--classifier", choices=("frequency", "recurrent"),
                   default="frequency")
    p.add_argument("--window", type=int, default=3,
                   help="frequency classifier history window (default 3)")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="frequency classifier smoothing (default 1.0)")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="failure classification threshold (default 0.5)")
    p.add_argument("--report-paths", action="store_true",
                   help="append the final traversal path report per instance")
    p.add_argument("--seed", type=int, default=None,
                   help="classifier init seed (default: EFP_SEED or 0)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evaluate",
                       help="rate/scenario sweep or --from-matrix metrics")
    p.add_argument("--from-matrix", default=None, metavar="TP,FN,FP,TN",
                   help="compute metrics from confusion counts and exit")
    p.add_argument("--spec", default="default",
                   help="spec file path or 'default'")
    p.add_argument("--n", type=int, default=600,
                   help="instances generated per rate (default 600)")
    p.add_argument("--rate", default="0.5",
                   help="comma list of fault rates (default 0.5)")
    p.add_argument("--scenario", default="global",
                   help="comma list: global,local:<partner>,nocontext,"
                   "nocontext-local:<partner>")
    p.add_argument("--fault-types", default="step,event,data",
                   help="comma list from {step,event,data}")
    p.add_argument("--k", type=int, default=3, help="folds (default 3)")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--classifier", choices=("frequency", "recurrent"),
                   default="frequency")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None,
                   help="pipeline seed (default: EFP_SEED or 0)")
    p.add_argument("--out", default="eval-out", help="output directory")
    _add_limit_flags(p)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (UsageError, SpecFormatError, EmptyLog, DisconnectedSpec,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (EfpError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
