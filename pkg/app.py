"""
Host Profiler Application
Drift-aware host profiling from the command line.
"""

import sys
import logging
import argparse

from typing import Any, Dict, List, Optional

from profiler.base import BaseRun
from profiler.config import PIPELINE_KEYS, STREAM_KEYS
from profiler.config import build_pipeline_config, build_stream_spec
from profiler.runs import EvalRun, GenerateEventsRun, GenerateRun, NmfBenchRun, ProfileRun

logger: logging.RootLogger = logging.getLogger(__name__)


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    """
    Profiling parameters, named after the algorithm symbols.
    """
    parser.add_argument("--preset", default="default", help="synthetic, eventlog or default")
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--nf", type=int, help="latent features (N_f)")
    parser.add_argument("--thc", type=float, help="PHT alarm threshold (Th_c)")
    parser.add_argument("--thd", type=float, help="changed hosts for a drift (Th_d), count or fraction")
    parser.add_argument("--delta", type=float, help="PHT magnitude tolerance")
    parser.add_argument("--lambda-decay", type=float, help="DenStream decay rate")
    parser.add_argument("--epsilon", type=float, help="DenStream radius threshold")
    parser.add_argument("--beta", type=float, help="DenStream potential factor")
    parser.add_argument("--mu", type=float, help="DenStream core weight")
    parser.add_argument("--offline-eps", type=float)
    parser.add_argument("--offline-min-weight", type=float)
    parser.add_argument("--nmf-iterations", type=int)
    parser.add_argument("--nmf-tolerance", type=float)
    parser.add_argument("--warm-start", choices=["true", "false"])
    parser.add_argument("--pruning", choices=["true", "false"])
    parser.add_argument("--roster", choices=["first-interval", "all-intervals"])
    parser.add_argument("--cluster-every", type=int)
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    """
    One subcommand per run.
    """
    parser: argparse.ArgumentParser = argparse.ArgumentParser(prog="app.py", description=__doc__)
    parser.add_argument("--debug", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    # Latent stream generator.
    generate: argparse.ArgumentParser = commands.add_parser("generate", help="synthesize a drifted latent stream")
    generate.add_argument("--output", required=True)
    generate.add_argument("--preset", default="default", help="synthetic or default")
    generate.add_argument("--config", help="key=value configuration file")
    generate.add_argument("--drift-type", choices=["abrupt", "gradual", "incremental"])
    generate.add_argument("--dd", type=int, help="drift duration (D_d)")
    generate.add_argument("--md", type=float, help="drift magnitude (M_d)")
    generate.add_argument("--pd", type=float, help="drift precision (P_d)")
    generate.add_argument("--cb", type=int, help="clusters before the drift (C_b)")
    generate.add_argument("--ca", type=int, help="clusters after the drift (C_a)")
    generate.add_argument("--nf", type=int, help="latent features (N_f)")
    generate.add_argument("--si", type=int, help="hosts per instance (S_i)")
    generate.add_argument("--nb", type=int, help="instances before the drift (N_b)")
    generate.add_argument("--total", type=int, help="instances in the stream")
    generate.add_argument("--seed", type=int)
    generate.add_argument("--js-samples", type=int)
    generate.add_argument("--max-attempts", type=int)
    generate.add_argument("--screen-samples", type=int, help="rough distance estimate first, 0 disables")
    generate.add_argument("--mean-low", type=float)
    generate.add_argument("--mean-high", type=float)
    generate.add_argument("--sigma-low", type=float)
    generate.add_argument("--sigma-high", type=float)
    generate.add_argument("--min-separation", type=float, help="minimum distance between component means")
    generate.add_argument("--sticky-hosts", choices=["true", "false"])
    generate.add_argument("--host-persistence", type=float, help="weight of the fixed per-host position")
    generate.add_argument("--spike-at", type=int, help="instance receiving a one-off shift")
    generate.add_argument("--spike-shift", type=float, default=5.0)
    generate.add_argument("--spike-hosts", type=int, default=60)

    # Event log generator.
    events: argparse.ArgumentParser = commands.add_parser("generate-events", help="synthesize an event log")
    events.add_argument("--output", required=True)
    events.add_argument("--hosts", type=int)
    events.add_argument("--processes", type=int)
    events.add_argument("--categories", type=int)
    events.add_argument("--days", type=int)
    events.add_argument("--change-day", type=int)
    events.add_argument("--change-fraction", type=float)
    events.add_argument("--rate", type=float)
    events.add_argument("--seed", type=int)

    # Profiling.
    profile: argparse.ArgumentParser = commands.add_parser("profile", help="profile an event log or a stream")
    sources = profile.add_mutually_exclusive_group(required=True)
    sources.add_argument("--events", help="event log")
    sources.add_argument("--stream", help="latent stream CSV")
    profile.add_argument("--output", required=True, help="interval reports CSV")
    profile.add_argument("--snapshot", help="final clusters CSV")
    profile.add_argument("--assignments", help="per-host cluster CSV")
    _add_pipeline_flags(profile)

    # Experiment.
    evaluate: argparse.ArgumentParser = commands.add_parser("eval", help="drift-aware run against the baseline")
    evaluate.add_argument("--stream", required=True)
    evaluate.add_argument("--output", required=True, help="timeline CSV")
    evaluate.add_argument("--plots", help="prefix of the SVG figures")
    _add_pipeline_flags(evaluate)

    # Factorization benchmark.
    bench: argparse.ArgumentParser = commands.add_parser("nmf-bench", help="NMF error and runtime per rank")
    bench.add_argument("--output", required=True)
    bench.add_argument("--ranks", type=int, nargs="+")
    bench.add_argument("--events", help="event log; a seeded random matrix otherwise")
    bench.add_argument("--interval", type=int, default=0)
    bench.add_argument("--rows", type=int, default=200)
    bench.add_argument("--columns", type=int, default=500)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--nmf-iterations", type=int, default=200)
    bench.add_argument("--nmf-tolerance", type=float, default=1e-4)
    return parser


def _overrides(args: argparse.Namespace, keys: Dict[str, str]) -> Dict[str, Any]:
    """
    Flags that were given and belong to a configuration record.
    """
    values: Dict[str, Any] = {}
    for key in keys:
        value: Any = getattr(args, key, None)
        if value is not None:
            values[key] = value
    return values


def build_run(args: argparse.Namespace) -> BaseRun:
    """
    Maps parsed arguments to a run.
    """
    if args.command == "generate":
        spike: Optional[tuple] = None
        if args.spike_at is not None:
            spike = (args.spike_at, args.spike_shift, args.spike_hosts)
        return GenerateRun(
            spec=build_stream_spec(args.preset, args.config, _overrides(args, STREAM_KEYS)),
            output=args.output,
            spike=spike,
        )
    if args.command == "generate-events":
        return GenerateEventsRun(
            output=args.output,
            n_hosts=args.hosts,
            n_processes=args.processes,
            n_categories=args.categories,
            n_days=args.days,
            change_day=args.change_day,
            change_fraction=args.change_fraction,
            rate=args.rate,
            seed=args.seed,
        )
    if args.command == "profile":
        return ProfileRun(
            config=build_pipeline_config(args.preset, args.config, _overrides(args, PIPELINE_KEYS)),
            output=args.output,
            events=args.events,
            stream=args.stream,
            snapshot=args.snapshot,
            assignments=args.assignments,
        )
    if args.command == "eval":
        return EvalRun(
            config=build_pipeline_config(args.preset, args.config, _overrides(args, PIPELINE_KEYS)),
            stream=args.stream,
            output=args.output,
            plots=args.plots,
        )
    if args.command == "nmf-bench":
        return NmfBenchRun(
            output=args.output,
            ranks=args.ranks,
            events=args.events,
            interval=args.interval,
            rows=args.rows,
            columns=args.columns,
            seed=args.seed,
            max_iterations=args.nmf_iterations,
            tolerance=args.nmf_tolerance,
        )
    raise AttributeError(f"Unknown command: '{args.command}'")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point. Returns the process exit code.
    """
    args: argparse.Namespace = build_parser().parse_args(argv)

    # Setting logging configuration.
    logging.basicConfig(
        stream=sys.stdout,
        level=logging.DEBUG if args.debug else logging.INFO,
        format='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
    )
    logger.info("Starting run: %s", args.command)

    try:
        run: BaseRun = build_run(args)
        run.load()
        run.execute()
        run.export()
    except (ValueError, KeyError, AttributeError, RuntimeError, OSError) as error:
        logger.error("Run failed: %s", error)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
