"""Command-line entry point: synth, run, plot and inspect subcommands."""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys
from pathlib import Path

from spaceprofiler import __version__
from spaceprofiler.config import OUT_DIR_ENV, load_config, save_config, with_overrides
from spaceprofiler.errors import SpaceProfilerError

log = logging.getLogger("spaceprofiler")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spaceprofiler",
        description="Profile outdoor public-space utilization from PoI sensor streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-q", "--quiet", action="store_true", help="errors only")
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset with planted clusters")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", type=Path, required=True, help="output directory")
    p_synth.add_argument("--noise-sd", type=float, default=0.05)
    p_synth.add_argument("--dropout", type=float, default=0.05)
    p_synth.add_argument("--span-start", type=dt.date.fromisoformat, default=dt.date(2017, 5, 1))
    p_synth.add_argument("--span-end", type=dt.date.fromisoformat, default=dt.date(2017, 12, 30))

    p_run = sub.add_parser("run", help="run the full pipeline from a config file")
    p_run.add_argument("--config", type=Path, required=True)
    p_run.add_argument("--out", type=Path, default=None,
                       help=f"output directory (overrides config and ${OUT_DIR_ENV})")
    p_run.add_argument("--min-valid-fraction", type=float, default=None,
                       help="override the validity threshold (default 0.10)")
    p_run.add_argument("--seed", type=int, default=None, help="override the k-means seed")
    p_run.add_argument("--no-plots", action="store_true",
                       help="skip SVG rendering (report and audit files only)")

    p_plot = sub.add_parser("plot", help="render SVG figures for a finished bundle")
    p_plot.add_argument("--out", type=Path, required=True, help="bundle directory")

    p_inspect = sub.add_parser("inspect", help="print an intermediate matrix from a bundle")
    p_inspect.add_argument("--out", type=Path, required=True, help="bundle directory")
    p_inspect.add_argument("--name", default=None,
                           help="artifact name, e.g. weekday/affinity (omit to list)")
    return parser


def _cmd_synth(args) -> int:
    from spaceprofiler.synth import paper_fixture
    from spaceprofiler.config import PipelineConfig

    dataset = paper_fixture(
        seed=args.seed,
        noise_sd=args.noise_sd,
        dropout=args.dropout,
        span=(args.span_start, args.span_end),
    )
    paths = dataset.write(args.out)
    cfg = PipelineConfig(
        readings_path=paths["readings"],
        static_path=paths["static"],
        calendar_path=paths["calendar"],
        out_dir=Path(args.out) / "out",
        kmeans_seed=args.seed,
    )
    config_path = Path(args.out) / "config.toml"
    save_config(config_path, cfg)
    log.info("wrote %d sensors to %s", len(dataset.series), args.out)
    print(config_path)
    return 0


def _cmd_run(args) -> int:
    from spaceprofiler.pipeline import run_pipeline
    from spaceprofiler.plots import emit_plots

    cfg = load_config(args.config, out_dir_override=args.out)
    cfg = with_overrides(cfg, min_valid_fraction=args.min_valid_fraction, seed=args.seed)
    bundle = run_pipeline(cfg)
    log.info(
        "clustered %d sensors; k = %s",
        len(bundle.verdicts),
        {t.value: m.k for t, m in bundle.models.items()},
    )
    if not args.no_plots:
        emit_plots(cfg.out_dir)
    print(bundle.out_dir / "report.json")
    return 0


def _cmd_plot(args) -> int:
    from spaceprofiler.plots import emit_plots

    for path in emit_plots(args.out):
        print(path)
    return 0


def _iter_artifacts(out_dir: Path):
    for path in sorted(out_dir.rglob("*.csv")) + sorted(out_dir.rglob("*.json")):
        yield path.relative_to(out_dir).with_suffix("").as_posix(), path


def _cmd_inspect(args) -> int:
    out_dir = Path(args.out)
    if not out_dir.is_dir():
        raise SpaceProfilerError(f"bundle directory not found: {out_dir}")
    artifacts = dict(_iter_artifacts(out_dir))
    if args.name is None:
        for name in artifacts:
            print(name)
        return 0
    name = args.name.replace("\\", "/")
    if name not in artifacts:
        matches = [n for n in artifacts if n.endswith(name)]
        if len(matches) != 1:
            raise SpaceProfilerError(
                f"unknown artifact {args.name!r}; candidates: {matches or sorted(artifacts)}"
            )
        name = matches[0]
    sys.stdout.write(artifacts[name].read_text())
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "run": _cmd_run,
    "plot": _cmd_plot,
    "inspect": _cmd_inspect,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.ERROR if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except SpaceProfilerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
