"""
dmnrlab command line.

    dmnrlab [-v] filter   --input f.bin --algo dmnr --out-mask f.mask
    dmnrlab [-v] evaluate --points-dir P --labels-dir L --noise-ids 110 --report r.json
    dmnrlab [-v] synth    --out-points s.bin --out-labels s.label
    dmnrlab [-v] export   --input f.bin --mask f.mask --out f.ply
    dmnrlab [-v] plot     --input f.bin --labels f.label --noise-ids 110 --out f.png

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from dmnrlab import __version__
from dmnrlab.config.loader import build_settings, coerce, read_key_values
from dmnrlab.io.datareader import WADS_SEQUENCES, input_files, pair_frames, wads_frames
from dmnrlab.io.exporter import FORMATS, PALETTES, write_colored
from dmnrlab.io.maskfile import read_mask, write_mask
from dmnrlab.io.pointfile import load_labels, load_points, write_labels, write_points
from dmnrlab.io.report import write_csv, write_report
from dmnrlab.io.synth import generate_synthetic, spec_from_mapping, synth_schema
from dmnrlab.kernel.errors import ConfigError, DmnrLabError, FrameError
from dmnrlab.kernel.evaluator import evaluate_dataset
from dmnrlab.kernel.registry import registry
from dmnrlab.math.statistics import noise_mask

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

logger = logging.getLogger("dmnrlab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here usage errors are 1."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ==========================================================
# ARGUMENTS
# ==========================================================

# (flag, config key, type)
PARAM_FLAGS = (
    ("--K", "K", int),
    ("--k1", "k1", float),
    ("--k2", "k2", float),
    ("--k3", "k3", float),
    ("--h", "h", int),
    ("--height-mode", "height_mode", str),
    ("--h1", "h1", float),
    ("--h2", "h2", float),
    ("--rescue-rank", "rescue_rank", str),
    ("--min-cluster-size", "min_cluster_size", int),
    ("--min-samples", "min_samples", int),
    ("--sor-k", "sor_k", int),
    ("--sor-alpha", "sor_alpha", float),
    ("--ror-radius", "ror_radius", float),
    ("--ror-min-neighbors", "ror_min_neighbors", int),
    ("--dror-alpha-deg", "dror_alpha_deg", float),
    ("--dror-beta", "dror_beta", float),
    ("--dror-min-radius", "dror_min_radius", float),
    ("--dror-min-neighbors", "dror_min_neighbors", int),
)

HEIGHT_FLAGS = ("height_mode", "h1", "h2")

# (flag, SynthSpec field, type)
SYNTH_FLAGS = (
    ("--n-points", "n_points", int),
    ("--seed", "seed", int),
    ("--ground-extent", "ground_extent", float),
    ("--clutter-fraction", "clutter_fraction", float),
    ("--clutter-min-range", "clutter_min_range", float),
    ("--clutter-max-range", "clutter_max_range", float),
    ("--clutter-intensity-max", "clutter_intensity_max", float),
)


def _add_param_flags(p, keys=None):
    g = p.add_argument_group("filter parameters (override --config)")
    for flag, key, typ in PARAM_FLAGS:
        if keys is None or key in keys:
            g.add_argument(flag, dest=key, type=typ, default=None, metavar=key.upper())
    p.add_argument("--config", default=None, help="key = value parameter file")
    p.add_argument("--intensity-scale", dest="intensity_scale", type=float, default=None)


def _algo_flag(p):
    p.add_argument(
        "--algo", default="dmnr", choices=registry.names(),
        help="filter to run (default: dmnr)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmnrlab", description="LiDAR airborne-noise filtering and evaluation")
    parser.add_argument("--version", action="version", version=f"dmnrlab {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True

    p = sub.add_parser("filter", help="filter one frame or a directory of frames")
    p.add_argument("--input", required=True, help=".bin file or directory")
    _algo_flag(p)
    _add_param_flags(p)
    p.add_argument("--out-mask", default=None, help="mask file (single input)")
    p.add_argument("--out-dir", default=None, help="directory for <frame>.mask files")
    p.add_argument("--out-ply", default=None, help="colored PLY (single input)")
    p.add_argument("--ply-format", choices=FORMATS, default="binary")
    p.add_argument("--palette", choices=PALETTES, default="verdict")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("evaluate", help="score a filter against labelled frames")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--points-dir", default=None)
    src.add_argument("--wads-root", default=None)
    p.add_argument("--labels-dir", default=None)
    p.add_argument("--sequences", nargs="+", default=None)
    p.add_argument("--noise-ids", dest="noise_ids", default=None, help="e.g. 110,111")
    p.add_argument("--report", required=True, help="JSON report path")
    p.add_argument("--csv", default=None, help="CSV table path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true", help="include runtimes in the report")
    _algo_flag(p)
    _add_param_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic labelled frame")
    p.add_argument("--config", default=None, help="key = value scene file")
    for flag, key, typ in SYNTH_FLAGS:
        p.add_argument(flag, dest=key, type=typ, default=None)
    p.add_argument("--high-intensity-clutter", dest="high_intensity_clutter", action="store_true", default=None)
    p.add_argument("--no-walls", dest="no_walls", action="store_true")
    p.add_argument("--out-points", required=True)
    p.add_argument("--out-labels", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("export", help="color a frame by a saved partition")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=FORMATS, default="binary")
    p.add_argument("--palette", choices=PALETTES, default="verdict")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("plot", help="height vs. range figure")
    p.add_argument("--input", required=True)
    marks = p.add_mutually_exclusive_group()
    marks.add_argument("--labels", default=None)
    marks.add_argument("--mask", default=None)
    p.add_argument("--noise-ids", dest="noise_ids", default=None)
    p.add_argument("--out", required=True)
    _add_param_flags(p, keys=HEIGHT_FLAGS)
    p.set_defaults(func=cmd_plot)

    return parser


def _overrides(args):
    keys = [key for _, key, _ in PARAM_FLAGS] + ["intensity_scale", "noise_ids"]
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _settings(args):
    s = build_settings(args.config, _overrides(args))
    logger.debug("settings: %s", s.echo())
    return s


# ==========================================================
# COMMANDS
# ==========================================================

def cmd_filter(args) -> int:
    settings = _settings(args)
    files = input_files(args.input)
    if len(files) != 1 and (args.out_mask or args.out_ply):
        raise UsageError("--out-mask/--out-ply take a single input file; use --out-dir for directories")
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    run = registry.get(args.algo).bind(settings)
    for path in files:
        cloud = load_points(path, settings.intensity_scale)
        part = run(cloud)
        print(f"{path.name}: algo={args.algo} N={len(cloud)} kept={part.n_kept} outliers={part.n_outlier}")
        if args.out_mask:
            write_mask(part, args.out_mask)
        if out_dir is not None:
            write_mask(part, out_dir / f"{path.stem}.mask")
        if args.out_ply:
            write_colored(cloud, part, args.out_ply, args.ply_format, args.palette)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    settings = _settings(args)
    if not settings.noise_ids:
        raise UsageError("evaluate needs --noise-ids (or noise_ids in --config)")

    if args.wads_root:
        sequences = args.sequences or WADS_SEQUENCES
        frames = wads_frames(args.wads_root, sequences, settings.intensity_scale)
        dataset = {"wads_root": str(args.wads_root), "sequences": [str(s) for s in sequences]}
    else:
        if not args.labels_dir:
            raise UsageError("--points-dir needs --labels-dir")
        frames = pair_frames(args.points_dir, args.labels_dir, intensity_scale=settings.intensity_scale)
        dataset = {"points_dir": str(args.points_dir), "labels_dir": str(args.labels_dir)}

    run = registry.get(args.algo).bind(settings)
    report = evaluate_dataset(
        frames, run, settings.noise_ids, workers=args.workers,
        metadata={"algorithm": args.algo, **dataset},
    )
    write_report(report, args.report, settings.echo(), runtime_fields=args.timings)
    if args.csv:
        write_csv(report, args.csv)

    print(
        f"{args.algo}: frames={report.n_frames} "
        f"precision={100 * report.precision:.2f} recall={100 * report.recall:.2f} "
        f"F1={100 * report.f1:.2f}"
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    schema = synth_schema()
    values = {}
    if args.config:
        values.update(coerce(read_key_values(args.config), schema, source=args.config))
    for _, key, _ in SYNTH_FLAGS:
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.high_intensity_clutter:
        values["high_intensity_clutter"] = True
    if args.no_walls:
        values["walls"] = ()

    spec = spec_from_mapping(values)
    cloud, noise = generate_synthetic(spec)
    write_points(cloud, args.out_points)
    if args.out_labels:
        write_labels(cloud.labels, args.out_labels)
    print(f"synth: N={len(cloud)} noise={int(noise.sum())} seed={spec.seed}")
    return EXIT_OK


def cmd_export(args) -> int:
    cloud = load_points(args.input)
    part = read_mask(args.mask, len(cloud))
    write_colored(cloud, part, args.out, args.format, args.palette)
    print(f"export: {args.out} kept={part.n_kept} outliers={part.n_outlier}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from dmnrlab.plotting.heights import plot_height_profile

    settings = _settings(args)
    cloud = load_points(args.input, settings.intensity_scale)
    flagged = None
    label = "noise"
    if args.labels:
        if not settings.noise_ids:
            raise UsageError("--labels needs --noise-ids")
        flagged = noise_mask(load_labels(args.labels, len(cloud)), settings.noise_ids)
    elif args.mask:
        flagged = read_mask(args.mask, len(cloud)).outlier
        label = "outlier"
    plot_height_profile(
        cloud, args.out, flagged=flagged, mode=settings.dmnr.height_mode,
        title=Path(args.input).name, flagged_label=label,
    )
    n_flagged = 0 if flagged is None else int(np.count_nonzero(flagged))
    print(f"plot: {args.out} N={len(cloud)} marked={n_flagged}")
    return EXIT_OK


# ==========================================================
# ENTRY
# ==========================================================

def _configure_logging(verbose: int):
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    _configure_logging(args.verbose)

    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"dmnrlab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"dmnrlab: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FrameError as e:
        print(f"dmnrlab: {e}", file=sys.stderr)
        return EXIT_DATA
    except DmnrLabError as e:
        print(f"dmnrlab: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"dmnrlab: I/O error: {e}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
