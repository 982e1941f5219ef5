import sys
import json
import argparse
from typing import List, Optional
from lmft import __version__
from lmft.gpr import run_oracle_suite
from lmft.io import load_config, read_csv, write_csv, write_json
from lmft.io.config import ExperimentConfig, KernelConfig
from lmft.kernels import KernelSpec
from lmft.pipeline import TimeSeries, loess, nw_smooth, seed_demo
from lmft.runner import RunArtifacts, load_corpus, load_series, run, write_corpus
from lmft.synth import GeneratorSpec, GeneratorKind, generate
from lmft.utils import constants as CONST
from lmft.utils.color import Palette
from lmft.utils.config import add_args, add_kernel_args, check_config, resolve_threads
from lmft.utils.errors import LmftError, NumericalError, ValidationError
from lmft.utils.logging import logger


class _Parser(argparse.ArgumentParser):
    """Usage errors become ValidationError so they share the JSON error path and exit code 1."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _require(value, flag: str):
    if value is None:
        raise ValidationError(f"{flag} is required")
    return value


def _config(args: argparse.Namespace, required: bool = True) -> Optional[ExperimentConfig]:
    if args.config is None:
        if required:
            raise ValidationError("--config is required")
        return None
    config = load_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["rng_seed"] = args.seed
    if getattr(args, "kernel", None) is not None:
        updates["kernel"] = _kernel_config(args)
    return config.model_copy(update=updates) if updates else config


def _kernel_config(args: argparse.Namespace) -> KernelConfig:
    return KernelConfig(family=args.kernel, h=args.h, k=args.k, n=args.n)


def _kernel(args: argparse.Namespace, config: Optional[ExperimentConfig]) -> KernelSpec:
    if args.kernel is not None:
        return _kernel_config(args).to_spec()
    if config is not None and config.smoothing is not None:
        return config.smoothing.kernel.to_spec()
    raise ValidationError("--kernel (or a config with a 'smoothing' section) is required")


def _print_json(data) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_synth(args: argparse.Namespace) -> int:
    out = _require(args.out, "--out")
    config = _config(args, required=False)
    if config is not None and config.data.is_corpus:
        train, test = load_corpus(config)
        written = write_corpus(train, test, out)
        logger.event(f"synth: {len(train)} train / {len(test)} test segments under {out}")
        _print_json({"written": written[-1]})
        return CONST.EXIT_OK
    if config is not None and config.data.generator is not None:
        series, _ = load_series(config)
        path = write_csv(series, out)
        logger.event(f"synth: {config.data.generator.kind} (rng_seed {config.rng_seed}) written to {path}")
        return CONST.EXIT_OK
    kind = GeneratorKind.try_parse(_require(args.kind, "--kind"))
    spec = GeneratorSpec(kind, args.seed or 0, args.length)
    path = write_csv(generate(spec), out)
    logger.event(f"synth: {spec.kind.value} (seed {spec.rng_seed}) written to {path}")
    return CONST.EXIT_OK


def _execute(args: argparse.Namespace) -> RunArtifacts:
    config = _config(args)
    if getattr(args, "input", None):
        config = config.model_copy(update={"data": config.data.model_copy(
            update={"path": args.input, "generator": None, "manifest": None})})
    threads = resolve_threads(args.threads, config.threads)
    artifacts = run(config, threads, args.stride, args.out)
    for path in artifacts.write():
        logger.info(f"wrote {path}")
    if "classification" in artifacts.metrics:
        _print_json(artifacts.metrics["classification"])
    logger.event(f"{args.command}: done, outputs under prefix {artifacts.prefix}")
    return artifacts


def cmd_run(args: argparse.Namespace) -> int:
    _execute(args)
    return CONST.EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    config = _config(args)
    if config.data.is_corpus and args.input is None:
        raise ValidationError("extract works on a single series; use 'classify' for a labeled corpus")
    return cmd_run(args)


def cmd_classify(args: argparse.Namespace) -> int:
    config = _config(args)
    if not config.data.is_corpus:
        raise ValidationError("classify needs a manifest or a labeled_segments generator in 'data'")
    palette = None
    if args.show_distances:
        palette = Palette.try_parse(args.palette or ("viridis" if sys.stderr.isatty() else "plain"))
    artifacts = _execute(args)
    if palette is not None:
        sys.stderr.write(artifacts.distance_table.render(palette))
    return CONST.EXIT_OK


def _cmd_smoother(args: argparse.Namespace, smoother) -> int:
    config = _config(args, required=False)
    series = read_csv(_require(args.input, "--input"))
    kernel = _kernel(args, config)
    queries = series.times[::args.stride or 1]
    smoothed = TimeSeries(queries, smoother(series.times, series.values, kernel, queries),
                          list(series.channel_names))
    path = write_csv(smoothed, _require(args.out, "--out"))
    logger.event(f"{args.command}: {series.n_channels} column(s) at {queries.size} queries written to {path}")
    return CONST.EXIT_OK


def cmd_smooth(args: argparse.Namespace) -> int:
    return _cmd_smoother(args, nw_smooth)


def cmd_loess(args: argparse.Namespace) -> int:
    return _cmd_smoother(args, loess)


def cmd_check_weights(args: argparse.Namespace) -> int:
    report = run_oracle_suite(args.instances, args.seed or 0,
                              corollary_instances=args.corollary_instances)
    data = report.to_dict()
    if args.out:
        write_json(data, args.out)
    _print_json(data)
    if not report.passed:
        logger.error(f"check-weights: {report.total_failures} failure(s): {report.failures}")
        return CONST.EXIT_NUMERICAL
    return CONST.EXIT_OK


def cmd_demo_seeds(args: argparse.Namespace) -> int:
    result = seed_demo(args.family, persistent=args.persistent)
    data = result.to_dict()
    if args.out:
        write_json(data, args.out)
    _print_json(data)
    return CONST.EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lmft",
        description="Local model feature transformations of time series with weighted GPR.",
        epilog="Example usage: lmft extract --config experiment.json --out results/run1 --threads 4",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)

    synth = subparsers.add_parser("synth", help="Write a synthetic benchmark series or corpus.")
    add_args(synth)
    synth.add_argument("--kind", type=str, default=None, help="variable_noise or variable_period.")
    synth.add_argument("--length", type=int, default=None, help="Number of samples.")
    synth.set_defaults(handler=cmd_synth)

    for name, handler, text in (
        ("extract", cmd_extract, "Fitted local parameters at every query time."),
        ("run", cmd_run, "Every stage the config asks for."),
    ):
        sub = subparsers.add_parser(name, help=text)
        add_args(sub)
        add_kernel_args(sub)
        sub.add_argument("--input", type=str, default=None, help="Series CSV; overrides data of the config.")
        sub.set_defaults(handler=handler)

    classify = subparsers.add_parser("classify", help="1NN + DTW over a labeled corpus.")
    add_args(classify)
    add_kernel_args(classify)
    classify.add_argument("--show-distances", action="store_true",
                          help="Write the test x train DTW distance table to stderr.")
    classify.add_argument("--palette", type=str, default=None,
                          help="viridis, greys or plain (default: viridis on a terminal, else plain).")
    classify.set_defaults(handler=cmd_classify)

    for name, handler, text in (
        ("smooth", cmd_smooth, "Nadaraya-Watson smoothing of every column of a CSV."),
        ("loess", cmd_loess, "Local linear smoothing of every column of a CSV."),
    ):
        sub = subparsers.add_parser(name, help=text)
        add_args(sub)
        add_kernel_args(sub)
        sub.add_argument("--input", type=str, default=None, help="Series or feature CSV.")
        sub.set_defaults(handler=handler)

    check = subparsers.add_parser("check-weights", help="Numerical check of the replication identities.")
    add_args(check)
    check.add_argument("--instances", type=int, default=CONST.ORACLE_INSTANCES)
    check.add_argument("--corollary-instances", type=int, default=CONST.COROLLARY_INSTANCES)
    check.set_defaults(handler=cmd_check_weights)

    demo = subparsers.add_parser("demo-seeds", help="Optimum tracking along a parameter sweep.")
    add_args(demo)
    demo.add_argument("--family", type=str, default="neighbor_quartic",
                      help="neighbor_quartic or fixed_quartic.")
    demo.add_argument("--persistent", action="store_true", help="Sweep where the tracked minimum persists.")
    demo.set_defaults(handler=cmd_demo_seeds)
    return parser


def _fail(e: LmftError, code: int) -> int:
    sys.stderr.write(json.dumps(e.to_dict(), sort_keys=True, default=str) + "\n")
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return CONST.EXIT_VALIDATION
        check_config(args)
        return args.handler(args)
    except NumericalError as e:
        logger.error(f"numerical failure: {e.message}")
        return _fail(e, CONST.EXIT_NUMERICAL)
    except LmftError as e:
        logger.error(f"invalid input: {e.message}")
        return _fail(e, CONST.EXIT_VALIDATION)


if __name__ == "__main__":
    sys.exit(main())
