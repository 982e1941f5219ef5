import os
import argparse
from typing import Optional
from dotenv import load_dotenv
from lmft.utils.errors import ValidationError
from lmft.utils.logging import DEFAULT_RETENTION_SIZE, logger, setup_logging

THREADS_ENV = "LMFT_THREADS"


def add_args(parser: argparse.ArgumentParser):
    """
    Adds the flags shared by every subcommand.
    """

    parser.add_argument(
        "--config",
        type=str,
        help="Experiment config JSON.",
        default=None,
    )

    parser.add_argument(
        "--out",
        type=str,
        help="Output path prefix (or file for synth).",
        default=None,
    )

    parser.add_argument(
        "--seed",
        type=int,
        help="RNG seed; overrides rng_seed of the config.",
        default=None,
    )

    parser.add_argument(
        "--threads",
        type=int,
        help=f"Worker threads for order-independent work (falls back to ${THREADS_ENV}, then CPU count).",
        default=None,
    )

    parser.add_argument(
        "--stride",
        type=int,
        help="Use every n-th sample as a query point.",
        default=None,
    )

    parser.add_argument(
        "--verbose",
        "-v",
        action="count",
        help="Repeat for more detail (-v debug, -vv trace).",
        default=0,
    )

    parser.add_argument(
        "--log_dir",
        type=str,
        help="Directory for a rotating events.log.",
        default=None,
    )

    parser.add_argument(
        "--events_retention_size",
        type=int,
        help="Maximum events.log size in bytes before rotation.",
        default=DEFAULT_RETENTION_SIZE,
    )


def add_kernel_args(parser: argparse.ArgumentParser):
    parser.add_argument("--kernel", type=str, help="Kernel family.", default=None)
    parser.add_argument("--h", type=float, help="Kernel bandwidth.", default=None)
    parser.add_argument("--k", type=int, help="Neighbour count of knn kernels.", default=None)
    parser.add_argument("--n", type=int, help="Order of the dirichlet kernel.", default=None)


def resolve_threads(requested: Optional[int], configured: Optional[int] = None) -> int:
    """--threads, then the config, then $LMFT_THREADS (a .env file is honoured), then CPU count."""
    if requested is not None:
        value = requested
    elif configured is not None:
        value = configured
    else:
        load_dotenv()
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                value = int(env)
            except ValueError:
                raise ValidationError(f"{THREADS_ENV} must be an integer, got '{env}'")
        else:
            value = os.cpu_count() or 1
    if value < 1:
        raise ValidationError(f"threads must be >= 1, got {value}")
    return int(value)


def check_config(args: argparse.Namespace):
    r"""Validates the shared flags and configures logging."""
    if args.stride is not None and args.stride < 1:
        raise ValidationError(f"--stride must be >= 1, got {args.stride}")
    log_dir = os.path.expanduser(args.log_dir) if args.log_dir else None
    setup_logging(args.verbose, log_dir, args.events_retention_size)
    logger.debug(f"arguments: {vars(args)}")
