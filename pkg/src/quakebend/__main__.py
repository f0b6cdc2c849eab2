import argparse
import logging
import sys
from typing import Sequence

from rich.logging import RichHandler

from quakebend import __version__
from quakebend.app import COMMANDS, QuakebendApp
from quakebend.config import RunConfig, apply_overrides, load_config
from quakebend.errors import QuakebendError

logger = logging.getLogger("quakebend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quakebend",
        description="Twist, bend and earthquake deformations of surface group representations.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="PATH", help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="overrides seed")
    parser.add_argument("--out", metavar="DIR", help="overrides output.dir")
    parser.add_argument("--tol", type=float, help="overrides earthquake.tol")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def configure_logging(verbose: bool) -> None:
    logger.handlers.clear()
    logger.addHandler(RichHandler(show_path=False, rich_tracebacks=False))
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    logger.propagate = False


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = apply_overrides(cfg, seed=args.seed, out=args.out, tol=args.tol)
        return QuakebendApp(cfg).run(args.command)
    except QuakebendError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


def cli():
    sys.exit(main())


if __name__ == "__main__":
    cli()
