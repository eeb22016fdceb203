"""EcNet command-line entry point: python -m src.main <command> [flags]."""

import argparse
import logging
import sys

from pydantic import ValidationError

from src.commands import ablate, evaluate, gradcheck, ingest, train
from src.config import get_settings
from src.errors import EcNetError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

COMMANDS = (ingest, train, evaluate, ablate, gradcheck)


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def configure_logging(level: str | None = None) -> None:
    """Install the root handler. Level defaults to ECNET_LOG_LEVEL."""
    logging.basicConfig(
        level=(level or get_settings().LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="ecnet", description="IoT flow anomaly detection with EcNet")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: ECNET_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    for command in COMMANDS:
        command.add_parser(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run one command and return its exit code.

    0 success, 1 usage error, 2 data error, 3 numeric failure.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except ValidationError as e:
        print(f"error: invalid configuration\n{e}", file=sys.stderr)
        return EXIT_USAGE
    except EcNetError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
