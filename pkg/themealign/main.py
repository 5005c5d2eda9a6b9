"""
Command-line entry point

    themealign annotate|train|decode|eval|baseline|align-docs|export-lm|stats [flags]

Exit codes: 0 success, 1 pipeline error, 2 usage or validation error.
Results go to stdout, diagnostics to stderr.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from . import __version__
from .commands import COMMANDS
from .commands.common import config_from_args
from .core.logging import configure_logging
from .errors import ThemeAlignError

logger = logging.getLogger("themealign")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="themealign",
        description="Align thematically matching segments across comparable documents",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = config_from_args(args)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        print(f"themealign: invalid configuration: {e}", file=sys.stderr)
        return 2

    configure_logging(config.log_level, config.log_format)
    try:
        return args.func(config)
    except ThemeAlignError as e:
        logger.error("%s", e)
        return 1
    except (FileNotFoundError, ValidationError, ValueError) as e:
        logger.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
