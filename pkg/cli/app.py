"""
Entry point: builds the argument parser from the command modules and maps
library errors to exit codes.
"""
import argparse
import logging
import sys

from dotenv import load_dotenv

from mec import __version__, config
from mec.errors import InsufficientError, InvariantBreach

from cli.commands import basic, build, check, encode, params, render, sim, systems

logger = logging.getLogger(__name__)

COMMANDS = (params, build, check, encode, systems, sim, render, basic)

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_INSUFFICIENT = 3
EXIT_INVARIANT = 4


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='mec', description="Monotone erasure codes and dispersal")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)

    # Register command modules
    for module in COMMANDS:
        module.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    logging.basicConfig(level=config.log_level(), format="%(levelname)s %(name)s: %(message)s")
    args = create_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InsufficientError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except InvariantBreach as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as e:
        # JSONDecodeError is a ValueError
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == '__main__':
    sys.exit(main())
