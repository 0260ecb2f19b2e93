"""Command line entry point.

This module parses the command line, resolves the experiment configuration and
dispatches to one module of ``src.commands`` per subcommand. Exceptions are
mapped to exit codes: 2 for invalid input, 3 for numeric failures, 1 otherwise.
"""

import argparse
import sys
from typing import Callable, Optional, Sequence

from pydantic import ValidationError

from src.commands import evaluate, export_latent, gen, sweep, train
from src.commands.common import common_parser, load_config
from src.core.config import settings
from src.core.errors import InputValidationError, ProtoDivError
from src.core.utils import get_logger
from src.schemas.cli import CliConfig

logger = get_logger()

Handler = Callable[[argparse.Namespace, CliConfig], int]


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with every subcommand.

    Returns:
        argparse.ArgumentParser: The configured parser.
    """
    parser = argparse.ArgumentParser(
        prog="protodiv",
        description="Diversity-regularized prototype classification of "
        "rendered physiological waveforms.",
    )
    parser.add_argument("--version", action="version", version=settings.VERSION)
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [common_parser()]

    commands: list[tuple[str, str, Handler, Optional[Callable]]] = [
        ("gen", "generate a synthetic dataset", gen.run, None),
        ("train", "train one model", train.run, train.add_arguments),
        ("sweep", "sweep lambda_pd over seeds", sweep.run, sweep.add_arguments),
        ("eval", "evaluate a checkpoint", evaluate.run, evaluate.add_arguments),
        (
            "export-latent",
            "export a t-SNE map of latents and prototypes",
            export_latent.run,
            export_latent.add_arguments,
        ),
    ]
    for name, help_text, handler, add_arguments in commands:
        sub = subparsers.add_parser(name, help=help_text, parents=parents)
        if add_arguments is not None:
            add_arguments(sub)
        sub.set_defaults(handler=handler)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command.

    Args:
        argv: Arguments without the program name; defaults to ``sys.argv``.

    Returns:
        int: Process exit code.
    """
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        return args.handler(args, config)
    except ValidationError as e:
        logger.error("invalid configuration: %s", e)
        return InputValidationError.exit_code
    except ProtoDivError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


def main() -> None:
    """Console script entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
