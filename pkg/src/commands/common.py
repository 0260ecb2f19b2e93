"""Helpers shared by the command modules."""

import argparse
import json
from pathlib import Path
from typing import Any, Optional, Sequence

from src.core.config import settings
from src.core.errors import ParseError
from src.schemas.cli import CliConfig, CommandManifest

DATASET_DIR = "dataset"
RUNS_DIR = "runs"


def common_parser() -> argparse.ArgumentParser:
    """Flags accepted by every subcommand."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--out", type=Path, help="output root (default: config)")
    parser.add_argument(
        "--force", action="store_true", help="overwrite non-empty output directories"
    )
    parser.add_argument(
        "--lambda-pd",
        type=float,
        nargs="+",
        dest="lambda_pd",
        help="diversity penalty weight(s); train uses the first",
    )
    parser.add_argument("--prototypes", type=int, help="number of prototypes")
    parser.add_argument("--epochs", type=int, help="number of epochs")
    return parser


def _set(document: dict[str, Any], path: str, value: Any) -> None:
    *parents, leaf = path.split(".")
    for key in parents:
        document = document.setdefault(key, {})
    document[leaf] = value


def load_config(args: argparse.Namespace) -> CliConfig:
    """Read ``--config`` and apply flag overrides.

    Raises:
        ParseError: If the config file is missing or not JSON.
        pydantic.ValidationError: If the resolved config is invalid.
    """
    document: dict[str, Any] = {}
    if args.config is not None:
        try:
            document = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ParseError(f"{args.config}: no such file") from e
        except json.JSONDecodeError as e:
            raise ParseError(f"{args.config}: {e.msg}", line=e.lineno) from e
    seed = args.seed
    if seed is None and args.config is None:
        seed = settings.DEFAULT_SEED
    overrides: dict[str, Optional[Any]] = {
        "dataset.seed": seed,
        "train.seed": seed,
        "latent.seed": seed,
        "train.num_prototypes": args.prototypes,
        "train.epochs": args.epochs,
        "output_dir": str(args.out) if args.out is not None else None,
    }
    if args.lambda_pd:
        overrides["train.loss.lambda_pd"] = args.lambda_pd[0]
        overrides["train.lambda_pd_sweep"] = list(args.lambda_pd)
    for path, value in overrides.items():
        if value is not None:
            _set(document, path, value)
    return CliConfig.model_validate(document)


def resolve(out: Path, path: Optional[Path], default: str) -> Path:
    """Resolve an input path against the output root."""
    if path is None:
        return out / default
    return path if path.is_absolute() else out / path


def command_manifest(
    command: str,
    config: CliConfig,
    inputs: dict[str, str],
    artifacts: Sequence[str] = (),
) -> CommandManifest:
    """Describe a command invocation for the manifest next to its output."""
    return CommandManifest(
        command=command,
        tool_version=settings.VERSION,
        config=config.model_dump(mode="json", exclude={"output_dir"}),
        inputs=inputs,
        artifacts=list(artifacts),
    )
