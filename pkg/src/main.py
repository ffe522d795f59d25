"""Main entry point for flowlab.

Every experiment is a subcommand: spectrum, flow, perturb, train, epsilon.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import structlog

from src.cli.commands import COMMANDS
from src.cli.config import RUN_CONFIGS, Settings, build_run_config, get_settings
from src.cli.manifest import RunManifest
from src.framework.core.exceptions import ConfigError, FlowLabException
from src.utils.preset_loader import KeyValueSource, PresetLoader, read_key_values

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def configure_logging(log_level: str = "INFO", log_format: str = "console") -> None:
    """Configure structured logging.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR).
        log_format: Output format ('json' or 'console').
    """
    processors = [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.UnicodeDecoder(),
    ]

    if log_format == "json":
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=True))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    logging.basicConfig(
        format="%(message)s",
        level=getattr(logging, log_level.upper()),
        stream=sys.stderr,
    )


def _add_common(parser: argparse.ArgumentParser, kernel_help: str | None) -> None:
    parser.add_argument("--config", type=Path, default=None, help="Key-value run-config file")
    parser.add_argument("--preset", type=str, default=None, help="Preset name, e.g. stabilized")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--out-dir", type=Path, default=None, help="Output directory")
    parser.add_argument(
        "--svg", action=argparse.BooleanOptionalAction, default=None, help="Write SVG figures"
    )
    if kernel_help:
        parser.add_argument("--kernel", type=str, default=None, help=kernel_help)


def _add_xi_grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xi-min", type=float, default=None)
    parser.add_argument("--xi-max", type=float, default=None)
    parser.add_argument("--xi-points", type=int, default=None)
    parser.add_argument("--dim", type=int, default=None, help="Ambient dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowlab",
        description="Stability analysis of particle-based adversarial training",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Fourier verdicts of one kernel
  flowlab spectrum --kernel gaussian:sigma=2

  # Every reference row at once
  flowlab spectrum --table

  # Particle flow in the discriminator direction
  flowlab flow --kernel gaussian:sigma=1 --direction discriminator

  # Linearized growth of a stabilized pair
  flowlab perturb --preset stabilized --epsilon 0.5

  # Mixture experiment without the stabilizing term
  flowlab train --preset unstabilized --seed 3

  # Minimal stabilizing weight
  flowlab epsilon --base rgaussian:sigma=4 --stabilizer rgaussian:sigma=1
        """,
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    parser.add_argument(
        "--log-format",
        type=str,
        default=None,
        choices=["json", "console"],
        help="Logging format",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    spectrum = sub.add_parser("spectrum", help="Fourier transform, growth rates and verdicts")
    _add_common(spectrum, "Kernel, e.g. rq:alpha=2")
    _add_xi_grid(spectrum)
    spectrum.add_argument("--table", action="store_true", default=None, help="All reference rows")
    spectrum.add_argument("--c", type=float, default=None, help="Background constant C")
    spectrum.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None)
    spectrum.add_argument("--grid-points", type=int, default=None)
    spectrum.add_argument("--half-width", type=float, default=None)

    flow = sub.add_parser("flow", help="Explicit particle flow")
    _add_common(flow, "Kernel, e.g. gaussian:sigma=1")
    flow.add_argument("--direction", choices=["generator", "discriminator"], default=None)
    flow.add_argument("--dt", type=float, default=None)
    flow.add_argument("--steps", type=int, default=None)
    flow.add_argument("--record-every", type=int, default=None)
    flow.add_argument("--n-real", type=int, default=None)
    flow.add_argument("--n-gen", type=int, default=None)
    flow.add_argument("--dim", type=int, default=None)
    flow.add_argument("--frame-every", type=int, default=None)

    perturb = sub.add_parser("perturb", help="Linearized growth of grid perturbations")
    _add_common(perturb, "Kernel, e.g. rgaussian:sigma=4")
    perturb.add_argument("--stabilizer", type=str, default=None)
    perturb.add_argument("--epsilon", type=float, default=None)
    perturb.add_argument("--direction", choices=["generator", "discriminator"], default=None)
    perturb.add_argument("--c0", type=float, default=None, help="Background density C0")
    perturb.add_argument("--initial", choices=["noise", "single"], default=None)
    perturb.add_argument("--mode", type=int, default=None)
    perturb.add_argument("--grid-points", type=int, default=None)
    perturb.add_argument("--half-width", type=float, default=None)
    perturb.add_argument("--dt", type=float, default=None)
    perturb.add_argument("--steps", type=int, default=None)

    train = sub.add_parser("train", help="Mixture experiment")
    _add_common(train, "Discriminator loss kernel")
    train.add_argument("--stabilizer", type=str, default=None, help="Kernel, or 'none'")
    train.add_argument("--epsilon", type=float, default=None)
    train.add_argument("--epochs", type=int, default=None)
    train.add_argument("--batch-size", type=int, default=None)
    train.add_argument("--lr", type=float, default=None)
    train.add_argument("--n-critic", type=int, default=None)
    train.add_argument("--eval-every", type=int, default=None)
    train.add_argument("--checkpoints", action=argparse.BooleanOptionalAction, default=None)

    epsilon = sub.add_parser("epsilon", help="Minimal stabilizing weight")
    _add_common(epsilon, None)
    _add_xi_grid(epsilon)
    epsilon.add_argument("--base", type=str, default=None)
    epsilon.add_argument("--stabilizer", type=str, default=None)
    epsilon.add_argument("--probes", type=str, default=None, help="Comma-separated weights")

    return parser


_NOT_FIELDS = {"command", "config", "preset", "out_dir", "log_level", "log_format"}


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in _NOT_FIELDS and v is not None}


def _layers(args: argparse.Namespace, settings: Settings) -> list[KeyValueSource]:
    layers: list[KeyValueSource] = []
    if args.preset:
        try:
            layers.append(PresetLoader(settings.presets_path).load_named(args.command, args.preset))
        except FileNotFoundError as exc:
            raise ConfigError(str(exc), field="preset") from exc
    if args.config:
        try:
            layers.append(read_key_values(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", field="config") from exc
    return layers


def run(args: argparse.Namespace, settings: Settings) -> int:
    """Resolve the run config, execute the command and report."""
    out_dir = args.out_dir or settings.out_dir / args.command
    RunManifest.clear(out_dir)
    model = RUN_CONFIGS[args.command]
    cfg = build_run_config(
        model, _layers(args, settings), _overrides(args), defaults={"seed": settings.seed}
    )

    print("\n" + "=" * 60)
    print(f"  flowlab {args.command}")
    print("=" * 60)
    result = COMMANDS[args.command](cfg, out_dir)  # type: ignore[operator]
    for line in result.lines:
        print(f"  {line}")
    print(f"\n  Artifacts: {result.out_dir}")
    print(f"  Manifest:  {result.manifest_path}")
    print("=" * 60 + "\n")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    configure_logging(args.log_level or settings.log_level, args.log_format or settings.log_format)
    logger = structlog.get_logger(__name__)

    try:
        return run(args, settings)
    except FlowLabException as exc:
        hint = getattr(exc, "hint", None)
        logger.error("run_rejected", command=args.command, error=str(exc))
        message = str(exc)
        if hint and hint not in message:
            message += f" ({hint})"
        print(f"flowlab {args.command}: error: {message}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        logger.error("artifact_write_failed", command=args.command, error=str(exc))
        print(f"flowlab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
