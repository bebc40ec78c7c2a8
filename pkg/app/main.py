import argparse
import logging
import sys

from app.commands import handle_report, handle_run, handle_validate
from app.schemas.cli import ExitStatus
from app.utils.config import Settings

# Load configuration
settings = Settings()


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the runtime-failure code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(ExitStatus.RUNTIME_FAILURE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="tzsim",
        description="Trust Zone simulator: validate scenarios, run them, report metrics.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="check a scenario file")
    validate.add_argument("--scenario", required=True)
    validate.set_defaults(handler=handle_validate)

    run = commands.add_parser("run", help="run a scenario")
    run.add_argument("--scenario", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--until", type=int, default=None, help="horizon in ms")
    run.add_argument("--trace", default=None, help="trace output path")
    run.add_argument("--metrics", default=None, help="metrics output path")
    run.add_argument("--check-invariants", action="store_true")
    run.set_defaults(handler=handle_run)

    report = commands.add_parser("report", help="recompute metrics from a trace")
    report.add_argument("--trace", required=True)
    report.add_argument("--metrics", default=None, help="metrics file to compare against")
    report.set_defaults(handler=handle_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(levelname)s:     %(message)s",
    )
    args = build_parser().parse_args(argv)
    logging.debug(f"Environment: {settings.app_env}, command: {args.command}")
    try:
        return int(args.handler(args))
    except Exception as e:
        logging.error(f"Unhandled error in {args.command}: {type(e).__name__}: {e}", exc_info=True)
        return int(ExitStatus.RUNTIME_FAILURE)
