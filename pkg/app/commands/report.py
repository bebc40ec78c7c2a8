import json
import logging
from argparse import Namespace

from app.schemas.cli import ExitStatus
from app.schemas.trace import RunMetrics
from app.services.sim_harness import TraceFormatError, compute_metrics, read_trace
from app.utils.sanitize import sanitize_json


def handle_report(args: Namespace) -> ExitStatus:
    """Recomputes the metrics of a recorded trace, optionally checking a metrics file."""
    try:
        events = read_trace(args.trace)
    except OSError as e:
        logging.error(f"Cannot read trace {args.trace}: {e}")
        return ExitStatus.RUNTIME_FAILURE
    except TraceFormatError as e:
        print(f"{args.trace}:{e.line}: {e}")
        return ExitStatus.RUNTIME_FAILURE

    metrics = compute_metrics(events)
    print(json.dumps(sanitize_json(metrics), indent=2))

    if args.metrics:
        try:
            with open(args.metrics, encoding="utf-8") as f:
                recorded = RunMetrics.model_validate_json(f.read())
        except (OSError, ValueError) as e:
            logging.error(f"Cannot read metrics {args.metrics}: {e}")
            return ExitStatus.RUNTIME_FAILURE
        if recorded != metrics:
            print(f"MISMATCH: {args.metrics} differs from the metrics of {args.trace}")
            return ExitStatus.RUNTIME_FAILURE
        print(f"MATCH {args.metrics}")
    return ExitStatus.OK
