import json
import logging
from argparse import Namespace

from app.schemas.cli import ExitStatus
from app.schemas.trace import RunMetrics
from app.services.sim_harness import (
    ScenarioReferenceError,
    ScenarioSchemaError,
    load_scenario_file,
    run,
    write_trace,
)
from app.utils.config import Settings
from app.utils.errors import InvariantViolation, TrustZoneError
from app.utils.sanitize import sanitize_json


def write_metrics(path: str, metrics: RunMetrics) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(sanitize_json(metrics), f, indent=2)
        f.write("\n")


def summarize(metrics: RunMetrics) -> str:
    availability = f"{metrics.emergency_call_availability:.3f}"
    if metrics.vacuous_availability:
        availability += " (vacuous)"
    return (
        f"emergency_call_availability={availability} "
        f"audit_completeness={metrics.audit_completeness:.3f} "
        f"unauthorized_grants={metrics.unauthorized_grants} "
        f"forced_reauths={metrics.forced_reauths} "
        f"local_auth_successes={metrics.local_auth_successes} "
        f"transitions={metrics.transitions} "
        f"dropped_envelopes={metrics.dropped_envelopes}"
    )


def handle_run(args: Namespace) -> ExitStatus:
    """Runs a scenario and writes the trace and metrics files."""
    settings = Settings()
    try:
        scenario = load_scenario_file(args.scenario, settings)
    except OSError as e:
        logging.error(f"Cannot read scenario {args.scenario}: {e}")
        return ExitStatus.RUNTIME_FAILURE
    except ScenarioSchemaError as e:
        for line in e.diagnostics:
            print(line)
        return ExitStatus.INVALID_SCENARIO
    except ScenarioReferenceError as e:
        print(f"{args.scenario}: {e}")
        return ExitStatus.INVALID_SCENARIO

    until = args.until if args.until is not None else settings.default_until_ms
    try:
        result = run(scenario, args.seed, until, check_invariants=args.check_invariants)
    except InvariantViolation as e:
        logging.error(f"Invariant {e.name} violated at trace seq {e.seq}: {e.detail}")
        print(f"INVARIANT VIOLATION {e.name} at seq {e.seq}: {e.detail}")
        return ExitStatus.INVARIANT_VIOLATION
    except TrustZoneError as e:
        logging.error(f"Run failed: {e}", exc_info=True)
        return ExitStatus.RUNTIME_FAILURE

    try:
        if args.trace:
            write_trace(args.trace, result.trace)
        if args.metrics:
            write_metrics(args.metrics, result.metrics)
    except OSError as e:
        logging.error(f"Cannot write run output: {e}")
        return ExitStatus.RUNTIME_FAILURE

    print(summarize(result.metrics))
    return ExitStatus.OK
