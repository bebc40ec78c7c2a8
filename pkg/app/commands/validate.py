import logging
from argparse import Namespace

from app.schemas.cli import ExitStatus
from app.services.sim_harness import (
    ScenarioReferenceError,
    ScenarioSchemaError,
    load_scenario_file,
)


def handle_validate(args: Namespace) -> ExitStatus:
    """Checks a scenario file against the schema and its internal references."""
    try:
        scenario = load_scenario_file(args.scenario)
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

    print(
        f"OK {args.scenario}: {len(scenario.events)} events, "
        f"{len(scenario.subscribers)} subscribers, {len(scenario.lss)} in LSS"
    )
    return ExitStatus.OK
