import json
from pathlib import Path

import pytest

from app.main import main
from app.schemas.cli import ExitStatus
from app.schemas.state import TzState
from app.services.state_machine import next_state

SCENARIOS_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def scenario_file(tmp_path, canonical_document):
    path = tmp_path / "disconnection_day.json"
    path.write_text(canonical_document, encoding="utf-8")
    return str(path)


def test_validate_ok(scenario_file, capsys):
    assert main(["validate", "--scenario", scenario_file]) == ExitStatus.OK
    out = capsys.readouterr().out
    assert out.startswith(f"OK {scenario_file}: 15 events")


def test_validate_wrong_version(tmp_path, capsys):
    path = tmp_path / "v2.json"
    path.write_text('{\n  "version": 2\n}\n', encoding="utf-8")
    assert main(["validate", "--scenario", str(path)]) == ExitStatus.INVALID_SCENARIO
    assert f"{path}:2: version:" in capsys.readouterr().out


def test_validate_dangling_reference(tmp_path):
    path = tmp_path / "dangling.json"
    path.write_text(
        '{"version": 1, "events": [{"at": 1, "kind": "UeDetach", "ue_id": "a"}]}',
        encoding="utf-8",
    )
    assert main(["validate", "--scenario", str(path)]) == ExitStatus.INVALID_SCENARIO


def test_validate_missing_file(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert main(["validate", "--scenario", missing]) == ExitStatus.RUNTIME_FAILURE


def test_unknown_flag_is_runtime_failure(scenario_file):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", scenario_file, "--turbo"])
    assert exc.value.code == ExitStatus.RUNTIME_FAILURE


def test_run_then_report_matches(scenario_file, tmp_path, capsys):
    trace, metrics = str(tmp_path / "trace.jsonl"), str(tmp_path / "metrics.json")
    status = main(
        [
            "run",
            "--scenario",
            scenario_file,
            "--seed",
            "42",
            "--until",
            "120000",
            "--trace",
            trace,
            "--metrics",
            metrics,
            "--check-invariants",
        ]
    )
    assert status == ExitStatus.OK
    summary = capsys.readouterr().out
    assert "unauthorized_grants=0" in summary
    assert "forced_reauths=4" in summary

    assert main(["report", "--trace", trace, "--metrics", metrics]) == ExitStatus.OK
    assert f"MATCH {metrics}" in capsys.readouterr().out


def test_report_on_truncated_trace(scenario_file, tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    main(["run", "--scenario", scenario_file, "--until", "20000", "--trace", str(trace)])
    lines = trace.read_text(encoding="utf-8").splitlines()
    trace.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    capsys.readouterr()

    assert main(["report", "--trace", str(trace)]) == ExitStatus.RUNTIME_FAILURE
    assert "truncated" in capsys.readouterr().out


def test_injected_illegal_transition_is_caught(scenario_file, monkeypatch, capsys):
    def skip_weak(current, ec4):
        if current is TzState.L:
            return TzState.R
        return next_state(current, ec4)

    monkeypatch.setattr("app.services.zone_manager.orchestrator.next_state", skip_weak)
    status = main(
        ["run", "--scenario", scenario_file, "--until", "30000", "--check-invariants"]
    )
    assert status == ExitStatus.INVARIANT_VIOLATION
    assert "INVARIANT VIOLATION transition_edge" in capsys.readouterr().out


@pytest.mark.parametrize("name", ["disconnection_day.json", "satellite_backup.json"])
def test_shipped_scenarios_validate(name):
    assert main(["validate", "--scenario", str(SCENARIOS_DIR / name)]) == ExitStatus.OK


def test_shipped_disconnection_day_is_the_canonical_scenario(canonical_document):
    shipped = json.loads((SCENARIOS_DIR / "disconnection_day.json").read_text(encoding="utf-8"))
    assert shipped == json.loads(canonical_document)
