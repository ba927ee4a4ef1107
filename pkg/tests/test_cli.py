"""The world-insight command line: subcommands, outputs and exit codes."""

import pytest
import yaml

from src.world_insight.errors import ResourceCapError, SpecParseError, SpecValidationError
from src.world_insight.main import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_RESOURCE,
    EXIT_VALIDATION,
    RunConfig,
    exit_code_for,
    main,
    run_validate,
)
from src.world_insight.world.model import WorldDef2, WorldDef3
from src.world_insight.world.spec_io import load_world_spec


@pytest.fixture
def cli(tmp_path):
    logs = str(tmp_path / "logs")

    def invoke(*argv: str) -> int:
        return main(["--log-dir", logs, *map(str, argv)])

    return invoke


def data_lines(path) -> list[str]:
    return [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]


def test_validate_exit_codes(cli, specs_dir):
    assert cli("validate", specs_dir / "three_state.yaml") == EXIT_OK
    assert cli("validate", specs_dir / "noisy_lamp.yaml") == EXIT_OK
    assert cli("validate", specs_dir / "invalid" / "inequality_one.yaml") == EXIT_VALIDATION
    assert cli("validate", specs_dir / "invalid" / "bad_yaml.yaml") == EXIT_PARSE
    assert cli("validate", "builtin:doors") == EXIT_OK
    assert cli("validate", "builtin:checkers") == EXIT_PARSE


def test_validate_names_the_violated_constraint(specs_dir):
    result = run_validate(str(specs_dir / "invalid" / "inequality_one.yaml"))
    assert result["status"] == "invalid"
    assert any("(1)" in p for p in result["problems"])
    lower = run_validate(str(specs_dir / "invalid" / "lower_sum.yaml"))
    assert any("sum(lo)" in p for p in lower["problems"])


def test_argument_errors(cli):
    assert cli("explode") == EXIT_PARSE
    assert cli("run") == EXIT_PARSE
    assert cli("--help") == EXIT_OK


def test_run_with_no_steps_writes_one_line(cli, specs_dir, tmp_path):
    out = tmp_path / "h0.log"
    assert cli("run", specs_dir / "three_state.yaml", "--horizon", 0, "--out", out) == EXIT_OK
    lines = data_lines(out)
    assert len(lines) == 1
    assert lines[0].split("\t")[:2] == ["1", "Nothing"]


def test_run_is_reproducible(cli, specs_dir, tmp_path):
    first, second, other = tmp_path / "a.log", tmp_path / "b.log", tmp_path / "c.log"
    args = ("run", specs_dir / "three_state.yaml", "--horizon", 30, "--episodes", 3, "--seed-policy", 7)
    assert cli(*args, "--out", first) == EXIT_OK
    assert cli(*args, "--out", second) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert len(data_lines(first)) == 3 * 31
    assert cli("run", specs_dir / "three_state.yaml", "--horizon", 30, "--episodes", 3, "--out", other) == EXIT_OK
    assert other.read_bytes() != first.read_bytes()


def test_run_rejects_bad_counts(cli, specs_dir):
    assert cli("run", specs_dir / "three_state.yaml", "--episodes", 0) == EXIT_VALIDATION
    with pytest.raises(ValueError):
        RunConfig(world="builtin:doors", horizon=-1)


def test_transform_noisy_world_to_a_flat_one(cli, specs_dir, tmp_path):
    out = tmp_path / "flat_lamp.yaml"
    assert cli("transform", "--from", "def4", "--to", "def3", specs_dir / "noisy_lamp.yaml", out) == EXIT_OK
    assert cli("validate", out) == EXIT_OK
    world = load_world_spec(out)
    assert isinstance(world, WorldDef3)
    assert cli("equiv-check", specs_dir / "noisy_lamp.yaml", out, "--episodes", 50, "--horizon", 3) == EXIT_OK


def test_transform_def3_to_def2(cli, specs_dir, tmp_path):
    out = tmp_path / "lamp2.yaml"
    assert cli("transform", "--from", "def3", "--to", "def2", specs_dir / "lamp.yaml", out) == EXIT_OK
    world = load_world_spec(out)
    assert isinstance(world, WorldDef2)
    assert len(world.states) == 6


def test_transform_def2_to_def1_runs(cli, specs_dir, tmp_path):
    out = tmp_path / "three_state_def1.yaml"
    assert cli("transform", "--from", "def2", "--to", "def1", specs_dir / "three_state.yaml", out, "--seed-predictable", 5) == EXIT_OK
    document = yaml.safe_load(out.read_text(encoding="utf-8"))
    assert document["kind"] == "def1"
    assert cli("run", out, "--horizon", 5, "--out", tmp_path / "det.log") == EXIT_OK


def test_transform_refuses_the_wrong_source(cli, specs_dir, tmp_path):
    out = tmp_path / "x.yaml"
    assert cli("transform", "--from", "def3", "--to", "def2", specs_dir / "three_state.yaml", out) == EXIT_VALIDATION
    assert cli("transform", "--from", "def3", "--to", "def1", specs_dir / "lamp.yaml", out) == EXIT_VALIDATION
    assert not out.exists()


def test_equiv_check_report(cli, specs_dir, tmp_path):
    out = tmp_path / "equiv.yaml"
    spec = specs_dir / "three_state.yaml"
    assert cli("equiv-check", spec, spec, "--episodes", 1000, "--horizon", 3, "--out", out) == EXIT_OK
    report = yaml.safe_load(out.read_text(encoding="utf-8"))
    assert report["distance"] < 0.15
    assert len(report["per_step"]) == 4
    assert report["per_step"][0] == 0
    assert cli("equiv-check", spec, specs_dir / "lamp.yaml") == EXIT_VALIDATION


def test_agent_statistics_re_render(cli, tmp_path):
    stats, first, second = tmp_path / "stats.yaml", tmp_path / "r1.yaml", tmp_path / "r2.yaml"
    assert cli("agent", "builtin:doors", "--horizon", 300, "--seed-policy", 3, "--stats-out", stats, "--out", first) == EXIT_OK
    assert cli("report", stats, "--c0", 1, "--out", second) == EXIT_OK
    before = yaml.safe_load(first.read_text(encoding="utf-8"))
    after = yaml.safe_load(second.read_text(encoding="utf-8"))
    assert after["meta"]["c0"] == 1
    assert [(r["n"], r["m"]) for r in after["records"]] == [(r["n"], r["m"]) for r in before["records"]]
    assert before["meta"]["config"]["horizon"] == 300


def test_agent_output_is_byte_identical_across_runs(cli, tmp_path):
    report, stats = tmp_path / "report.yaml", tmp_path / "stats.yaml"
    args = ("agent", "builtin:doors", "--horizon", 150, "--episodes", 2, "--seed-policy", 5)
    assert cli(*args, "--stats-out", stats, "--out", report) == EXIT_OK
    first = report.read_bytes(), stats.read_bytes()
    assert cli(*args, "--stats-out", stats, "--out", report) == EXIT_OK
    assert (report.read_bytes(), stats.read_bytes()) == first


def test_agent_replays_a_log(cli, tmp_path):
    log, live, replay = tmp_path / "doors.log", tmp_path / "live.yaml", tmp_path / "replay.yaml"
    args = ("builtin:doors", "--horizon", 200, "--episodes", 2, "--seed-policy", 11)
    assert cli("run", *args, "--out", log) == EXIT_OK
    assert cli("agent", *args, "--out", live) == EXIT_OK
    assert cli("agent", "builtin:doors", "--log", log, "--out", replay) == EXIT_OK
    live_report = yaml.safe_load(live.read_text(encoding="utf-8"))
    replay_report = yaml.safe_load(replay.read_text(encoding="utf-8"))
    assert replay_report["records"] == live_report["records"]
    assert replay_report["meta"]["mode"] == "replay"


def test_agent_with_a_theory_file(cli, specs_dir, tmp_path):
    out = tmp_path / "lamp_report.yaml"
    spec = specs_dir / "lamp.yaml"
    assert cli("agent", spec, "--tests", specs_dir / "lamp_theory.yaml", "--horizon", 100, "--out", out) == EXIT_OK
    assert cli("agent", spec, "--horizon", 10) == EXIT_VALIDATION


def test_settings_file_errors(cli, tmp_path):
    broken = tmp_path / "settings.yaml"
    broken.write_text("theory:\n  c0: -1\n", encoding="utf-8")
    assert cli("--settings", broken, "validate", "builtin:doors") == EXIT_VALIDATION
    assert cli("--settings", tmp_path / "missing.yaml", "validate", "builtin:doors") == EXIT_PARSE


@pytest.mark.parametrize(
    "error, code",
    [
        (ResourceCapError("reachable cumulative states", 10), EXIT_RESOURCE),
        (SpecParseError("bad", "x.yaml"), EXIT_PARSE),
        (yaml.YAMLError("bad"), EXIT_PARSE),
        (SpecValidationError(["(1) at i=1"]), EXIT_VALIDATION),
        (ValueError("bad"), EXIT_VALIDATION),
    ],
)
def test_exit_code_mapping(error, code):
    assert exit_code_for(error) == code
