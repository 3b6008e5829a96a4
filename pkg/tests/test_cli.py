"""Command-line interface: subcommands, formats, streams, exit codes."""

import json

import pytest

from cpd.cli import main
from cpd.models import model_text
from cpd.parser import parse

DOOMED = """uncontrollable u;
var x : 1..2 = 1;
process P = u![x := 2].1;
plant P;
requirement not (x = 2);
"""

OBSERVER = """controllable a, c;
var x : 1..2 = 1;
process P = c?[x := 2].1 + a?.c?.1;
plant P;
requirement not (x = 2);
"""


@pytest.fixture
def agv(tmp_path):
    f = tmp_path / "agv.cpd"
    f.write_text(model_text("agv"))
    return str(f)


@pytest.fixture
def ppf(tmp_path):
    f = tmp_path / "cell.cpd"
    f.write_text(model_text("ppf_1_1"))
    return str(f)


@pytest.fixture
def tampered(tmp_path):
    f = tmp_path / "bad.cpd"
    f.write_text(model_text("ppf_1_1_tampered"))
    return str(f)


class TestParse:
    def test_prints_normalized_spec(self, agv, capsys):
        assert main(["parse", agv]) == 0
        out = capsys.readouterr().out
        assert out.startswith("controllable gotoA;")
        assert "supervisor Control;" in out

    def test_json_reports_diagnostics_and_text(self, agv, capsys):
        assert main(["parse", agv, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["diagnostics"] == []
        assert doc["normalized"].startswith("controllable gotoA;")

    def test_syntax_error_positions_on_stderr(self, tmp_path, capsys):
        f = tmp_path / "broken.cpd"
        f.write_text("process P = q!.1;\nplant P;")
        assert main(["parse", str(f)]) == 1
        err = capsys.readouterr().err
        assert "broken.cpd:1:13: unknown channel 'q'" in err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["parse", str(tmp_path / "absent.cpd")]) == 1
        assert "absent.cpd" in capsys.readouterr().err


class TestExplore:
    def test_summary_line(self, agv, capsys):
        assert main(["explore", agv]) == 0
        assert capsys.readouterr().out == "states 4 transitions 4 marked 2\n"

    def test_unsupervised_walks_the_renamed_plant(self, agv, capsys):
        assert main(["explore", agv, "--unsupervised"]) == 0
        assert capsys.readouterr().out == "states 6 transitions 8 marked 2\n"

    def test_json_document(self, agv, capsys):
        assert main(["explore", agv, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"states", "transitions", "initial"}
        assert len(doc["states"]) == 4

    def test_dot_document(self, agv, capsys):
        assert main(["explore", agv, "--format", "dot"]) == 0
        assert capsys.readouterr().out.startswith("digraph statespace {")

    def test_output_file(self, agv, tmp_path, capsys):
        target = tmp_path / "out.json"
        assert main(["explore", agv, "--format", "json", "-o", str(target)]) == 0
        json.loads(target.read_text())

    def test_budget_exceeded(self, agv, capsys):
        assert main(["explore", agv, "--budget", "2"]) == 2
        assert "state budget exceeded" in capsys.readouterr().err

    def test_budget_from_environment(self, agv, capsys, monkeypatch):
        monkeypatch.setenv("CPD_BUDGET", "2")
        assert main(["explore", agv]) == 2

    def test_flag_overrides_environment(self, agv, capsys, monkeypatch):
        monkeypatch.setenv("CPD_BUDGET", "2")
        assert main(["explore", agv, "--budget", "100"]) == 0

    def test_zero_budget_rejected(self, agv, capsys):
        assert main(["explore", agv, "--budget", "0"]) == 1
        assert "budget must be at least 1" in capsys.readouterr().err

    def test_rho_identity_flag(self, agv, capsys):
        assert main(["explore", agv, "--rho-in-identity"]) == 0


class TestCheck:
    def test_all_pass(self, agv, capsys):
        assert main(["check", agv]) == 0
        out = capsys.readouterr().out
        assert out == ("requirements: pass\ncontrollability: pass\n"
                       "nonblocking: pass\n")

    def test_single_kind(self, agv, capsys):
        assert main(["check", agv, "nonblocking"]) == 0
        assert capsys.readouterr().out == "nonblocking: pass\n"

    def test_no_supervisor_skips_controllability(self, ppf, capsys):
        assert main(["check", ppf.replace("cell", "nosup"), "requirements"]) == 1

    def test_unsupervised_requirements_fail(self, tmp_path, capsys):
        f = tmp_path / "nosup.cpd"
        # keep the plant and requirements, drop the supervisor clauses
        text = model_text("ppf_1_1")
        head = text.split("process S =")[0]
        reqs = [l for l in text.splitlines() if l.startswith("requirement")]
        f.write_text(head + "\n".join(reqs) + "\n")
        assert main(["check", str(f)]) == 1
        got = capsys.readouterr()
        assert "note: no supervisor declared, skipping controllability" in got.err
        assert "requirements: FAIL" in got.out
        assert "more violations" in got.out

    def test_tampered_supervision_fails_controllability(self, tampered, capsys):
        assert main(["check", tampered, "controllability"]) == 1
        out = capsys.readouterr().out
        assert "controllability: FAIL" in out
        assert "no matching move back" in out

    def test_pbis_needs_against(self, agv, capsys):
        assert main(["check", agv, "pbis"]) == 1
        assert "--against" in capsys.readouterr().err

    def test_pbis_self_comparison(self, agv, capsys):
        assert main(["check", agv, "pbis", "--against", agv]) == 0
        assert capsys.readouterr().out == "pbis: pass\n"

    def test_pbis_direction_matters(self, agv, ppf, capsys):
        assert main(["check", agv, "pbis", "--against", ppf,
                     "--bisim-actions", "none"]) == 1

    def test_unencapsulated_nonblocking(self, agv, capsys):
        assert main(["check", agv, "nonblocking", "--no-encap-nonblocking"]) == 0


class TestSynth:
    def test_text_spec_on_stdout_report_on_stderr(self, agv, capsys):
        assert main(["synth", agv]) == 0
        got = capsys.readouterr()
        assert "supervisor Supervisor;" in got.out
        assert "gotoA: L = B" in got.err
        assert "verification: requirements=pass, controllability=pass, " \
               "nonblocking=pass" in got.err

    def test_output_file_parses_and_passes(self, agv, tmp_path, capsys):
        target = tmp_path / "supervised.cpd"
        assert main(["synth", agv, "-o", str(target)]) == 0
        merged = parse(target.read_text(), "supervised.cpd")
        assert merged.supervisor_name == "Supervisor"
        assert main(["check", str(target)]) == 0

    def test_json_payload(self, agv, capsys):
        assert main(["synth", agv, "--format", "json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"report", "verification", "supervised_states", "spec"}
        assert doc["report"]["guards"] == {"gotoA": "L = B", "gotoB": "L = A"}
        assert doc["verification"] == {"requirements": True,
                                       "controllability": True,
                                       "nonblocking": True}
        parse(doc["spec"], "payload.cpd")

    def test_unsalvageable_plant_exits_three(self, tmp_path, capsys):
        f = tmp_path / "doomed.cpd"
        f.write_text(DOOMED)
        assert main(["synth", str(f)]) == 3
        assert "no supervisor exists" in capsys.readouterr().err

    def test_guard_conflict_exits_one(self, tmp_path, capsys):
        f = tmp_path / "observer.cpd"
        f.write_text(OBSERVER)
        assert main(["synth", str(f)]) == 1
        assert "not a function of the variables" in capsys.readouterr().err


class TestPpf:
    def test_generates_parseable_model(self, tmp_path, capsys):
        target = tmp_path / "cell.cpd"
        assert main(["ppf", "--counters", "2", "--ops", "2,1",
                     "-o", str(target)]) == 0
        sp = parse(target.read_text(), "cell.cpd")
        assert sp.plant_name
        assert len(sp.declarations.variables) == 9

    def test_stdout_by_default(self, capsys):
        assert main(["ppf", "--counters", "1", "--ops", "1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("controllable")
        parse(out, "gen.cpd")

    def test_bad_shape(self, capsys):
        assert main(["ppf", "--counters", "2", "--ops", "1"]) == 1
        assert "one op count per counter" in capsys.readouterr().err

    def test_non_numeric_ops(self, capsys):
        assert main(["ppf", "--counters", "1", "--ops", "x"]) == 1


class TestArgumentErrors:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_no_arguments(self, capsys):
        assert main([]) == 1
