"""End-to-end tests for the command-line interface."""

import json

import pytest

from reqsmith.cli import main
from reqsmith.parser import parse_model, print_model

CLEAN = 'model m;\nfunc F1 := Book <actor: User> <object: Ticket>;\n'

BAD_TAG = (
    "model m;\n"
    "axiom Airline_ticket :< Ticket;\n"
    "func F1 := Book <object: Ticket>;\n"
    "func F2 := Book <object: Airline_ticket>;\n"
    "reduce F1 -> F2 [weaken];\n"
)

CLASHING_WORLD = (
    "model w;\n"
    "axiom Hot Cold :< Nothing;\n"
    "world {\n"
    "individual x1 : Hot, Cold;\n"
    "}\n"
)

BOOKING = (
    "model booking;\n"
    "fg G1 := Ticket :< Booked;\n"
    "func F2 := Book <object: Ticket>;\n"
    "func F3 := Book <object: Airline_ticket> <means: Credit_card>;\n"
    "func F4 := Book <object: Bus_ticket> <means: Cash>;\n"
    "operationalize G1 -> F2 [strengthen];\n"
    "reduce F2 -> F3, F4 [strengthen];\n"
    "fulfilled F3, F4;\n"
)

COST_REGIONS = (
    "model cost;\n"
    "regions Cost {\n"
    "  low = interval [500, 700];\n"
    "  medium = interval [800, 1000];\n"
    "  high = interval [1200, 1500];\n"
    "}\n"
)


def write(tmp_path, text, name="input.dsr"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# ===== shared behavior =====


def test_missing_file_exits_two(tmp_path, capsys):
    assert main(["check", str(tmp_path / "nope.dsr")]) == 2
    assert capsys.readouterr().err.strip()


def test_parse_errors_exit_two_with_span(tmp_path, capsys):
    path = write(tmp_path, "model m;\ngoal G1 := ;\n")
    assert main(["check", path]) == 2
    err = capsys.readouterr().err
    assert ":2:" in err
    assert "error" in err


def test_unknown_flag_exits_two(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["check", path, "--frobnicate"]) == 2
    assert capsys.readouterr().err.strip()


def test_unknown_subcommand_exits_two(tmp_path, capsys):
    assert main(["polish", "x.dsr"]) == 2
    assert capsys.readouterr().err.strip()


def test_runs_are_byte_identical(tmp_path, capsys):
    path = write(tmp_path, BOOKING)
    assert main(["fulfill", path]) == 0
    first = capsys.readouterr().out
    assert main(["fulfill", path]) == 0
    assert capsys.readouterr().out == first


# ===== fmt =====


def test_fmt_prints_canonical_text(tmp_path, capsys):
    path = write(tmp_path, 'model m;\ngoal   G1   :=   "collect traffic info";\n')
    assert main(["fmt", path]) == 0
    out = capsys.readouterr().out
    assert out == 'model m;\ngoal G1 := "collect traffic info";\n'


def test_fmt_is_idempotent(tmp_path, capsys):
    path = write(tmp_path, BOOKING)
    assert main(["fmt", path]) == 0
    once = capsys.readouterr().out
    again = write(tmp_path, once, name="canon.dsr")
    assert main(["fmt", again]) == 0
    assert capsys.readouterr().out == once


def test_fmt_matches_the_library_printer(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    assert main(["fmt", path]) == 0
    assert capsys.readouterr().out == print_model(parse_model(COST_REGIONS))


# ===== check =====


def test_check_clean_model_is_quiet(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["check", path]) == 0
    assert capsys.readouterr().out == ""


def test_check_accepts_a_bound(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["check", path, "--bound", "2"]) == 0


def test_check_reports_contradicted_strength_tags(tmp_path, capsys):
    path = write(tmp_path, BAD_TAG)
    assert main(["check", path]) == 1
    out = capsys.readouterr().out
    assert "application[0]" in out


def test_check_reports_world_clashes(tmp_path, capsys):
    path = write(tmp_path, CLASHING_WORLD)
    assert main(["check", path]) == 1
    out = capsys.readouterr().out
    assert "world" in out
    assert "Nothing" in out


def test_check_json_uses_the_report_schema(tmp_path, capsys):
    path = write(tmp_path, BAD_TAG)
    assert main(["check", path, "--json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["version"] == 1
    assert data["findings"][0]["element"] == "application[0]"
    assert data["findings"][0]["issue"] == "inconsistent"


# ===== lint =====


def test_lint_reports_findings(tmp_path, capsys):
    path = write(tmp_path, "model s;\nfunc F2 := Send <object: Notification>;\n")
    assert main(["lint", path]) == 1
    out = capsys.readouterr().out
    assert "F2: incomplete:" in out
    assert "Who will send?" in out
    assert "[suggest reduce]" in out


def test_lint_clean_model_is_quiet(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["lint", path]) == 0
    assert capsys.readouterr().out == ""


def test_lint_reads_a_config_file(tmp_path, capsys):
    path = write(tmp_path, "model s;\nfunc F2 := Send <object: Notification>;\n")
    config = tmp_path / "lint.cfg"
    config.write_text(
        "required_slots = object\ncommunicative_heads =\n", encoding="utf-8"
    )
    assert main(["lint", path, "--config", str(config)]) == 0


def test_lint_rejects_unknown_config_keys(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    config = tmp_path / "lint.cfg"
    config.write_text("strictness = high\n", encoding="utf-8")
    assert main(["lint", path, "--config", str(config)]) == 2
    assert "strictness" in capsys.readouterr().err


def test_lint_json_lists_findings(tmp_path, capsys):
    path = write(tmp_path, "model s;\nfunc F2 := Send <object: Notification>;\n")
    assert main(["lint", path, "--json"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["findings"][0]["element"] == "F2"
    assert data["findings"][0]["suggestion"] == "reduce"


# ===== query =====


def test_query_prints_matching_ids(tmp_path, capsys):
    path = write(tmp_path, CLEAN + 'goal G2 := "collect";\n')
    assert main(["query", path, "--pattern", "<object: Ticket>"]) == 0
    assert capsys.readouterr().out == "F1\n"


def test_query_without_matches_is_quiet(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["query", path, "--pattern", "Zebra"]) == 0
    assert capsys.readouterr().out == ""


def test_query_bad_pattern_exits_two(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["query", path, "--pattern", "<object:"]) == 2
    assert capsys.readouterr().err.strip()


def test_query_json_reports_matches_as_subsumptions(tmp_path, capsys):
    path = write(tmp_path, CLEAN)
    assert main(["query", path, "--pattern", "<object: Ticket>", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["subsumptions"] == [
        {
            "sub": "F1",
            "sup": "<object: Ticket>",
            "status": "proven",
            "method": "query",
        }
    ]


# ===== fulfill =====


def test_fulfill_prints_states_in_declaration_order(tmp_path, capsys):
    path = write(tmp_path, BOOKING)
    assert main(["fulfill", path]) == 0
    assert capsys.readouterr().out == (
        "G1: fulfilled\nF2: fulfilled\nF3: fulfilled\nF4: fulfilled\n"
    )


def test_fulfill_with_partial_marks_shows_unknown(tmp_path, capsys):
    text = BOOKING.replace("fulfilled F3, F4;", "fulfilled F3;")
    path = write(tmp_path, text)
    assert main(["fulfill", path]) == 0
    out = capsys.readouterr().out
    assert "F2: unknown" in out
    assert "G1: unknown" in out


def test_fulfill_threshold_relaxes_fan_outs(tmp_path, capsys):
    text = (
        "model t;\n"
        "fg G := Report :< Delivered;\n"
        "func F1 := Send <actor: A> <object: R> <target: T>;\n"
        "func F2 := Send <actor: A> <object: R> <target: U>;\n"
        "func F3 := Send <actor: A> <object: R> <target: V>;\n"
        "func F4 := Send <actor: A> <object: R> <target: W>;\n"
        "operationalize G -> F1, F2, F3, F4 [strengthen];\n"
        "fulfilled F1, F2, F3;\n"
    )
    path = write(tmp_path, text)
    assert main(["fulfill", path]) == 0
    assert "G: unknown" in capsys.readouterr().out
    assert main(["fulfill", path, "--threshold", "3"]) == 0
    assert "G: fulfilled" in capsys.readouterr().out


def test_fulfill_json_maps_ids_to_states(tmp_path, capsys):
    path = write(tmp_path, BOOKING)
    assert main(["fulfill", path, "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["fulfillment"]["G1"] == "fulfilled"


# ===== translate =====


def test_translate_writes_the_ontology(tmp_path, capsys):
    path = write(tmp_path, BOOKING)
    out_path = tmp_path / "booking.ofn"
    assert main(["translate", path, "--out", str(out_path)]) == 0
    text = out_path.read_text(encoding="utf-8")
    assert text.startswith("Prefix(")
    assert "SubClassOf(:F3 :Fulfilled_Thing)" in text
    assert capsys.readouterr().out == ""


def test_translate_stacked_annotations_exit_one(tmp_path, capsys):
    text = (
        "model u;\n"
        "qg QG1 := Response_time (Run <run_of: System_function>) :: Fast"
        " u(?X, inheres_in.run_of, 80%) u(?Y, inheres_in, 90%);\n"
    )
    path = write(tmp_path, text)
    out_path = tmp_path / "u.ofn"
    assert main(["translate", path, "--out", str(out_path)]) == 1
    assert "QG1" in capsys.readouterr().err
    assert not out_path.exists()


# ===== membership =====


def test_membership_prints_one_degree(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    args = ["membership", path, "--quality", "Cost", "--value", "740"]
    assert main(args + ["--region", "low"]) == 0
    assert capsys.readouterr().out == "0.595\n"


def test_membership_prints_every_region(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    assert main(["membership", path, "--quality", "Cost", "--value", "740"]) == 0
    assert capsys.readouterr().out == "low: 0.595\nmedium: 0.405\nhigh: 0\n"


def test_membership_unknown_quality_exits_two(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    args = ["membership", path, "--quality", "Speed", "--value", "1"]
    assert main(args) == 2
    assert "Speed" in capsys.readouterr().err


def test_membership_unknown_region_exits_two(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    args = ["membership", path, "--quality", "Cost", "--value", "740"]
    assert main(args + ["--region", "extreme"]) == 2
    assert "extreme" in capsys.readouterr().err


def test_membership_rejects_non_numeric_values(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    args = ["membership", path, "--quality", "Cost", "--value", "cheap"]
    assert main(args) == 2
    assert "cheap" in capsys.readouterr().err


def test_membership_json_maps_regions_to_degrees(tmp_path, capsys):
    path = write(tmp_path, COST_REGIONS)
    args = ["membership", path, "--quality", "Cost", "--value", "740", "--json"]
    assert main(args) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["fulfillment"] == {"low": "0.595", "medium": "0.405", "high": "0"}
