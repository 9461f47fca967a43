"""Tests for the issue-taxonomy checks and the kind-classification hints."""

from fractions import Fraction

import pytest

from reqsmith.lint import (
    Issue,
    KindGuess,
    LintConfig,
    LintFinding,
    classify_hint,
    lint_model,
)
from reqsmith.model import AtomicConcept, Kind, Strength
from reqsmith.operators import (
    apply_deuniversalize,
    apply_observe,
    apply_reduce,
    apply_resolve,
)
from reqsmith.parser import parse_model


def parsed(text):
    result = parse_model(text)
    assert not isinstance(result, list), result
    return result


def elem(decl):
    return parsed("model scratch;\n" + decl).elements[0]


def findings(model, issue=None, config=None):
    found = lint_model(model) if config is None else lint_model(model, config)
    if issue is None:
        return found
    return [f for f in found if f.issue is issue]


# ===== unsatisfiable risk =====

TASKS = parsed("model t;\nqc QC1 := Processing_time (Tasks) :: [0, 5 (Sec.)];\n")


def test_whole_class_subject_is_an_unsatisfiable_risk():
    hits = findings(TASKS, Issue.UNSATISFIABLE)
    assert [f.element_id for f in hits] == ["QC1"]
    assert hits[0].suggested_operator == "deuniv"


def test_universal_wording_is_an_unsatisfiable_risk():
    m = parsed('model t;\nqg QG1 := "all tasks shall finish within 5 seconds";\n')
    hits = findings(m, Issue.UNSATISFIABLE)
    assert [f.element_id for f in hits] == ["QG1"]
    assert "all" in hits[0].detail


def test_individual_subjects_carry_no_universal_risk():
    m = parsed("model t;\nqg QG1 := Security ({the_system}) :: Good;\n")
    assert findings(m, Issue.UNSATISFIABLE) == []


def test_an_existing_relaxation_silences_the_risk():
    m = parsed(
        "model t;\n"
        "qc QC1 := Processing_time (Tasks) :: [0, 5 (Sec.)] u(?X, inheres_in, 90%);\n"
    )
    assert findings(m, Issue.UNSATISFIABLE) == []


def test_relaxing_removes_the_risk_finding():
    assert findings(TASKS, Issue.UNSATISFIABLE) != []
    relaxed = apply_deuniversalize(TASKS, "QC1", "X", ["inheres_in"], Fraction(9, 10))
    assert findings(relaxed, Issue.UNSATISFIABLE) == []


# ===== unverifiable =====

VAGUE = parsed("model v;\nqg QG1 := Processing_time (File_search) :: Fast;\n")


def test_vague_region_without_successor_is_unverifiable():
    hits = findings(VAGUE, Issue.UNVERIFIABLE)
    assert [f.element_id for f in hits] == ["QG1"]
    assert "Fast" in hits[0].detail
    assert hits[0].suggested_operator == "observe"


def test_interval_regions_are_verifiable():
    assert findings(TASKS, Issue.UNVERIFIABLE) == []


def test_observing_removes_the_unverifiable_finding():
    observed = apply_observe(VAGUE, "QG1", AtomicConcept("Surveyed_user"))
    assert findings(observed, Issue.UNVERIFIABLE) == []


def test_an_operationalize_successor_counts_as_verifiable():
    m = parsed(
        """
model v;
qg QG1 := Processing_time (File_search) :: Fast;
qc QC2 := Processing_time (File_search) :: [0, 30 (Sec.)];
operationalize QG1 -> QC2 [strengthen];
"""
    )
    assert findings(m, Issue.UNVERIFIABLE) == []


# ===== incomplete =====


def test_missing_slots_ask_pointed_questions():
    m = parsed("model s;\nfunc F2 := Send <object: Meeting_notification>;\n")
    hits = findings(m, Issue.INCOMPLETE)
    assert [f.element_id for f in hits] == ["F2"]
    assert "Who will send?" in hits[0].detail
    assert "Send to whom?" in hits[0].detail
    assert hits[0].suggested_operator == "reduce"


def test_fully_slotted_functions_are_complete():
    m = parsed(
        "model s;\n"
        "func F1 := Send <actor: Organizer> <object: Meeting_notification>"
        " <target: Participant>;\n"
        "func F2 := Book <actor: User> <object: Ticket>;\n"
    )
    assert findings(m, Issue.INCOMPLETE) == []


def test_refining_removes_the_incomplete_finding():
    m = parsed("model s;\nfunc F2 := Send <object: Meeting_notification>;\n")
    refined = apply_reduce(
        m,
        "F2",
        [
            elem(
                "func F3 := Send <actor: Organizer> <object: Meeting_notification>"
                " <target: Participant>;"
            )
        ],
        Strength.STRENGTHENING,
    )
    assert findings(refined, Issue.INCOMPLETE) == []


def test_required_slot_profiles_come_from_config():
    m = parsed("model s;\nfunc F1 := Send <object: Report>;\n")
    lax = LintConfig(required_slots=("object",), communicative_heads=frozenset())
    assert findings(m, Issue.INCOMPLETE, config=lax) == []


# ===== redundant and unmodifiable =====


def test_identical_bodies_are_redundant():
    m = parsed(
        "model r;\nfg FG1 := Ticket :< Booked;\nfg FG2 := Ticket :< Booked;\n"
    )
    hits = findings(m, Issue.REDUNDANT)
    assert [f.element_id for f in hits] == ["FG2"]
    assert "FG1" in hits[0].detail


def test_redundancy_sees_through_surface_order():
    m = parsed(
        "model r;\n"
        "fg FG1 := (Alpha Beta) :< Collected;\n"
        "fg FG2 := (Beta Alpha) :< Collected;\n"
    )
    assert [f.element_id for f in findings(m, Issue.REDUNDANT)] == ["FG2"]


def test_same_body_under_different_kinds_is_not_redundant():
    m = parsed(
        "model r;\nfg FG1 := Ticket :< Booked;\nda DA1 := Ticket :< Booked;\n"
    )
    assert findings(m, Issue.REDUNDANT) == []


def test_conjoined_concerns_are_unmodifiable():
    m = parsed(
        'model g;\ngoal G1 := "collect traffic info and reduce operation cost";\n'
    )
    hits = findings(m, Issue.UNMODIFIABLE)
    assert [f.element_id for f in hits] == ["G1"]
    assert hits[0].suggested_operator == "reduce"


def test_single_concern_text_is_modifiable():
    m = parsed('model g;\ngoal G1 := "collect real time traffic info";\n')
    assert findings(m, Issue.UNMODIFIABLE) == []


# ===== inconsistent =====


def test_world_clashes_are_reported():
    m = parsed(
        """
model w;
axiom Hot Cold :< Nothing;
world {
individual x1 : Hot, Cold;
}
"""
    )
    hits = findings(m, Issue.INCONSISTENT)
    assert hits
    assert all(f.element_id == "world" for f in hits)
    assert any("x1" in f.detail for f in hits)


def test_terms_under_disjoint_classes_are_reported():
    m = parsed(
        """
model u;
axiom Information_entity Real_world_entity :< Nothing;
da DA1 := User :< Information_entity;
da DA2 := User :< Real_world_entity;
"""
    )
    hits = findings(m, Issue.INCONSISTENT)
    assert len(hits) == 1
    assert hits[0].element_id == "DA1"
    assert "User" in hits[0].detail
    assert "Information_entity" in hits[0].detail
    assert hits[0].suggested_operator == "interpret"


def test_disjointness_alone_is_not_a_clash():
    m = parsed(
        """
model u;
axiom Information_entity Real_world_entity :< Nothing;
da DA1 := User :< Information_entity;
"""
    )
    assert findings(m, Issue.INCONSISTENT) == []


# ===== ambiguous =====


def test_attachment_words_are_ambiguous():
    m = parsed('model a;\ngoal G1 := "notify users with email";\n')
    hits = findings(m, Issue.AMBIGUOUS)
    assert [f.element_id for f in hits] == ["G1"]
    assert hits[0].suggested_operator == "interpret"


def test_beneficiary_attachment_is_ambiguous():
    m = parsed('model a;\ngoal G1 := "download contact information for client";\n')
    assert [f.element_id for f in findings(m, Issue.AMBIGUOUS)] == ["G1"]


def test_double_reading_fillers_need_declared_vocabularies():
    m = parsed("model a;\nfunc F1 := Render <object: Color>;\n")
    assert findings(m, Issue.AMBIGUOUS) == []
    overlap = LintConfig(
        entity_terms=frozenset({"color"}), quality_terms=frozenset({"color"})
    )
    hits = findings(m, Issue.AMBIGUOUS, config=overlap)
    assert [f.element_id for f in hits] == ["F1"]
    assert "Color" in hits[0].detail


# ===== shared behavior =====


def test_dropped_elements_are_not_linted():
    m = parsed(
        """
model d;
qg QG1 := Processing_time (Tasks) :: Fast;
qg QG2 := Processing_time (Tasks) :: [0, 5 (Sec.)];
conflict {QG1, QG2};
"""
    )
    assert findings(m, Issue.UNVERIFIABLE) != []
    resolved = apply_resolve(m, ["QG1", "QG2"], ["QG2"])
    assert findings(resolved, Issue.UNVERIFIABLE) == []
    assert all(f.element_id != "QG1" for f in lint_model(resolved))


def test_clean_model_has_no_findings():
    m = parsed(
        "model ok;\nfunc F1 := Book <actor: User> <object: Ticket>;\n"
    )
    assert lint_model(m) == []


def test_lint_is_deterministic():
    m = parsed(
        """
model mix;
qg QG1 := Processing_time (Tasks) :: Fast;
func F2 := Send <object: Report>;
goal G3 := "notify users with email";
"""
    )
    assert lint_model(m) == lint_model(m)


def test_findings_only_suggest_real_operators():
    with pytest.raises(ValueError, match="operator"):
        LintFinding("E1", Issue.AMBIGUOUS, "detail", "rewrite")


# ===== classification hints =====


def test_state_wording_suggests_a_functional_goal():
    guesses = classify_hint("airline tickets be booked")
    assert guesses[0].kind is Kind.FG
    assert guesses[0].triggers


def test_is_a_wording_suggests_an_assumption():
    guesses = classify_hint("Tomcat is a web server")
    assert guesses[0].kind is Kind.DA


def test_shall_allow_wording_suggests_a_function():
    guesses = classify_hint("the system shall allow users to book airline tickets")
    assert guesses[0].kind is Kind.F


def test_copular_adjective_suggests_a_quality_goal():
    guesses = classify_hint("the interface shall be appealing")
    assert guesses[0].kind is Kind.QG


def test_attribute_wording_suggests_a_content_goal():
    guesses = classify_hint("meetings shall have a date and a location")
    assert guesses[0].kind is Kind.CTG


def test_empty_text_has_no_guesses():
    assert classify_hint("") == []


def test_guesses_carry_their_trigger_words():
    guesses = classify_hint("the system shall allow users to book tickets")
    assert all(isinstance(g, KindGuess) and g.triggers for g in guesses)
