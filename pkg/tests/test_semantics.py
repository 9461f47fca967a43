"""Tests for world evaluation, element checking, and logic translation."""

import random
from fractions import Fraction

import pytest

from reqsmith.model import (
    EXACTLY_ONE,
    NOTHING,
    ONLY,
    SOME,
    THING,
    AtomicConcept,
    Difference,
    Element,
    Enumeration,
    FunctionDesc,
    Intersection,
    Interval,
    InverseProjection,
    Kind,
    NamedRegion,
    NaturalLanguage,
    QualityRecord,
    QualityStatement,
    Quantity,
    Region,
    SlotRestriction,
    Subsumption,
    UAnnotation,
    Union,
    ValueSet,
    World,
    at_least,
    at_most,
    exactly,
    normalize,
)
from reqsmith.semantics import (
    DL_NOTHING,
    DL_THING,
    DLAnd,
    DLAtomic,
    DLCard,
    DLDataRange,
    DLExists,
    DLExistsInverse,
    DLForAll,
    DLNominal,
    DLNot,
    DLOr,
    DLSubClassOf,
    HoldsStatus,
    PathMismatch,
    UnsupportedNestedU,
    element_holds,
    eval_description,
    eval_dl,
    expand_u,
    translate_description,
    translate_element,
)

A = AtomicConcept


def world(**kwargs) -> World:
    defaults = dict(
        individuals=frozenset(),
        concept_extensions={},
        slot_tuples={},
        data_values={},
        quality_records=(),
    )
    defaults.update(kwargs)
    defaults["individuals"] = frozenset(defaults["individuals"])
    defaults["concept_extensions"] = {
        k: frozenset(v) for k, v in defaults["concept_extensions"].items()
    }
    defaults["slot_tuples"] = {
        k: frozenset(v) for k, v in defaults["slot_tuples"].items()
    }
    return World(**defaults)


# ---- eval_description ----

ACTIVATE_WORLD = world(
    individuals={"a1", "m1", "d1"},
    concept_extensions={
        "Activate": {"a1"},
        "Manager": {"m1"},
        "Debit_card": {"d1"},
    },
    slot_tuples={"actor": {("a1", "m1")}, "object": {("a1", "d1")}},
)


def test_eval_function_shape_selects_the_run():
    d = Intersection(
        Intersection(
            A("Activate"), SlotRestriction("actor", EXACTLY_ONE, A("Manager"))
        ),
        SlotRestriction("object", EXACTLY_ONE, A("Debit_card")),
    )
    assert eval_description(d, ACTIVATE_WORLD) == frozenset({"a1"})


def test_eval_thing_minus_thing_is_empty():
    assert eval_description(Difference(THING, THING), ACTIVATE_WORLD) == frozenset()


def test_eval_inverse_projection():
    w = world(
        individuals={"c1", "t1"},
        concept_extensions={"Collect_1": {"c1"}},
        slot_tuples={"object": {("c1", "t1")}},
    )
    d = InverseProjection(A("Collect_1"), "object")
    assert eval_description(d, w) == frozenset({"t1"})


def test_eval_missing_names_default_to_empty():
    assert eval_description(A("Unheard_of"), ACTIVATE_WORLD) == frozenset()
    assert (
        eval_description(
            SlotRestriction("nope", SOME, THING), ACTIVATE_WORLD
        )
        == frozenset()
    )


CARD_WORLD = world(
    individuals={"x0", "x1", "x2", "x3", "x4", "t1", "t2", "t3", "u1"},
    concept_extensions={"T": {"t1", "t2", "t3"}},
    slot_tuples={
        "r": {
            ("x1", "t1"),
            ("x2", "t1"),
            ("x2", "t2"),
            ("x3", "t1"),
            ("x3", "t2"),
            ("x3", "t3"),
            ("x4", "u1"),
        }
    },
)


@pytest.mark.parametrize(
    "modifier, expected",
    [
        (EXACTLY_ONE, {"x1"}),
        (SOME, {"x1", "x2", "x3"}),
        (at_most(1), {"x0", "x1", "x4", "t1", "t2", "t3", "u1"}),
        (at_least(2), {"x2", "x3"}),
        (exactly(2), {"x2"}),
        (ONLY, {"x0", "x1", "x2", "x3", "t1", "t2", "t3", "u1"}),
    ],
)
def test_eval_slot_modifiers(modifier, expected):
    d = SlotRestriction("r", modifier, A("T"))
    assert eval_description(d, CARD_WORLD) == frozenset(expected)


def test_only_is_vacuous_without_successors():
    d = SlotRestriction("r", ONLY, NOTHING)
    result = eval_description(d, CARD_WORLD)
    assert "x0" in result and "t1" in result
    assert "x1" not in result


DATA_WORLD = world(
    individuals={"c1", "c2", "c3", "c4", "c5"},
    data_values={
        ("c1", "duration"): Quantity(Fraction(25), "Sec"),
        ("c2", "duration"): Quantity(Fraction(40), "Sec"),
        ("c3", "duration"): Fraction(10),
        ("c5", "duration"): Quantity(Fraction(25), "Min"),
    },
)


def test_eval_interval_filler_with_units():
    d = SlotRestriction(
        "duration", EXACTLY_ONE, Region(Interval(Fraction(0), Fraction(30), "Sec"))
    )
    # unitless values compare numerically; a differing unit never matches
    assert eval_description(d, DATA_WORLD) == frozenset({"c1", "c3"})


def test_eval_only_over_data_is_vacuous_when_absent():
    d = SlotRestriction(
        "duration", ONLY, Region(Interval(Fraction(0), Fraction(30), "Sec"))
    )
    assert eval_description(d, DATA_WORLD) == frozenset({"c1", "c3", "c4"})


def test_eval_value_set_filler():
    d = SlotRestriction(
        "duration", SOME, Region(ValueSet((Fraction(10), Fraction(40))))
    )
    assert eval_description(d, DATA_WORLD) == frozenset({"c2", "c3"})


def test_eval_enumeration_and_region_literal():
    w = world(individuals={"MySQL", "Oracle", "other"})
    assert eval_description(Enumeration(("MySQL", "Oracle", "ghost")), w) == frozenset(
        {"MySQL", "Oracle"}
    )
    assert eval_description(Region(Interval(Fraction(0), Fraction(1))), w) == frozenset()


# ---- element_holds ----


def qc_world(value: int) -> World:
    return world(
        individuals={"f1"},
        concept_extensions={"File_search": {"f1"}},
        quality_records=(
            QualityRecord("pt1", "Processing_time", "f1", Fraction(value), "Sec"),
        ),
    )


QC_BODY = QualityStatement(
    A("Processing_time"), A("File_search"), Interval(Fraction(0), Fraction(30), "Sec")
)
QC_ELEMENT = Element("QC_1", Kind.QC, QC_BODY)


def test_quality_holds_for_in_range_measurement():
    assert element_holds(QC_ELEMENT, qc_world(25)).status is HoldsStatus.HOLDS


def test_quality_violated_with_the_run_as_witness():
    result = element_holds(QC_ELEMENT, qc_world(32))
    assert result.status is HoldsStatus.VIOLATED
    assert result.witnesses == ("pt1",)


def test_quality_not_applicable_when_no_subjects():
    empty = world(individuals={"x"}, concept_extensions={})
    assert element_holds(QC_ELEMENT, empty).status is HoldsStatus.NOT_APPLICABLE


def test_quality_vacuously_holds_without_records():
    w = world(individuals={"f1"}, concept_extensions={"File_search": {"f1"}})
    assert element_holds(QC_ELEMENT, w).status is HoldsStatus.HOLDS


def test_unstructured_and_function_bodies_are_not_checkable():
    nl = Element("G", Kind.GOAL, NaturalLanguage("be nice"))
    fn = Element("F", Kind.F, FunctionDesc("Send"))
    w = qc_world(25)
    assert element_holds(nl, w).status is HoldsStatus.NOT_APPLICABLE
    assert element_holds(fn, w).status is HoldsStatus.NOT_APPLICABLE


def test_subsumption_holds_and_violated():
    e = Element("FC", Kind.FC, Subsumption(A("Table"), A("Protected")))
    w_ok = world(
        individuals={"t1"},
        concept_extensions={"Table": {"t1"}, "Protected": {"t1"}},
    )
    w_bad = world(
        individuals={"t1", "t2"},
        concept_extensions={"Table": {"t1", "t2"}, "Protected": {"t1"}},
    )
    assert element_holds(e, w_ok).status is HoldsStatus.HOLDS
    result = element_holds(e, w_bad)
    assert result.status is HoldsStatus.VIOLATED and result.witnesses == ("t2",)


def runs_world(good: int, bad: int) -> World:
    records = []
    members = set()
    for i in range(good + bad):
        run = f"run{i}"
        members.add(run)
        value = Fraction(25) if i < good else Fraction(40)
        records.append(
            QualityRecord(f"q{i}", "Processing_time", run, value, "Sec")
        )
    return world(
        individuals=members,
        concept_extensions={"File_search": members},
        quality_records=tuple(records),
    )


def annotated_qc(pct: Fraction) -> Element:
    body = QualityStatement(
        A("Processing_time"),
        A("File_search"),
        Interval(Fraction(0), Fraction(30), "Sec"),
        pct_annotations=(UAnnotation("X", ("inheres_in",), pct),),
    )
    return Element("QC_u", Kind.QC, body)


def test_counting_meets_eighty_percent():
    e = annotated_qc(Fraction(4, 5))
    assert element_holds(e, runs_world(8, 2)).status is HoldsStatus.HOLDS


def test_counting_fails_below_eighty_percent():
    e = annotated_qc(Fraction(4, 5))
    result = element_holds(e, runs_world(7, 3))
    assert result.status is HoldsStatus.VIOLATED
    assert result.witnesses == ("run7", "run8", "run9")


def test_observers_restrict_which_records_count():
    w = world(
        individuals={"f1", "u1"},
        concept_extensions={"File_search": {"f1"}, "Surveyed_user": {"u1"}},
        quality_records=(
            QualityRecord(
                "good", "Processing_time", "f1", Fraction(25), "Sec", frozenset({"u1"})
            ),
            QualityRecord("stray", "Processing_time", "f1", Fraction(99), "Sec"),
        ),
    )
    body = QualityStatement(
        A("Processing_time"),
        A("File_search"),
        Interval(Fraction(0), Fraction(30), "Sec"),
        observers=(A("Surveyed_user"),),
    )
    assert element_holds(Element("Q", Kind.QC, body), w).status is HoldsStatus.HOLDS


def test_empty_observer_extension_is_not_applicable():
    w = qc_world(25)
    body = QualityStatement(
        A("Processing_time"),
        A("File_search"),
        Interval(Fraction(0), Fraction(30), "Sec"),
        observers=(A("Surveyed_user"),),
    )
    result = element_holds(Element("Q", Kind.QC, body), w)
    assert result.status is HoldsStatus.NOT_APPLICABLE


def test_named_region_checks_classification_of_the_quality():
    w = world(
        individuals={"ui1"},
        concept_extensions={"User_interface": {"ui1"}, "Simple": {"s1"}},
        quality_records=(QualityRecord("s1", "Style", "ui1", Fraction(1)),),
    )
    body = QualityStatement(A("Style"), A("User_interface"), NamedRegion("Simple"))
    assert element_holds(Element("QG", Kind.QG, body), w).status is HoldsStatus.HOLDS
    w2 = world(
        individuals={"ui1"},
        concept_extensions={"User_interface": {"ui1"}},
        quality_records=(QualityRecord("s1", "Style", "ui1", Fraction(1)),),
    )
    result = element_holds(Element("QG", Kind.QG, body), w2)
    assert result.status is HoldsStatus.VIOLATED and result.witnesses == ("s1",)


def test_two_step_annotation_counts_over_slot_targets():
    w = world(
        individuals={"sf1", "sf2", "r1", "r2", "r3"},
        concept_extensions={
            "System_function": {"sf1", "sf2"},
            "Run": {"r1", "r2", "r3"},
        },
        slot_tuples={"run_of": {("r1", "sf1"), ("r2", "sf1"), ("r3", "sf2")}},
        quality_records=(
            QualityRecord("q1", "Processing_time", "r1", Fraction(10), "Sec"),
            QualityRecord("q2", "Processing_time", "r2", Fraction(50), "Sec"),
            QualityRecord("q3", "Processing_time", "r3", Fraction(10), "Sec"),
        ),
    )
    subject = Intersection(
        A("Run"), SlotRestriction("run_of", EXACTLY_ONE, A("System_function"))
    )

    def with_pct(p):
        body = QualityStatement(
            A("Processing_time"),
            subject,
            Interval(Fraction(0), Fraction(30), "Sec"),
            pct_annotations=(UAnnotation("F", ("inheres_in", "run_of"), p),),
        )
        return Element("QG6", Kind.QG, body)

    assert element_holds(with_pct(Fraction(1, 2)), w).status is HoldsStatus.HOLDS
    result = element_holds(with_pct(Fraction(4, 5)), w)
    assert result.status is HoldsStatus.VIOLATED and result.witnesses == ("sf1",)


def test_stacked_annotations_on_one_path_are_rejected():
    body = QualityStatement(
        A("Processing_time"),
        Intersection(
            A("Run"), SlotRestriction("run_of", EXACTLY_ONE, A("System_function"))
        ),
        Interval(Fraction(0), Fraction(30), "Sec"),
        pct_annotations=(
            UAnnotation("F", ("inheres_in", "run_of"), Fraction(4, 5)),
            UAnnotation("Y", ("inheres_in",), Fraction(9, 10)),
        ),
    )
    with pytest.raises(UnsupportedNestedU):
        element_holds(Element("QG6", Kind.QG, body), runs_world(1, 0))


def test_annotation_path_must_exist():
    body = QualityStatement(
        A("Processing_time"),
        A("File_search"),
        Interval(Fraction(0), Fraction(30), "Sec"),
        pct_annotations=(UAnnotation("X", ("inheres_in", "ghost"), Fraction(1, 2)),),
    )
    with pytest.raises(PathMismatch):
        element_holds(Element("Q", Kind.QC, body), runs_world(2, 0))


# ---- translation ----


def test_translate_function_element_golden():
    e = Element(
        "F1",
        Kind.F,
        FunctionDesc(
            "Activate",
            (
                SlotRestriction("actor", EXACTLY_ONE, A("Manager")),
                SlotRestriction("object", EXACTLY_ONE, A("Debit_card")),
            ),
        ),
    )
    concept, axioms = translate_element(e)
    assert concept == DLAnd(
        (
            DLAtomic("Function"),
            DLAtomic("Activate"),
            DLCard("actor", "exact", 1, DLAtomic("Manager")),
            DLCard("object", "exact", 1, DLAtomic("Debit_card")),
        )
    )
    assert axioms == []


def test_translate_quality_constraint_golden():
    e = Element(
        "QC3",
        Kind.QC,
        QualityStatement(
            A("Processing_time"),
            A("File_search"),
            Interval(Fraction(0), Fraction(30), "Sec"),
        ),
    )
    concept, axioms = translate_element(e)
    assert concept == DLAnd(
        (
            DLAtomic("QC"),
            DLAtomic("Processing_time"),
            DLExists("inheres_in", DLAtomic("File_search")),
            DLExists(
                "has_value_in",
                DLAnd(
                    (
                        DLDataRange("min", Fraction(0), "Sec"),
                        DLDataRange("max", Fraction(30), "Sec"),
                    )
                ),
            ),
        )
    )
    assert axioms == []


def test_translate_constraint_axiom_golden():
    e = Element(
        "FC1",
        Kind.FC,
        Subsumption(
            A("Data_table"), SlotRestriction("accessed_by", ONLY, A("Manager"))
        ),
    )
    concept, axioms = translate_element(e)
    assert axioms == [
        DLSubClassOf(
            DLAtomic("Data_table"), DLForAll("accessed_by", DLAtomic("Manager"))
        )
    ]
    assert concept == DLAnd(
        (
            DLAtomic("FC"),
            DLExists("subsumee", DLAtomic("Data_table")),
            DLExists("subsumer", DLForAll("accessed_by", DLAtomic("Manager"))),
        )
    )


def test_translate_min_cardinality():
    d = SlotRestriction("register_for", at_least(3), A("Class"))
    assert translate_description(d) == DLCard(
        "register_for", "min", 3, DLAtomic("Class")
    )


def test_translate_enumeration_as_nominal_union():
    assert translate_description(Enumeration(("E1", "E2"))) == DLOr(
        (DLNominal(("E1",)), DLNominal(("E2",)))
    )
    assert translate_description(Enumeration(("solo",))) == DLNominal(("solo",))


def test_translate_thing_nothing_and_difference():
    assert translate_description(THING) == DL_THING
    assert translate_description(NOTHING) == DL_NOTHING
    assert translate_description(Difference(A("A"), A("B"))) == DLAnd(
        (DLAtomic("A"), DLNot(DLAtomic("B")))
    )


def test_translate_annotated_quality_adds_pct_disjunct():
    body = QualityStatement(
        A("Processing_time"),
        A("File_search"),
        NamedRegion("Fast"),
        pct_annotations=(UAnnotation("X", ("inheres_in",), Fraction(4, 5)),),
    )
    concept, _ = translate_element(Element("QG5", Kind.QG, body))
    pct = DLExists(
        "pct",
        DLAnd(
            (DLDataRange("min", Fraction(4, 5), None), DLDataRange("max", Fraction(1), None))
        ),
    )
    assert concept.args[2] == DLExists(
        "inheres_in", DLOr((DLAtomic("File_search"), pct))
    )


def test_translate_observer_as_exact_one():
    body = QualityStatement(
        A("Style"),
        A("User_interface"),
        NamedRegion("Simple"),
        observers=(A("Surveyed_user"),),
    )
    concept, _ = translate_element(Element("QG", Kind.QG, body))
    assert concept.args[-1] == DLCard(
        "observed_by", "exact", 1, DLAtomic("Surveyed_user")
    )


def test_translate_element_rejects_unstructured():
    with pytest.raises(ValueError):
        translate_element(Element("G", Kind.GOAL, NaturalLanguage("hi")))


def test_translate_is_deterministic():
    e = Element(
        "F1",
        Kind.F,
        FunctionDesc("Send", (SlotRestriction("to", SOME, A("User")),)),
    )
    assert translate_element(e) == translate_element(e)


# ---- expand_u ----


def pct_slot(low):
    return SlotRestriction(
        "pct", EXACTLY_ONE, Region(Interval(low, Fraction(1)))
    )


def test_expand_single_annotation():
    body = QualityStatement(
        A("Processing_time"),
        A("File_search"),
        NamedRegion("Fast"),
        pct_annotations=(UAnnotation("X", ("inheres_in",), Fraction(4, 5)),),
    )
    expanded = expand_u(Element("QG5", Kind.QG, body))
    assert expanded.body.subject == Union(A("File_search"), pct_slot(Fraction(4, 5)))
    assert expanded.body.pct_annotations == ()


def test_expand_two_annotations_in_declaration_order():
    subject = Intersection(
        A("Run"), SlotRestriction("run_of", EXACTLY_ONE, A("System_function"))
    )
    body = QualityStatement(
        A("Processing_time"),
        subject,
        NamedRegion("Fast"),
        pct_annotations=(
            UAnnotation("F", ("inheres_in", "run_of"), Fraction(4, 5)),
            UAnnotation("Y", ("inheres_in",), Fraction(9, 10)),
        ),
    )
    expanded = expand_u(Element("QG6", Kind.QG, body))
    inner = Intersection(
        A("Run"),
        SlotRestriction(
            "run_of",
            EXACTLY_ONE,
            Union(A("System_function"), pct_slot(Fraction(4, 5))),
        ),
    )
    assert expanded.body.subject == Union(inner, pct_slot(Fraction(9, 10)))


def test_expand_observer_path_without_observers_fails():
    body = QualityStatement(
        A("Style"),
        A("User_interface"),
        NamedRegion("Simple"),
        pct_annotations=(UAnnotation("X", ("observed_by",), Fraction(4, 5)),),
    )
    with pytest.raises(PathMismatch):
        expand_u(Element("QG", Kind.QG, body))


def test_expand_requires_annotations():
    with pytest.raises(ValueError):
        expand_u(QC_ELEMENT)


# ---- evaluation agreement between the two views ----


def _random_description(rng: random.Random, depth: int):
    leaves = [
        lambda: A(rng.choice(["A", "B"])),
        lambda: THING,
        lambda: NOTHING,
        lambda: Enumeration(tuple(rng.sample(["i1", "i2", "i3"], rng.randint(1, 2)))),
    ]
    if depth <= 0:
        return rng.choice(leaves)()
    modifiers = [EXACTLY_ONE, SOME, ONLY, at_most(1), at_least(2), exactly(2)]
    branches = [
        lambda: Intersection(
            _random_description(rng, depth - 1), _random_description(rng, depth - 1)
        ),
        lambda: Union(
            _random_description(rng, depth - 1), _random_description(rng, depth - 1)
        ),
        lambda: Difference(
            _random_description(rng, depth - 1), _random_description(rng, depth - 1)
        ),
        lambda: SlotRestriction(
            rng.choice(["r", "s"]),
            rng.choice(modifiers),
            _random_description(rng, depth - 1),
        ),
        lambda: SlotRestriction(
            rng.choice(["r", "s"]),
            rng.choice(modifiers),
            Region(Interval(Fraction(0), Fraction(rng.randint(1, 30)))),
        ),
        lambda: InverseProjection(_random_description(rng, depth - 1), rng.choice(["r", "s"])),
    ]
    return rng.choice(branches + leaves)()


def _random_world(rng: random.Random) -> World:
    names = ["i1", "i2", "i3"][: rng.randint(1, 3)]
    extensions = {
        concept: frozenset(n for n in names if rng.random() < 0.5)
        for concept in ("A", "B")
    }
    tuples = {
        slot: frozenset(
            (x, y) for x in names for y in names if rng.random() < 0.3
        )
        for slot in ("r", "s")
    }
    data = {}
    for name in names:
        for slot in ("r", "s"):
            if rng.random() < 0.4:
                data[(name, slot)] = Fraction(rng.randint(0, 40))
    return world(
        individuals=names,
        concept_extensions=extensions,
        slot_tuples=tuples,
        data_values=data,
    )


def test_translated_concepts_agree_with_direct_evaluation():
    rng = random.Random(20260815)
    worlds = [_random_world(rng) for _ in range(8)]
    for _ in range(250):
        d = _random_description(rng, rng.randint(0, 3))
        concept = translate_description(d)
        for w in worlds:
            assert eval_dl(concept, w) == eval_description(d, w), (
                f"disagreement on {d!r}"
            )


def test_normalize_preserves_evaluation():
    rng = random.Random(99)
    worlds = [_random_world(rng) for _ in range(6)]
    for _ in range(200):
        d = _random_description(rng, rng.randint(0, 3))
        nd = normalize(d)
        for w in worlds:
            assert eval_description(nd, w) == eval_description(d, w), (
                f"normalize changed meaning of {d!r}"
            )
