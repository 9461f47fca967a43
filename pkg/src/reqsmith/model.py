"""Core data model shared by every other module.

Defines the description algebra (the expression language element bodies are
written in), the nine requirement element kinds, operator application
records, finite instance worlds, prototype region specifications, and the
model container, together with model validation, symbol collection, and
description normalization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Optional, Union as TypingUnion


# ===== PART 1: the description algebra =====


class Description:
    """Base class for description expressions (concept-level algebra)."""

    __slots__ = ()


class ModifierKind(Enum):
    EXACTLY_ONE = "exactly_one"
    AT_MOST = "at_most"
    AT_LEAST = "at_least"
    EXACTLY = "exactly"
    SOME = "some"
    ONLY = "only"


@dataclass(frozen=True)
class CardinalityModifier:
    """How many slot fillers of the given filler type a member must have.

    The default (no written modifier) requires exactly one matching filler.
    SOME requires at least one; ONLY requires every filler to match and is
    vacuously satisfied by individuals with no filler at all.
    """

    kind: ModifierKind
    n: Optional[int] = None

    def __post_init__(self) -> None:
        bounded = self.kind in (
            ModifierKind.AT_MOST,
            ModifierKind.AT_LEAST,
            ModifierKind.EXACTLY,
        )
        if bounded:
            if self.n is None or self.n < 1:
                raise ValueError("bounded cardinality modifiers need n >= 1")
        elif self.n is not None:
            raise ValueError(f"{self.kind.value} modifier takes no count")


EXACTLY_ONE = CardinalityModifier(ModifierKind.EXACTLY_ONE)
SOME = CardinalityModifier(ModifierKind.SOME)
ONLY = CardinalityModifier(ModifierKind.ONLY)


def at_most(n: int) -> CardinalityModifier:
    return CardinalityModifier(ModifierKind.AT_MOST, n)


def at_least(n: int) -> CardinalityModifier:
    return CardinalityModifier(ModifierKind.AT_LEAST, n)


def exactly(n: int) -> CardinalityModifier:
    return CardinalityModifier(ModifierKind.EXACTLY, n)


class RegionExpr:
    """Base class for quality region expressions (value-level algebra)."""

    __slots__ = ()


@dataclass(frozen=True)
class NamedRegion(RegionExpr):
    """A region referred to by name.

    `qualitative` is True for vague regions (no agreed measurement) and False
    for named regions that are backed by a measurable definition.
    """

    name: str
    qualitative: bool = True


@dataclass(frozen=True)
class Interval(RegionExpr):
    low: Fraction
    high: Fraction
    unit: Optional[str] = None

    def __post_init__(self) -> None:
        if self.low > self.high:
            raise ValueError("interval low bound exceeds high bound")


@dataclass(frozen=True)
class ValueSet(RegionExpr):
    """A finite set of admissible values (rationals or strings)."""

    values: tuple

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("value set must be non-empty")


@dataclass(frozen=True)
class AtomicConcept(Description):
    name: str


@dataclass(frozen=True)
class Enumeration(Description):
    """A finite set of named individuals, written `{id1, id2}`."""

    ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.ids:
            raise ValueError("enumeration must be non-empty")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("enumeration ids must be duplicate-free")


@dataclass(frozen=True)
class SlotRestriction(Description):
    """`<slot: modifier filler>`: members restricted through a slot."""

    slot: str
    modifier: CardinalityModifier
    filler: Description


@dataclass(frozen=True)
class InverseProjection(Description):
    """`D.s`: everything some member of D points at through slot s."""

    source: Description
    slot: str


@dataclass(frozen=True)
class Intersection(Description):
    left: Description
    right: Description


@dataclass(frozen=True)
class Union(Description):
    left: Description
    right: Description


@dataclass(frozen=True)
class Difference(Description):
    left: Description
    right: Description


@dataclass(frozen=True)
class Region(Description):
    """A region expression used in description position (slot fillers)."""

    expr: RegionExpr


@dataclass(frozen=True)
class Thing(Description):
    pass


@dataclass(frozen=True)
class Nothing(Description):
    pass


THING = Thing()
NOTHING = Nothing()


# ===== PART 2: elements and operator applications =====


class Kind(Enum):
    """The nine requirement element kinds."""

    GOAL = "goal"
    FG = "fg"
    F = "func"
    FC = "fc"
    QG = "qg"
    QC = "qc"
    CTG = "ctg"
    SC = "sc"
    DA = "da"

    @property
    def display(self) -> str:
        return _KIND_DISPLAY[self]


_KIND_DISPLAY = {
    Kind.GOAL: "Goal",
    Kind.FG: "FG",
    Kind.F: "F",
    Kind.FC: "FC",
    Kind.QG: "QG",
    Kind.QC: "QC",
    Kind.CTG: "CTG",
    Kind.SC: "SC",
    Kind.DA: "DA",
}

QUALITY_KINDS = frozenset({Kind.QG, Kind.QC})
SUBSUMPTION_KINDS = frozenset({Kind.FG, Kind.FC, Kind.CTG, Kind.SC, Kind.DA})


@dataclass(frozen=True)
class NaturalLanguage:
    """An unstructured body: raw text awaiting interpretation."""

    text: str


@dataclass(frozen=True)
class FunctionDesc:
    """A capability: a head verb concept plus slot restrictions."""

    head: str
    slots: tuple[SlotRestriction, ...] = ()


@dataclass(frozen=True)
class Subsumption:
    """`subsumee :< subsumer`: every subsumee member is a subsumer member."""

    subsumee: Description
    subsumer: Description


@dataclass(frozen=True)
class UAnnotation:
    """A per-fraction relaxation: only `pct_low` of the matched population
    needs to satisfy the statement.

    `matched_path` locates the relaxed population: `(inheres_in,)` relaxes
    over subjects, `(observed_by,)` over observers, and `(inheres_in, s)`
    over the fillers of slot `s` inside the subject description.
    """

    var_id: str
    matched_path: tuple[str, ...]
    pct_low: Fraction
    pct_high: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if not self.matched_path:
            raise ValueError("annotation path must be non-empty")
        if not (0 < self.pct_low <= 1):
            raise ValueError("pct_low must be in (0, 1]")
        if self.pct_high != 1:
            raise ValueError("pct_high is fixed at 1")


@dataclass(frozen=True)
class QualityStatement:
    """`Quality (Subject) :: Region` with optional observers and pct marks.

    The quality position is a description because focusing may widen an
    atomic quality into a union of quality types.
    """

    quality: Description
    subject: Description
    region: RegionExpr
    observers: tuple[Description, ...] = ()
    pct_annotations: tuple[UAnnotation, ...] = ()


ElementBody = TypingUnion[NaturalLanguage, FunctionDesc, Subsumption, QualityStatement]


@dataclass(frozen=True)
class Element:
    id: str
    kind: Kind
    body: ElementBody


class Operator(Enum):
    REDUCE = "reduce"
    INTERPRET = "interpret"
    FOCUS = "focus"
    SCALE = "scale"
    DEUNIVERSALIZE = "deuniv"
    RESOLVE = "resolve"
    OPERATIONALIZE = "operationalize"
    OBSERVE = "observe"


class Strength(Enum):
    STRENGTHENING = "strengthen"
    WEAKENING = "weaken"
    EQUATING = "equate"


class ScaleDirection(Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class ScaleFactor:
    """Either a pair of bound multipliers or a target region name.

    Down-scaling may only enlarge the region (low factor <= 1 <= high
    factor); up-scaling may only shrink it (low factor >= 1, high factor
    <= 1). A factor pair that moved both bounds the same way would shift the
    region instead of scaling it, which the multiplier constraints forbid.
    """

    low_factor: Optional[Fraction] = None
    high_factor: Optional[Fraction] = None
    region_name: Optional[str] = None

    def __post_init__(self) -> None:
        quantitative = self.low_factor is not None or self.high_factor is not None
        if quantitative:
            if self.low_factor is None or self.high_factor is None:
                raise ValueError("quantitative factor needs both multipliers")
            if self.region_name is not None:
                raise ValueError("factor is either quantitative or named, not both")
        elif self.region_name is None:
            raise ValueError("factor needs multipliers or a region name")

    @property
    def is_quantitative(self) -> bool:
        return self.low_factor is not None

    def allows(self, direction: ScaleDirection) -> bool:
        if not self.is_quantitative:
            return True
        if direction is ScaleDirection.DOWN:
            return self.low_factor <= 1 <= self.high_factor
        return self.low_factor >= 1 and self.high_factor <= 1


@dataclass(frozen=True)
class ScaleArgs:
    factor: ScaleFactor
    direction: ScaleDirection


@dataclass(frozen=True)
class FocusArgs:
    """Focus targets: quality names and/or subject descriptions."""

    targets: tuple[TypingUnion[str, Description], ...]


@dataclass(frozen=True)
class ObserveArgs:
    observer: Description


@dataclass(frozen=True)
class DeUniversalizeArgs:
    annotation: UAnnotation


OperatorArgs = TypingUnion[ScaleArgs, FocusArgs, ObserveArgs, DeUniversalizeArgs, None]


@dataclass(frozen=True)
class OperatorApplication:
    op: Operator
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    strength: Strength
    args: OperatorArgs = None


ONE_TO_ONE_OPS = frozenset(
    {Operator.INTERPRET, Operator.SCALE, Operator.DEUNIVERSALIZE, Operator.OBSERVE}
)
ONE_TO_MANY_OPS = frozenset({Operator.REDUCE, Operator.FOCUS, Operator.OPERATIONALIZE})

# Slots with special meaning. The reasoning-internal subset may not be used
# as an ordinary slot in user-written descriptions.
RESERVED_SLOTS = frozenset(
    {
        "inheres_in",
        "has_value_in",
        "observed_by",
        "pct",
        "subsumee",
        "subsumer",
        "exhibited_by",
        "has_function",
        "has_quality",
        "relate_to",
        "relate_to_one",
        "relate_to_many",
        "interpret_to",
        "reduce_to",
        "operationalize_to",
        "focus_to",
        "object",
        "actor",
    }
)
REASONING_INTERNAL_SLOTS = frozenset(
    {
        "relate_to",
        "relate_to_one",
        "relate_to_many",
        "interpret_to",
        "reduce_to",
        "operationalize_to",
        "pct",
        "subsumee",
        "subsumer",
    }
)


# ===== PART 3: worlds and membership specs =====


@dataclass(frozen=True)
class Quantity:
    """A rational value tagged with a measurement unit."""

    value: Fraction
    unit: Optional[str] = None


@dataclass(frozen=True)
class QualityRecord:
    """One concrete quality instance living in a world."""

    quality_id: str
    quality_concept: str
    bearer: str
    value: Fraction
    unit: Optional[str] = None
    observers: frozenset[str] = frozenset()


@dataclass(frozen=True, eq=False)
class World:
    """A finite instance structure: the brute-force semantic oracle.

    `data_values` maps (individual, slot) to a rational, string, or Quantity.
    Quality records are sugar: `materialize()` folds them into individuals,
    extensions, slot tuples, and data values without losing information.
    """

    individuals: frozenset[str] = frozenset()
    concept_extensions: dict[str, frozenset[str]] = field(default_factory=dict)
    slot_tuples: dict[str, frozenset[tuple[str, str]]] = field(default_factory=dict)
    data_values: dict[tuple[str, str], object] = field(default_factory=dict)
    quality_records: tuple[QualityRecord, ...] = ()

    def extension(self, concept: str) -> frozenset[str]:
        return self.concept_extensions.get(concept, frozenset())

    def tuples(self, slot: str) -> frozenset[tuple[str, str]]:
        return self.slot_tuples.get(slot, frozenset())

    def materialize(self) -> "World":
        """Fold quality records into plain world structure."""
        if not self.quality_records:
            return self
        individuals = set(self.individuals)
        extensions = {c: set(e) for c, e in self.concept_extensions.items()}
        tuples = {s: set(t) for s, t in self.slot_tuples.items()}
        data = dict(self.data_values)
        for rec in self.quality_records:
            individuals.add(rec.quality_id)
            individuals.add(rec.bearer)
            extensions.setdefault(rec.quality_concept, set()).add(rec.quality_id)
            tuples.setdefault("inheres_in", set()).add((rec.quality_id, rec.bearer))
            for obs in rec.observers:
                individuals.add(obs)
                tuples.setdefault("observed_by", set()).add((rec.quality_id, obs))
            data[(rec.quality_id, "has_value_in")] = Quantity(rec.value, rec.unit)
        return World(
            individuals=frozenset(individuals),
            concept_extensions={c: frozenset(e) for c, e in extensions.items()},
            slot_tuples={s: frozenset(t) for s, t in tuples.items()},
            data_values=data,
            quality_records=(),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, World):
            return NotImplemented
        a, b = self.materialize(), other.materialize()
        return (
            a.individuals == b.individuals
            and _nonempty(a.concept_extensions) == _nonempty(b.concept_extensions)
            and _nonempty(a.slot_tuples) == _nonempty(b.slot_tuples)
            and a.data_values == b.data_values
        )


def _nonempty(mapping: dict) -> dict:
    return {k: v for k, v in mapping.items() if v}


@dataclass(frozen=True)
class PointPrototypes:
    """Prototype points of a region, e.g. two observed exemplar values."""

    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("prototype point set must be non-empty")


@dataclass(frozen=True)
class IntervalPrototypes:
    """A whole interval of prototype values."""

    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError("prototype interval needs a < b")


@dataclass(frozen=True)
class PrototypeRegion:
    name: str
    prototypes: TypingUnion[PointPrototypes, IntervalPrototypes]


@dataclass(frozen=True)
class MembershipSpec:
    """Prototype regions of a one-dimensional quality space."""

    quality: str
    regions: tuple[PrototypeRegion, ...]


# ===== PART 4: the model container =====


@dataclass(frozen=True)
class Model:
    name: str = ""
    elements: tuple[Element, ...] = ()
    applications: tuple[OperatorApplication, ...] = ()
    conflicts: tuple[frozenset[str], ...] = ()
    axioms: tuple[Subsumption, ...] = ()
    fulfilled_marks: frozenset[str] = frozenset()
    world: Optional[World] = None
    membership_specs: tuple[MembershipSpec, ...] = ()

    def by_id(self) -> dict[str, Element]:
        return {e.id: e for e in self.elements}

    def element(self, eid: str) -> Element:
        for e in self.elements:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def has_element(self, eid: str) -> bool:
        return any(e.id == eid for e in self.elements)

    def dropped_ids(self) -> frozenset[str]:
        """Element ids excluded by conflict resolution."""
        dropped: set[str] = set()
        for app in self.applications:
            if app.op is Operator.RESOLVE:
                dropped.update(set(app.inputs) - set(app.outputs))
        return frozenset(dropped)

    def with_element(self, element: Element) -> "Model":
        return replace(self, elements=self.elements + (element,))

    def with_application(self, app: OperatorApplication) -> "Model":
        return replace(self, applications=self.applications + (app,))

    def spec_for(self, quality: str) -> Optional[MembershipSpec]:
        for spec in self.membership_specs:
            if spec.quality == quality:
                return spec
        return None


@dataclass(frozen=True)
class ValidationDiagnostic:
    subject_id: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject_id}: [{self.rule}] {self.message}"


# ===== PART 5: validation =====

_OPERATIONALIZE_TARGETS = {
    Kind.FG: {Kind.F, Kind.FC, Kind.DA},
    Kind.QG: {Kind.QC, Kind.F, Kind.FC, Kind.DA},
    Kind.CTG: {Kind.SC, Kind.DA},
    Kind.GOAL: {Kind.DA},
}


def validate_model(model: Model) -> list[ValidationDiagnostic]:
    """Check every structural model invariant; return one diagnostic each.

    An empty result means the model is well-formed. Diagnostics are data and
    never raised.
    """
    diags: list[ValidationDiagnostic] = []
    seen: set[str] = set()
    for element in model.elements:
        if element.id in seen:
            diags.append(
                ValidationDiagnostic(element.id, "unique-ids", "duplicate element id")
            )
        seen.add(element.id)
        diags.extend(_validate_element(element))

    by_id = model.by_id()
    for index, app in enumerate(model.applications):
        app_id = f"application[{index}]"
        diags.extend(_validate_application(app, app_id, by_id))
    for index, conflict in enumerate(model.conflicts):
        cid = f"conflict[{index}]"
        if len(conflict) < 2:
            diags.append(
                ValidationDiagnostic(cid, "conflict-size", "conflict sets need >= 2 ids")
            )
        for eid in conflict:
            if eid not in by_id:
                diags.append(
                    ValidationDiagnostic(cid, "dangling-reference", f"unknown id {eid}")
                )
    for eid in sorted(model.fulfilled_marks):
        if eid not in by_id:
            diags.append(
                ValidationDiagnostic(
                    "fulfilled_marks", "dangling-reference", f"unknown id {eid}"
                )
            )
    dropped = model.dropped_ids()
    for eid in sorted(dropped & model.fulfilled_marks):
        diags.append(
            ValidationDiagnostic(
                eid, "dropped-fulfilled", "resolution-dropped element marked fulfilled"
            )
        )
    diags.extend(_check_acyclic(model))
    for axiom in model.axioms:
        for desc in (axiom.subsumee, axiom.subsumer):
            diags.extend(_validate_description(desc, "axiom"))
    return diags


def _validate_element(element: Element) -> list[ValidationDiagnostic]:
    diags: list[ValidationDiagnostic] = []
    body = element.body
    kind = element.kind

    if isinstance(body, NaturalLanguage):
        return diags
    if isinstance(body, FunctionDesc):
        if kind is not Kind.F and kind is not Kind.GOAL:
            diags.append(
                ValidationDiagnostic(
                    element.id, "kind-body", f"{kind.display} cannot carry a function body"
                )
            )
        for slot in body.slots:
            diags.extend(_validate_description(slot, element.id))
    elif isinstance(body, Subsumption):
        if kind not in SUBSUMPTION_KINDS and kind is not Kind.GOAL:
            diags.append(
                ValidationDiagnostic(
                    element.id,
                    "kind-body",
                    f"{kind.display} cannot carry a subsumption body",
                )
            )
        diags.extend(_validate_description(body.subsumee, element.id))
        diags.extend(_validate_description(body.subsumer, element.id))
    elif isinstance(body, QualityStatement):
        if kind not in QUALITY_KINDS and kind is not Kind.GOAL:
            diags.append(
                ValidationDiagnostic(
                    element.id, "kind-body", f"{kind.display} cannot carry a quality body"
                )
            )
        if kind is Kind.QC:
            region = body.region
            if isinstance(region, NamedRegion) and region.qualitative:
                diags.append(
                    ValidationDiagnostic(
                        element.id,
                        "qc-region",
                        "a quality constraint needs a measurable region",
                    )
                )
        diags.extend(_validate_description(body.quality, element.id))
        diags.extend(_validate_description(body.subject, element.id))
        for obs in body.observers:
            diags.extend(_validate_description(obs, element.id))
        paths = [ann.matched_path for ann in body.pct_annotations]
        if len(set(paths)) != len(paths):
            diags.append(
                ValidationDiagnostic(
                    element.id, "pct-paths", "two pct annotations share one path"
                )
            )
    return diags


def _validate_application(
    app: OperatorApplication, app_id: str, by_id: dict[str, Element]
) -> list[ValidationDiagnostic]:
    diags: list[ValidationDiagnostic] = []
    for eid in app.inputs + app.outputs:
        if eid not in by_id:
            diags.append(
                ValidationDiagnostic(app_id, "dangling-reference", f"unknown id {eid}")
            )
    if app.op is Operator.RESOLVE:
        if len(app.inputs) < 2:
            diags.append(
                ValidationDiagnostic(
                    app_id, "arity", "resolution takes at least two inputs"
                )
            )
    else:
        if len(app.inputs) != 1:
            diags.append(
                ValidationDiagnostic(
                    app_id, "arity", f"{app.op.value} takes exactly one input"
                )
            )
        if not app.outputs:
            diags.append(
                ValidationDiagnostic(
                    app_id, "arity", f"{app.op.value} needs at least one output"
                )
            )
    if app.op in ONE_TO_ONE_OPS and len(app.outputs) != 1:
        diags.append(
            ValidationDiagnostic(
                app_id, "arity", f"{app.op.value} produces exactly one output"
            )
        )
    if any(eid not in by_id for eid in app.inputs + app.outputs):
        return diags

    in_kinds = [by_id[eid].kind for eid in app.inputs]
    out_kinds = [by_id[eid].kind for eid in app.outputs]
    if app.op is Operator.REDUCE and in_kinds:
        for eid, kind in zip(app.outputs, out_kinds):
            if kind is not Kind.DA and kind is not in_kinds[0]:
                diags.append(
                    ValidationDiagnostic(
                        app_id,
                        "kind-routing",
                        f"reduction output {eid} must keep kind {in_kinds[0].display}",
                    )
                )
    elif app.op is Operator.INTERPRET and in_kinds and out_kinds:
        if in_kinds[0] is not Kind.GOAL and out_kinds[0] is not in_kinds[0]:
            diags.append(
                ValidationDiagnostic(
                    app_id, "kind-routing", "interpretation cannot change a non-goal kind"
                )
            )
    elif app.op is Operator.OPERATIONALIZE and in_kinds:
        allowed = _OPERATIONALIZE_TARGETS.get(in_kinds[0])
        if allowed is None:
            diags.append(
                ValidationDiagnostic(
                    app_id,
                    "kind-routing",
                    f"{in_kinds[0].display} cannot be operationalized",
                )
            )
        else:
            for eid, kind in zip(app.outputs, out_kinds):
                if kind not in allowed:
                    diags.append(
                        ValidationDiagnostic(
                            app_id,
                            "kind-routing",
                            f"operationalization of {in_kinds[0].display} cannot "
                            f"produce {kind.display} ({eid})",
                        )
                    )
    elif app.op in (Operator.FOCUS, Operator.DEUNIVERSALIZE) and in_kinds:
        if in_kinds[0] not in QUALITY_KINDS:
            diags.append(
                ValidationDiagnostic(
                    app_id, "kind-routing", f"{app.op.value} applies to quality elements"
                )
            )
        for eid, kind in zip(app.outputs, out_kinds):
            if kind not in QUALITY_KINDS:
                diags.append(
                    ValidationDiagnostic(
                        app_id, "kind-routing", f"output {eid} must stay a quality element"
                    )
                )
    elif app.op is Operator.SCALE and in_kinds:
        if in_kinds[0] not in QUALITY_KINDS:
            diags.append(
                ValidationDiagnostic(
                    app_id, "kind-routing", "scaling applies to quality elements"
                )
            )
        for eid, kind in zip(app.outputs, out_kinds):
            if kind is not in_kinds[0]:
                diags.append(
                    ValidationDiagnostic(
                        app_id, "kind-routing", f"scaled output {eid} must keep its kind"
                    )
                )
    elif app.op is Operator.OBSERVE and in_kinds:
        if in_kinds[0] not in QUALITY_KINDS:
            diags.append(
                ValidationDiagnostic(
                    app_id, "kind-routing", "observation applies to quality elements"
                )
            )
        for eid, kind in zip(app.outputs, out_kinds):
            if kind is not Kind.QC:
                diags.append(
                    ValidationDiagnostic(
                        app_id,
                        "kind-routing",
                        f"observed output {eid} must be a quality constraint",
                    )
                )
    return diags


def _check_acyclic(model: Model) -> list[ValidationDiagnostic]:
    edges: dict[str, set[str]] = {}
    for app in model.applications:
        for src in app.inputs:
            # a resolution may keep a survivor among its outputs; that is
            # selection, not derivation, so it adds no edge
            targets = set(app.outputs) - set(app.inputs) if (
                app.op is Operator.RESOLVE
            ) else set(app.outputs)
            edges.setdefault(src, set()).update(targets)
    color: dict[str, int] = {}

    def visit(node: str, trail: tuple[str, ...]) -> Optional[tuple[str, ...]]:
        color[node] = 1
        for nxt in sorted(edges.get(node, ())):
            if color.get(nxt) == 1:
                return trail + (nxt,)
            if color.get(nxt, 0) == 0:
                cycle = visit(nxt, trail + (nxt,))
                if cycle:
                    return cycle
        color[node] = 2
        return None

    for start in sorted(edges):
        if color.get(start, 0) == 0:
            cycle = visit(start, (start,))
            if cycle:
                return [
                    ValidationDiagnostic(
                        cycle[0],
                        "acyclic",
                        "application graph contains a cycle: " + " -> ".join(cycle),
                    )
                ]
    return []


def _validate_description(desc: Description, owner: str) -> list[ValidationDiagnostic]:
    diags: list[ValidationDiagnostic] = []

    def walk(d: Description) -> None:
        if isinstance(d, SlotRestriction):
            if d.slot in REASONING_INTERNAL_SLOTS:
                diags.append(
                    ValidationDiagnostic(
                        owner, "reserved-slot", f"slot {d.slot} is reserved for reasoning"
                    )
                )
            walk(d.filler)
        elif isinstance(d, InverseProjection):
            if d.slot in REASONING_INTERNAL_SLOTS:
                diags.append(
                    ValidationDiagnostic(
                        owner, "reserved-slot", f"slot {d.slot} is reserved for reasoning"
                    )
                )
            walk(d.source)
        elif isinstance(d, (Intersection, Union, Difference)):
            left_region = isinstance(d.left, Region)
            right_region = isinstance(d.right, Region)
            if left_region != right_region:
                diags.append(
                    ValidationDiagnostic(
                        owner,
                        "region-mixing",
                        "regions combine only with regions, not with concepts",
                    )
                )
            walk(d.left)
            walk(d.right)

    walk(desc)
    return diags


# ===== PART 6: symbol collection and normalization =====


def free_symbols(
    model: Model,
) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Collect (concept names, slot names, region names, individual ids)
    appearing in any description of the model, each sorted."""
    concepts: set[str] = set()
    slots: set[str] = set()
    regions: set[str] = set()
    individuals: set[str] = set()

    def walk(d: Description) -> None:
        if isinstance(d, AtomicConcept):
            concepts.add(d.name)
        elif isinstance(d, Enumeration):
            individuals.update(d.ids)
        elif isinstance(d, SlotRestriction):
            slots.add(d.slot)
            walk(d.filler)
        elif isinstance(d, InverseProjection):
            slots.add(d.slot)
            walk(d.source)
        elif isinstance(d, (Intersection, Union, Difference)):
            walk(d.left)
            walk(d.right)
        elif isinstance(d, Region):
            if isinstance(d.expr, NamedRegion):
                regions.add(d.expr.name)

    def walk_region(r: RegionExpr) -> None:
        if isinstance(r, NamedRegion):
            regions.add(r.name)

    for element in model.elements:
        body = element.body
        if isinstance(body, FunctionDesc):
            concepts.add(body.head)
            for slot in body.slots:
                walk(slot)
        elif isinstance(body, Subsumption):
            walk(body.subsumee)
            walk(body.subsumer)
        elif isinstance(body, QualityStatement):
            walk(body.quality)
            walk(body.subject)
            walk_region(body.region)
            for obs in body.observers:
                walk(obs)
    for axiom in model.axioms:
        walk(axiom.subsumee)
        walk(axiom.subsumer)
    for app in model.applications:
        if isinstance(app.args, ObserveArgs):
            walk(app.args.observer)
        elif isinstance(app.args, FocusArgs):
            for target in app.args.targets:
                if isinstance(target, Description):
                    walk(target)
    return (
        tuple(sorted(concepts)),
        tuple(sorted(slots)),
        tuple(sorted(regions)),
        tuple(sorted(individuals)),
    )


def _region_key(r: RegionExpr) -> tuple:
    if isinstance(r, NamedRegion):
        return (0, r.name, r.qualitative)
    if isinstance(r, Interval):
        return (1, r.low, r.high, r.unit or "")
    values = tuple(sorted((str(type(v).__name__), str(v)) for v in r.values))
    return (2,) + values


def _sort_key(d: Description) -> tuple:
    if isinstance(d, Nothing):
        return (0,)
    if isinstance(d, Thing):
        return (1,)
    if isinstance(d, AtomicConcept):
        return (2, d.name)
    if isinstance(d, Enumeration):
        return (3,) + tuple(sorted(d.ids))
    if isinstance(d, Region):
        return (4,) + _region_key(d.expr)
    if isinstance(d, SlotRestriction):
        return (5, d.slot, d.modifier.kind.value, d.modifier.n or 0, _sort_key(d.filler))
    if isinstance(d, InverseProjection):
        return (6, d.slot, _sort_key(d.source))
    if isinstance(d, Intersection):
        return (7, _sort_key(d.left), _sort_key(d.right))
    if isinstance(d, Union):
        return (8, _sort_key(d.left), _sort_key(d.right))
    if isinstance(d, Difference):
        return (9, _sort_key(d.left), _sort_key(d.right))
    raise TypeError(f"unknown description: {d!r}")


def _flatten(d: Description, cls: type) -> list[Description]:
    if isinstance(d, cls):
        return _flatten(d.left, cls) + _flatten(d.right, cls)
    return [d]


def _rebuild(parts: list[Description], cls: type) -> Description:
    result = parts[0]
    for part in parts[1:]:
        result = cls(result, part)
    return result


def normalize(d: Description) -> Description:
    """Return the canonical form of a description.

    Intersections and unions are flattened, deduplicated, and operand-sorted;
    identity and absorbing elements are removed; `X - X` collapses to
    Nothing. The result is idempotent under repeated normalization and has
    the same extension in every world.
    """
    if isinstance(d, SlotRestriction):
        return SlotRestriction(d.slot, d.modifier, normalize(d.filler))
    if isinstance(d, InverseProjection):
        source = normalize(d.source)
        if isinstance(source, Nothing):
            return NOTHING
        return InverseProjection(source, d.slot)
    if isinstance(d, Intersection):
        parts: list[Description] = []
        for part in _flatten(d, Intersection):
            normed = normalize(part)
            if isinstance(normed, Nothing):
                return NOTHING
            if isinstance(normed, Thing):
                continue
            parts.extend(_flatten(normed, Intersection))
        unique = sorted(set(parts), key=_sort_key)
        if not unique:
            return THING
        return _rebuild(unique, Intersection)
    if isinstance(d, Union):
        parts = []
        for part in _flatten(d, Union):
            normed = normalize(part)
            if isinstance(normed, Thing):
                return THING
            if isinstance(normed, Nothing):
                continue
            parts.extend(_flatten(normed, Union))
        unique = sorted(set(parts), key=_sort_key)
        if not unique:
            return NOTHING
        return _rebuild(unique, Union)
    if isinstance(d, Difference):
        left = normalize(d.left)
        right = normalize(d.right)
        if left == right or isinstance(left, Nothing):
            return NOTHING
        if isinstance(right, Nothing):
            return left
        if isinstance(right, Thing):
            return NOTHING
        return Difference(left, right)
    return d
