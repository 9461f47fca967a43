"""Finite-world evaluation and logic translation for structured elements.

Two complementary views of the same meaning live here. `eval_description`
computes the exact extension of a description over a small closed world, and
`element_holds` checks a structured element against such a world, including
the counting rule for percentage annotations. `translate_description` and
`translate_element` map the same syntax into a small description-logic
fragment used by the subsumption reasoner and the exporter.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from .model import (
    AtomicConcept,
    Description,
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
    Nothing,
    QualityStatement,
    Quantity,
    Region,
    RegionExpr,
    SlotRestriction,
    Subsumption,
    Thing,
    UAnnotation,
    Union,
    ValueSet,
    World,
    ModifierKind,
    SOME,
    EXACTLY_ONE,
)


class UnsupportedNestedU(ValueError):
    """Two percentage annotations stack on the same path; world checking
    supports at most one level of nesting per path."""


class PathMismatch(ValueError):
    """A percentage annotation names a path that does not occur in the
    element it decorates."""


# ===== PART 1: holds-checking result =====


class HoldsStatus(Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class HoldsResult:
    status: HoldsStatus
    witnesses: tuple[str, ...] = ()


HOLDS = HoldsResult(HoldsStatus.HOLDS)
NOT_APPLICABLE = HoldsResult(HoldsStatus.NOT_APPLICABLE)


def violated(witnesses) -> HoldsResult:
    return HoldsResult(HoldsStatus.VIOLATED, tuple(sorted(witnesses)))


# ===== PART 2: set-theoretic evaluation =====


def _value_in_region(value, expr: RegionExpr) -> bool:
    if isinstance(expr, NamedRegion):
        return False
    raw, unit = value, None
    if isinstance(value, Quantity):
        raw, unit = value.value, value.unit
    if isinstance(expr, Interval):
        if isinstance(raw, str):
            return False
        if expr.unit and unit and expr.unit != unit:
            return False
        return expr.low <= raw <= expr.high
    return raw in expr.values


def _modifier_ok(modifier, count: int) -> bool:
    kind = modifier.kind
    if kind is ModifierKind.EXACTLY_ONE:
        return count == 1
    if kind is ModifierKind.SOME:
        return count >= 1
    if kind is ModifierKind.AT_MOST:
        return count <= modifier.n
    if kind is ModifierKind.AT_LEAST:
        return count >= modifier.n
    return count == modifier.n  # EXACTLY; ONLY is handled separately


def _eval(d: Description, w: World) -> frozenset[str]:
    if isinstance(d, AtomicConcept):
        return w.extension(d.name)
    if isinstance(d, Thing):
        return frozenset(w.individuals)
    if isinstance(d, Nothing):
        return frozenset()
    if isinstance(d, Enumeration):
        return frozenset(d.ids) & w.individuals
    if isinstance(d, Intersection):
        return _eval(d.left, w) & _eval(d.right, w)
    if isinstance(d, Union):
        return _eval(d.left, w) | _eval(d.right, w)
    if isinstance(d, Difference):
        return _eval(d.left, w) - _eval(d.right, w)
    if isinstance(d, Region):
        return frozenset()
    if isinstance(d, InverseProjection):
        sources = _eval(d.source, w)
        return frozenset(y for (x, y) in w.tuples(d.slot) if x in sources)
    assert isinstance(d, SlotRestriction)
    return _eval_restriction(d, w)


def _eval_restriction(d: SlotRestriction, w: World) -> frozenset[str]:
    result = set()
    if isinstance(d.filler, Region):
        expr = d.filler.expr
        for x in w.individuals:
            value = w.data_values.get((x, d.slot))
            present = 0 if value is None else 1
            count = 1 if present and _value_in_region(value, expr) else 0
            if d.modifier.kind is ModifierKind.ONLY:
                if count == present:
                    result.add(x)
            elif _modifier_ok(d.modifier, count):
                result.add(x)
        return frozenset(result)
    targets = _eval(d.filler, w)
    outgoing: dict[str, list[str]] = {}
    for x, y in w.tuples(d.slot):
        outgoing.setdefault(x, []).append(y)
    for x in w.individuals:
        succ = outgoing.get(x, [])
        count = sum(1 for y in succ if y in targets)
        if d.modifier.kind is ModifierKind.ONLY:
            if count == len(succ):
                result.add(x)
        elif _modifier_ok(d.modifier, count):
            result.add(x)
    return frozenset(result)


def eval_description(d: Description, world: World) -> frozenset[str]:
    """Compute the exact extension of `d` over a finite closed world."""
    return _eval(d, world.materialize())


# ===== PART 3: checking elements against a world =====


def _find_slot_filler(d: Description, slot: str) -> Optional[Description]:
    if isinstance(d, SlotRestriction):
        if d.slot == slot:
            return d.filler
        return _find_slot_filler(d.filler, slot)
    if isinstance(d, (Intersection, Union, Difference)):
        found = _find_slot_filler(d.left, slot)
        if found is not None:
            return found
        return _find_slot_filler(d.right, slot)
    if isinstance(d, InverseProjection):
        return _find_slot_filler(d.source, slot)
    return None


def _nested_pair(annotations) -> bool:
    for i, first in enumerate(annotations):
        for second in annotations[i + 1 :]:
            a, b = first.matched_path, second.matched_path
            shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
            if longer[: len(shorter)] == shorter:
                return True
    return False


def element_holds(e: Element, world: World) -> HoldsResult:
    """Check one structured element against a world.

    Unstructured and purely functional bodies have nothing to check, so
    they come back NotApplicable, as do quality statements whose subject
    (or declared observer set) has an empty extension.
    """
    body = e.body
    if isinstance(body, (NaturalLanguage, FunctionDesc)):
        return NOT_APPLICABLE
    flat = world.materialize()
    if isinstance(body, Subsumption):
        extra = _eval(body.subsumee, flat) - _eval(body.subsumer, flat)
        return HOLDS if not extra else violated(extra)
    assert isinstance(body, QualityStatement)
    return _quality_holds(body, flat)


def _quality_holds(body: QualityStatement, flat: World) -> HoldsResult:
    annotations = body.pct_annotations
    if len(annotations) >= 2 and _nested_pair(annotations):
        raise UnsupportedNestedU(
            "stacked percentage annotations on one path cannot be checked "
            "against a world; expand them syntactically instead"
        )
    subjects = _eval(body.subject, flat)
    if not subjects:
        return NOT_APPLICABLE

    quality_ext = _eval(body.quality, flat)
    bearer_of: dict[str, set[str]] = {}
    for q, x in flat.tuples("inheres_in"):
        if q in quality_ext and x in subjects:
            bearer_of.setdefault(q, set()).add(x)

    observed = flat.tuples("observed_by")
    if body.observers:
        allowed: list[frozenset[str]] = []
        for observer in body.observers:
            members = _eval(observer, flat)
            if not members:
                return NOT_APPLICABLE
            allowed.append(members)
        bearer_of = {
            q: bearers
            for q, bearers in bearer_of.items()
            if all(any((q, u) in observed for u in members) for members in allowed)
        }

    def good(q: str) -> bool:
        if isinstance(body.region, NamedRegion):
            return q in flat.extension(body.region.name)
        value = flat.data_values.get((q, "has_value_in"))
        return value is not None and _value_in_region(value, body.region)

    if not annotations:
        bad = [q for q in bearer_of if not good(q)]
        return HOLDS if not bad else violated(bad)

    all_witnesses: list[str] = []
    saw_not_applicable = False
    for ann in annotations:
        outcome = _counted_fraction(ann, body, flat, subjects, bearer_of, good)
        if outcome is None:
            saw_not_applicable = True
        else:
            all_witnesses.extend(outcome)
    if all_witnesses:
        return violated(all_witnesses)
    if saw_not_applicable:
        return NOT_APPLICABLE
    return HOLDS


def _counted_fraction(
    ann: UAnnotation, body, flat, subjects, bearer_of, good
) -> Optional[list[str]]:
    """Apply one annotation's counting rule.

    Returns the failing group members when the satisfying fraction falls
    short, an empty list when it meets the bound, or None when the group
    the annotation quantifies over is empty.
    """
    path = ann.matched_path
    if path == ("inheres_in",):
        group = subjects

        def satisfied(x: str) -> bool:
            return all(good(q) for q, bearers in bearer_of.items() if x in bearers)

    elif path == ("observed_by",):
        members: set[str] = set()
        for observer in body.observers:
            members |= _eval(observer, flat)
        if not members:
            return None
        observed = flat.tuples("observed_by")
        group = frozenset(members)

        def satisfied(u: str) -> bool:
            return all(good(q) for q in bearer_of if (q, u) in observed)

    elif path[0] == "inheres_in" and len(path) == 2:
        filler = _find_slot_filler(body.subject, path[1])
        if filler is None:
            raise PathMismatch(f"no slot {path[1]!r} in the subject description")
        group = _eval(filler, flat)
        if not group:
            return None
        pairs = flat.tuples(path[1])

        def satisfied(f: str) -> bool:
            bearers = {x for (x, y) in pairs if y == f and x in subjects}
            return all(
                good(q)
                for q, q_bearers in bearer_of.items()
                if q_bearers & bearers
            )

    else:
        raise PathMismatch(
            f"annotation path {'.'.join(path)!r} is not checkable against a world"
        )

    winners = sum(1 for member in group if satisfied(member))
    if Fraction(winners, len(group)) >= ann.pct_low:
        return []
    return [member for member in sorted(group) if not satisfied(member)]


# ===== PART 4: the logic fragment =====


@dataclass(frozen=True)
class DLConcept:
    pass


@dataclass(frozen=True)
class DLThing(DLConcept):
    pass


@dataclass(frozen=True)
class DLNothing(DLConcept):
    pass


@dataclass(frozen=True)
class DLAtomic(DLConcept):
    name: str


@dataclass(frozen=True)
class DLAnd(DLConcept):
    args: tuple[DLConcept, ...]


@dataclass(frozen=True)
class DLOr(DLConcept):
    args: tuple[DLConcept, ...]


@dataclass(frozen=True)
class DLNot(DLConcept):
    inner: DLConcept


@dataclass(frozen=True)
class DLExists(DLConcept):
    slot: str
    filler: DLConcept


@dataclass(frozen=True)
class DLForAll(DLConcept):
    slot: str
    filler: DLConcept


@dataclass(frozen=True)
class DLCard(DLConcept):
    slot: str
    kind: str  # min | max | exact
    n: int
    filler: DLConcept

    def __post_init__(self):
        if self.kind not in ("min", "max", "exact"):
            raise ValueError(f"bad cardinality kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("cardinalities start at 1")


@dataclass(frozen=True)
class DLExistsInverse(DLConcept):
    slot: str
    filler: DLConcept


@dataclass(frozen=True)
class DLDataRange(DLConcept):
    facet: str  # min | max | eq
    value: object
    unit: Optional[str] = None

    def __post_init__(self):
        if self.facet not in ("min", "max", "eq"):
            raise ValueError(f"bad facet {self.facet!r}")


@dataclass(frozen=True)
class DLNominal(DLConcept):
    ids: tuple[str, ...]


@dataclass(frozen=True)
class DLSubClassOf:
    sub: DLConcept
    sup: DLConcept


@dataclass(frozen=True)
class DLDisjoint:
    a: DLConcept
    b: DLConcept


DL_THING = DLThing()
DL_NOTHING = DLNothing()


# ===== PART 5: translation =====


def translate_region(expr: RegionExpr) -> DLConcept:
    if isinstance(expr, NamedRegion):
        return DLAtomic(expr.name)
    if isinstance(expr, Interval):
        return DLAnd(
            (
                DLDataRange("min", expr.low, expr.unit),
                DLDataRange("max", expr.high, expr.unit),
            )
        )
    parts = tuple(DLDataRange("eq", value) for value in expr.values)
    return parts[0] if len(parts) == 1 else DLOr(parts)


def translate_description(d: Description) -> DLConcept:
    """Map a description to its logical form, preserving structure."""
    if isinstance(d, AtomicConcept):
        return DLAtomic(d.name)
    if isinstance(d, Thing):
        return DL_THING
    if isinstance(d, Nothing):
        return DL_NOTHING
    if isinstance(d, Enumeration):
        parts = tuple(DLNominal((i,)) for i in d.ids)
        return parts[0] if len(parts) == 1 else DLOr(parts)
    if isinstance(d, Intersection):
        return DLAnd((translate_description(d.left), translate_description(d.right)))
    if isinstance(d, Union):
        return DLOr((translate_description(d.left), translate_description(d.right)))
    if isinstance(d, Difference):
        return DLAnd(
            (translate_description(d.left), DLNot(translate_description(d.right)))
        )
    if isinstance(d, Region):
        return translate_region(d.expr)
    if isinstance(d, InverseProjection):
        return DLExistsInverse(d.slot, translate_description(d.source))
    assert isinstance(d, SlotRestriction)
    filler = translate_description(d.filler)
    kind = d.modifier.kind
    if kind is ModifierKind.EXACTLY_ONE:
        return DLCard(d.slot, "exact", 1, filler)
    if kind is ModifierKind.SOME:
        return DLExists(d.slot, filler)
    if kind is ModifierKind.ONLY:
        return DLForAll(d.slot, filler)
    card_kind = {
        ModifierKind.AT_MOST: "max",
        ModifierKind.AT_LEAST: "min",
        ModifierKind.EXACTLY: "exact",
    }[kind]
    return DLCard(d.slot, card_kind, d.modifier.n, filler)


def _pct_restriction(ann: UAnnotation, modifier) -> SlotRestriction:
    return SlotRestriction(
        "pct", modifier, Region(Interval(ann.pct_low, ann.pct_high))
    )


def _wrap_at_path(d: Description, rest: tuple[str, ...], pct: SlotRestriction):
    if not rest:
        return Union(d, pct)
    replaced = _replace_first(d, rest, pct)
    if replaced is None:
        raise PathMismatch(f"no slot {rest[0]!r} found on the annotation path")
    return replaced


def _replace_first(d: Description, rest, pct) -> Optional[Description]:
    """Rebuild `d` with the first restriction on `rest[0]` deepened; None
    when the slot does not occur anywhere."""
    if isinstance(d, SlotRestriction):
        if d.slot == rest[0]:
            return SlotRestriction(
                d.slot, d.modifier, _wrap_at_path(d.filler, rest[1:], pct)
            )
        inner = _replace_first(d.filler, rest, pct)
        if inner is not None:
            return SlotRestriction(d.slot, d.modifier, inner)
        return None
    if isinstance(d, (Intersection, Union, Difference)):
        left = _replace_first(d.left, rest, pct)
        if left is not None:
            return type(d)(left, d.right)
        right = _replace_first(d.right, rest, pct)
        if right is not None:
            return type(d)(d.left, right)
        return None
    if isinstance(d, InverseProjection):
        inner = _replace_first(d.source, rest, pct)
        if inner is not None:
            return InverseProjection(inner, d.slot)
        return None
    return None


def _graft_annotations(body: QualityStatement, modifier):
    subject = body.subject
    observers = body.observers
    for ann in body.pct_annotations:
        pct = _pct_restriction(ann, modifier)
        head, rest = ann.matched_path[0], ann.matched_path[1:]
        if head == "inheres_in":
            subject = _wrap_at_path(subject, rest, pct)
        elif head == "observed_by":
            if not observers:
                raise PathMismatch(
                    "annotation follows observed_by but the element has no observers"
                )
            observers = tuple(_wrap_at_path(o, rest, pct) for o in observers)
        else:
            raise PathMismatch(f"annotation path cannot start at {head!r}")
    return subject, observers


def expand_u(e: Element) -> Element:
    """Materialize percentage annotations into the subject description.

    Each annotation widens the description at its path with an alternative
    `<pct: [low, 1]>` branch, applied in declaration order; the returned
    element carries no annotations.
    """
    body = e.body
    if not isinstance(body, QualityStatement) or not body.pct_annotations:
        raise ValueError("only quality elements with annotations can be expanded")
    subject, observers = _graft_annotations(body, EXACTLY_ONE)
    return Element(
        e.id,
        e.kind,
        QualityStatement(body.quality, subject, body.region, observers, ()),
    )


def translate_element(e: Element) -> tuple[DLConcept, list]:
    """Build the logical image of one element: its concept plus any axioms."""
    body = e.body
    if isinstance(body, NaturalLanguage):
        raise ValueError("an unstructured element has no logical form")
    root = DLAtomic("Function" if e.kind is Kind.F else e.kind.display)
    if isinstance(body, FunctionDesc):
        parts = [root, DLAtomic(body.head)]
        parts.extend(translate_description(slot) for slot in body.slots)
        return DLAnd(tuple(parts)), []
    if isinstance(body, Subsumption):
        sub = translate_description(body.subsumee)
        sup = translate_description(body.subsumer)
        concept = DLAnd((root, DLExists("subsumee", sub), DLExists("subsumer", sup)))
        return concept, [DLSubClassOf(sub, sup)]
    assert isinstance(body, QualityStatement)
    subject, observers = _graft_annotations(body, SOME)
    parts = [
        root,
        translate_description(body.quality),
        DLExists("inheres_in", translate_description(subject)),
        DLExists("has_value_in", translate_region(body.region)),
    ]
    for observer in observers:
        parts.append(DLCard("observed_by", "exact", 1, translate_description(observer)))
    return DLAnd(tuple(parts)), []


# ===== PART 6: evaluating the logic fragment over a world =====


def _is_dataish(c: DLConcept) -> bool:
    if isinstance(c, DLDataRange):
        return True
    if isinstance(c, (DLAnd, DLOr)):
        return all(_is_dataish(a) for a in c.args)
    return False


def _value_test(c: DLConcept, value) -> bool:
    if isinstance(c, DLAnd):
        return all(_value_test(a, value) for a in c.args)
    if isinstance(c, DLOr):
        return any(_value_test(a, value) for a in c.args)
    assert isinstance(c, DLDataRange)
    raw, unit = value, None
    if isinstance(value, Quantity):
        raw, unit = value.value, value.unit
    if c.facet == "eq":
        return raw == c.value
    if isinstance(raw, str):
        return False
    if c.unit and unit and c.unit != unit:
        return False
    return raw >= c.value if c.facet == "min" else raw <= c.value


def _slot_count(x: str, slot: str, filler: DLConcept, w: World) -> tuple[int, int]:
    """How many slot successors x has, and how many land in the filler."""
    if _is_dataish(filler):
        value = w.data_values.get((x, slot))
        present = 0 if value is None else 1
        inside = 1 if present and _value_test(filler, value) else 0
        return present, inside
    targets = _eval_dl(filler, w)
    succ = [y for (sx, y) in w.tuples(slot) if sx == x]
    return len(succ), sum(1 for y in succ if y in targets)


def _eval_dl(c: DLConcept, w: World) -> frozenset[str]:
    if isinstance(c, DLAtomic):
        return w.extension(c.name)
    if isinstance(c, DLThing):
        return frozenset(w.individuals)
    if isinstance(c, (DLNothing, DLDataRange)):
        return frozenset()
    if isinstance(c, DLNominal):
        return frozenset(c.ids) & w.individuals
    if isinstance(c, DLAnd):
        result = frozenset(w.individuals)
        for arg in c.args:
            result &= _eval_dl(arg, w)
        return result
    if isinstance(c, DLOr):
        result: frozenset[str] = frozenset()
        for arg in c.args:
            result |= _eval_dl(arg, w)
        return result
    if isinstance(c, DLNot):
        return frozenset(w.individuals) - _eval_dl(c.inner, w)
    if isinstance(c, DLExistsInverse):
        sources = _eval_dl(c.filler, w)
        return frozenset(y for (x, y) in w.tuples(c.slot) if x in sources)
    if isinstance(c, DLExists):
        return frozenset(
            x for x in w.individuals if _slot_count(x, c.slot, c.filler, w)[1] >= 1
        )
    if isinstance(c, DLForAll):
        result = set()
        for x in w.individuals:
            total, inside = _slot_count(x, c.slot, c.filler, w)
            if total == inside:
                result.add(x)
        return frozenset(result)
    assert isinstance(c, DLCard)
    result = set()
    for x in w.individuals:
        count = _slot_count(x, c.slot, c.filler, w)[1]
        if c.kind == "min":
            ok = count >= c.n
        elif c.kind == "max":
            ok = count <= c.n
        else:
            ok = count == c.n
        if ok:
            result.add(x)
    return frozenset(result)


def eval_dl(c: DLConcept, world: World) -> frozenset[str]:
    """Extension of a logic-fragment concept over a finite closed world."""
    return _eval_dl(c, world.materialize())
