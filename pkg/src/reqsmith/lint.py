"""Heuristic review of a model against a catalog of requirement issues.

The checks are deliberately shallow: they look at declared structure and
surface wording, never at deep inference, so a finding is a prompt for a
human decision rather than a proof of a defect. Each finding names the
transformation that usually repairs the issue, and applying that
transformation silences the finding on re-lint.

`classify_hint` is the companion intake aid: given a raw statement it
guesses which element kinds the wording suggests, so unsorted stakeholder
text can be routed to a first-draft declaration.
"""

import re
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Optional

from .model import (
    QUALITY_KINDS,
    AtomicConcept,
    Description,
    Difference,
    Element,
    Enumeration,
    FunctionDesc,
    Intersection,
    InverseProjection,
    Kind,
    Model,
    NamedRegion,
    NaturalLanguage,
    Nothing,
    Operator,
    QualityStatement,
    SlotRestriction,
    Subsumption,
    Union,
    normalize,
)
from .reasoner import ConsistencyStatus, _mentions, check_consistency


class Issue(Enum):
    """The kinds of requirement defects a review can report.

    INVALID (a statement that is not a requirement at all) is part of the
    taxonomy for callers that classify findings from other sources; no
    automated rule here emits it, since telling a requirement from a
    non-requirement needs human judgment.
    """

    INVALID = "invalid"
    INCOMPLETE = "incomplete"
    AMBIGUOUS = "ambiguous"
    UNVERIFIABLE = "unverifiable"
    UNSATISFIABLE = "unsatisfiable"
    INCONSISTENT = "inconsistent"
    UNMODIFIABLE = "unmodifiable"
    REDUNDANT = "redundant"


_OPERATOR_NAMES = frozenset(op.value for op in Operator)


@dataclass(frozen=True)
class LintFinding:
    """One detected issue, tied to an element (or to the world)."""

    element_id: str
    issue: Issue
    detail: str
    suggested_operator: Optional[str] = None
    span: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if (
            self.suggested_operator is not None
            and self.suggested_operator not in _OPERATOR_NAMES
        ):
            raise ValueError(
                f"suggested_operator must name a transformation operator, "
                f"not {self.suggested_operator!r}"
            )


@dataclass(frozen=True)
class LintConfig:
    """Tunable lexicons and slot profiles for the surface-level checks."""

    universal_tokens: frozenset[str] = frozenset(
        {"all", "any", "every", "each", "always", "100%"}
    )
    required_slots: tuple[str, ...] = ("actor", "object")
    communicative_heads: frozenset[str] = frozenset(
        {"Send", "Notify", "Email", "Inform", "Report", "Broadcast"}
    )
    communicative_slots: tuple[str, ...] = ("actor", "object", "target")
    concern_joiners: tuple[str, ...] = (" and ", " as well as ", "; ", " while ")
    attachment_tokens: frozenset[str] = frozenset({"with", "for"})
    entity_terms: frozenset[str] = frozenset()
    quality_terms: frozenset[str] = frozenset()


def lint_model(model: Model, config: LintConfig = LintConfig()) -> list[LintFinding]:
    """Run every check and return the findings in a fixed rule order."""
    dropped = model.dropped_ids()
    live = [e for e in model.elements if e.id not in dropped]
    successors: dict[str, set[Operator]] = {}
    for app in model.applications:
        for eid in app.inputs:
            successors.setdefault(eid, set()).add(app.op)
    findings: list[LintFinding] = []
    findings.extend(_universal_risks(live, successors, config))
    findings.extend(_unverifiable(live, successors))
    findings.extend(_incomplete(live, successors, config))
    findings.extend(_redundant(live))
    findings.extend(_multi_concern(live, config))
    findings.extend(_inconsistent(model, live))
    findings.extend(_ambiguous(live, config))
    return findings


def _text_tokens(text: str) -> set[str]:
    return {t.casefold() for t in re.findall(r"[\w%]+", text)}


def _universal_risks(live, successors, config) -> list[LintFinding]:
    """Statements that bind a whole population are rarely attainable."""
    out = []
    for e in live:
        if e.kind not in QUALITY_KINDS:
            continue
        if Operator.DEUNIVERSALIZE in successors.get(e.id, ()):
            continue
        body = e.body
        if isinstance(body, NaturalLanguage):
            hits = sorted(_text_tokens(body.text) & config.universal_tokens)
            if hits:
                out.append(
                    LintFinding(
                        e.id,
                        Issue.UNSATISFIABLE,
                        f"universal wording ({', '.join(hits)}) usually cannot "
                        f"be met by every instance; relax it to a fraction of "
                        f"the population",
                        "deuniv",
                    )
                )
            continue
        if not isinstance(body, QualityStatement) or body.pct_annotations:
            continue
        name_tokens = set()
        for name in sorted(_mentions(body.subject)):
            name_tokens |= {part.casefold() for part in name.split("_")}
        hits = sorted(name_tokens & config.universal_tokens)
        if hits:
            out.append(
                LintFinding(
                    e.id,
                    Issue.UNSATISFIABLE,
                    f"the subject names a universal ({', '.join(hits)}); "
                    f"relax it to a fraction of the population",
                    "deuniv",
                )
            )
        elif not isinstance(body.subject, Enumeration):
            out.append(
                LintFinding(
                    e.id,
                    Issue.UNSATISFIABLE,
                    "the statement binds every member of its subject class; "
                    "relax it to a fraction with a percentage annotation",
                    "deuniv",
                )
            )
    return out


def _unverifiable(live, successors) -> list[LintFinding]:
    """Qualitative regions have no agreed test until refined or observed."""
    out = []
    for e in live:
        if e.kind is not Kind.QG or not isinstance(e.body, QualityStatement):
            continue
        region = e.body.region
        if not (isinstance(region, NamedRegion) and region.qualitative):
            continue
        if successors.get(e.id, set()) & {Operator.OPERATIONALIZE, Operator.OBSERVE}:
            continue
        out.append(
            LintFinding(
                e.id,
                Issue.UNVERIFIABLE,
                f"region {region.name} is qualitative and carries no agreed "
                f"measurement; derive a measured constraint or name an "
                f"observer who judges it",
                "observe",
            )
        )
    return out


_SLOT_QUESTIONS = {
    "actor": "Who will {verb}?",
    "object": "{head} what?",
    "target": "{head} to whom?",
}


def _incomplete(live, successors, config) -> list[LintFinding]:
    """Functions still missing their expected participants."""
    out = []
    for e in live:
        if e.kind is not Kind.F or not isinstance(e.body, FunctionDesc):
            continue
        if Operator.REDUCE in successors.get(e.id, ()):
            continue
        body = e.body
        if body.head in config.communicative_heads:
            required = config.communicative_slots
        else:
            required = config.required_slots
        present = {s.slot for s in body.slots}
        missing = [slot for slot in required if slot not in present]
        if not missing:
            continue
        head = body.head.replace("_", " ")
        questions = [
            _SLOT_QUESTIONS.get(slot, "What fills {slot}?".replace("{slot}", slot))
            .replace("{verb}", head.lower())
            .replace("{head}", head)
            for slot in missing
        ]
        out.append(
            LintFinding(
                e.id,
                Issue.INCOMPLETE,
                " ".join(questions),
                "reduce",
            )
        )
    return out


def _body_key(body) -> tuple:
    """A canonical, order-insensitive key for duplicate detection."""
    if isinstance(body, NaturalLanguage):
        return ("nl", " ".join(body.text.casefold().split()))
    if isinstance(body, FunctionDesc):
        return (
            "fn",
            body.head,
            tuple(sorted(repr(normalize(s)) for s in body.slots)),
        )
    if isinstance(body, Subsumption):
        return (
            "sub",
            repr(normalize(body.subsumee)),
            repr(normalize(body.subsumer)),
        )
    return (
        "q",
        repr(normalize(body.quality)),
        repr(normalize(body.subject)),
        repr(body.region),
        tuple(sorted(repr(normalize(o)) for o in body.observers)),
        tuple(sorted((a.matched_path, str(a.pct_low)) for a in body.pct_annotations)),
    )


def _redundant(live) -> list[LintFinding]:
    out = []
    seen: dict[tuple, str] = {}
    for e in live:
        key = (e.kind, _body_key(e.body))
        if key in seen:
            out.append(
                LintFinding(
                    e.id,
                    Issue.REDUNDANT,
                    f"restates {seen[key]} with an identical body; "
                    f"keep one of the two",
                )
            )
        else:
            seen[key] = e.id
    return out


def _multi_concern(live, config) -> list[LintFinding]:
    """One statement per concern keeps later edits local."""
    out = []
    for e in live:
        if not isinstance(e.body, NaturalLanguage):
            continue
        padded = f" {e.body.text.casefold()} "
        for joiner in config.concern_joiners:
            if joiner in padded:
                out.append(
                    LintFinding(
                        e.id,
                        Issue.UNMODIFIABLE,
                        f"bundles several concerns around {joiner.strip()!r}; "
                        f"split them into separate statements",
                        "reduce",
                    )
                )
                break
    return out


def _intersection_atoms(d: Description) -> set[str]:
    """Atom names of a pure intersection, or the empty set if impure."""
    if isinstance(d, AtomicConcept):
        return {d.name}
    if isinstance(d, Intersection):
        left = _intersection_atoms(d.left)
        right = _intersection_atoms(d.right)
        if left and right:
            return left | right
    return set()


def _element_mentions(e: Element) -> set[str]:
    body = e.body
    if isinstance(body, NaturalLanguage):
        return set()
    if isinstance(body, FunctionDesc):
        names = {body.head}
        for slot in body.slots:
            names |= _mentions(slot)
        return names
    if isinstance(body, Subsumption):
        return _mentions(body.subsumee) | _mentions(body.subsumer)
    names = _mentions(body.quality) | _mentions(body.subject)
    for observer in body.observers:
        names |= _mentions(observer)
    if isinstance(body.region, NamedRegion):
        names.add(body.region.name)
    return names


def _inconsistent(model: Model, live) -> list[LintFinding]:
    """World clashes, plus terms filed under declared-disjoint classes."""
    out = []
    result = check_consistency(model)
    if result.status is ConsistencyStatus.INCONSISTENT:
        for line in result.explanation:
            out.append(LintFinding("world", Issue.INCONSISTENT, line))

    supers: dict[str, set[str]] = {}
    disjoint: set[frozenset[str]] = set()

    def record(subsumee: Description, subsumer: Description):
        if isinstance(subsumer, Nothing):
            atoms = _intersection_atoms(subsumee)
            for pair in combinations(sorted(atoms), 2):
                disjoint.add(frozenset(pair))
        elif isinstance(subsumee, AtomicConcept) and isinstance(
            subsumer, AtomicConcept
        ):
            supers.setdefault(subsumee.name, set()).add(subsumer.name)

    for axiom in model.axioms:
        record(axiom.subsumee, axiom.subsumer)
    for e in live:
        if isinstance(e.body, Subsumption):
            record(e.body.subsumee, e.body.subsumer)

    def ancestors(name: str) -> set[str]:
        seen: set[str] = set()
        stack = [name]
        while stack:
            for parent in supers.get(stack.pop(), ()):
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        return seen

    first_mention: dict[str, str] = {}
    for e in live:
        for name in sorted(_element_mentions(e)):
            first_mention.setdefault(name, e.id)

    for term in sorted(supers):
        reachable = ancestors(term) | {term}
        for pair in sorted(disjoint, key=sorted):
            if pair <= reachable:
                a, b = sorted(pair)
                out.append(
                    LintFinding(
                        first_mention.get(term, "model"),
                        Issue.INCONSISTENT,
                        f"term {term} falls under {a} and {b}, which are "
                        f"declared disjoint; the two uses need distinct names",
                        "interpret",
                    )
                )
                break
    return out


def _slot_nodes(d: Description) -> list[SlotRestriction]:
    if isinstance(d, SlotRestriction):
        return [d] + _slot_nodes(d.filler)
    if isinstance(d, (Intersection, Union, Difference)):
        return _slot_nodes(d.left) + _slot_nodes(d.right)
    if isinstance(d, InverseProjection):
        return _slot_nodes(d.source)
    return []


def _body_slot_nodes(body) -> list[SlotRestriction]:
    if isinstance(body, FunctionDesc):
        nodes = []
        for slot in body.slots:
            nodes.extend(_slot_nodes(slot))
        return nodes
    if isinstance(body, Subsumption):
        return _slot_nodes(body.subsumee) + _slot_nodes(body.subsumer)
    if isinstance(body, QualityStatement):
        nodes = _slot_nodes(body.quality) + _slot_nodes(body.subject)
        for observer in body.observers:
            nodes.extend(_slot_nodes(observer))
        return nodes
    return []


def _ambiguous(live, config) -> list[LintFinding]:
    """Attachment words and double-reading terms admit rival parses."""
    out = []
    for e in live:
        body = e.body
        if isinstance(body, NaturalLanguage):
            hits = sorted(_text_tokens(body.text) & config.attachment_tokens)
            if hits:
                out.append(
                    LintFinding(
                        e.id,
                        Issue.AMBIGUOUS,
                        f"{'/'.join(hits)} can attach to more than one phrase; "
                        f"restate the intended reading",
                        "interpret",
                    )
                )
            continue
        for node in _body_slot_nodes(body):
            filler = node.filler
            if not isinstance(filler, AtomicConcept):
                continue
            name = filler.name.casefold()
            if name in config.entity_terms and name in config.quality_terms:
                out.append(
                    LintFinding(
                        e.id,
                        Issue.AMBIGUOUS,
                        f"slot {node.slot} filler {filler.name} reads as both "
                        f"an entity and a quality; pick one reading",
                        "interpret",
                    )
                )
                break
    return out


_QUALITY_ADJECTIVES = (
    "accurate|appealing|available|convenient|efficient|fast|friendly|good|"
    "intuitive|precise|reliable|responsive|robust|safe|secure|simple|slow|"
    "stable"
)

_HINT_PATTERNS: tuple[tuple[Kind, "re.Pattern[str]"], ...] = (
    (Kind.F, re.compile(r"\bshall allow\b.*?\bto\b")),
    (Kind.F, re.compile(r"\bshall (?:be able to|provide|support)\b")),
    (Kind.FG, re.compile(r"\b(?:be|been|being)\s+\w+(?:ed|en)\b")),
    (
        Kind.QG,
        re.compile(
            rf"\b(?:is|are|be|been|being)\s+(?:very\s+|highly\s+)?"
            rf"(?:{_QUALITY_ADJECTIVES}|(?!able\b)\w+(?:able|ible))\b"
        ),
    ),
    (Kind.CTG, re.compile(r"\bshall (?:have|include)\b")),
    (Kind.DA, re.compile(r"\bis an?\b|\bwill (?:be|have)\b")),
)

_HINT_ORDER = (Kind.F, Kind.FG, Kind.QG, Kind.CTG, Kind.DA)


@dataclass(frozen=True)
class KindGuess:
    """One plausible element kind for a raw statement."""

    kind: Kind
    triggers: tuple[str, ...]


def classify_hint(text: str) -> list[KindGuess]:
    """Rank the element kinds a raw statement's wording suggests.

    Purely lexical: each kind's trigger patterns are matched against the
    casefolded text and kinds are ordered by how many triggers fired. An
    empty result means the wording is neutral and the author must decide.
    """
    lowered = text.casefold()
    matched: dict[Kind, list[str]] = {}
    for kind, pattern in _HINT_PATTERNS:
        for hit in pattern.finditer(lowered):
            fragment = hit.group(0)
            bucket = matched.setdefault(kind, [])
            if fragment not in bucket:
                bucket.append(fragment)
    ranked = sorted(
        matched.items(), key=lambda kv: (-len(kv[1]), _HINT_ORDER.index(kv[0]))
    )
    return [KindGuess(kind, tuple(triggers)) for kind, triggers in ranked]
