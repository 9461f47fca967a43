"""Decision procedures over the logic fragment.

`subsumes` is the workhorse: a sound structural derivation first, then a
bounded hunt for a finite counter-world when the derivation fails, with
Unknown as the honest fallback. On top of it sit model-level services:
consistency checking by axiom saturation, interrelation queries, strength
tag auditing for operator applications, and fulfillment propagation.
"""

from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

from .model import (
    AtomicConcept,
    Description,
    Difference,
    Enumeration,
    FunctionDesc,
    Intersection,
    InverseProjection,
    Kind,
    Model,
    NamedRegion,
    NaturalLanguage,
    ONE_TO_MANY_OPS,
    ONE_TO_ONE_OPS,
    Operator,
    QualityStatement,
    Quantity,
    Region,
    SlotRestriction,
    Strength,
    Subsumption,
    Union,
    World,
)
from .semantics import (
    DLAnd,
    DLAtomic,
    DLCard,
    DLConcept,
    DLDataRange,
    DLExists,
    DLExistsInverse,
    DLForAll,
    DLNominal,
    DLNot,
    DLNothing,
    DLOr,
    DLSubClassOf,
    DLThing,
    DL_NOTHING,
    DL_THING,
    _eval_dl,
    _is_dataish,
    _value_test,
    eval_description,
    translate_description,
    translate_element,
)

DEFAULT_BOUND = 4


def default_bound() -> int:
    """Counter-model size limit; overridable via the DESIREE_BOUND variable."""
    raw = os.environ.get("DESIREE_BOUND", "")
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_BOUND
    return value if value >= 1 else DEFAULT_BOUND


# ===== PART 1: normal form for the logic fragment =====


def _dl_key(c: DLConcept):
    if isinstance(c, DLAtomic):
        return ("atomic", c.name)
    if isinstance(c, DLThing):
        return ("thing",)
    if isinstance(c, DLNothing):
        return ("nothing",)
    if isinstance(c, DLNominal):
        return ("nominal", c.ids)
    if isinstance(c, DLDataRange):
        return ("data", c.facet, str(c.value), c.unit or "")
    if isinstance(c, DLNot):
        return ("not", _dl_key(c.inner))
    if isinstance(c, DLAnd):
        return ("and", tuple(_dl_key(a) for a in c.args))
    if isinstance(c, DLOr):
        return ("or", tuple(_dl_key(a) for a in c.args))
    if isinstance(c, DLForAll):
        return ("all", c.slot, _dl_key(c.filler))
    if isinstance(c, DLExistsInverse):
        return ("inv", c.slot, _dl_key(c.filler))
    assert isinstance(c, DLCard)
    return ("card", c.slot, c.kind, c.n, _dl_key(c.filler))


def _norm(c: DLConcept) -> DLConcept:
    """Flatten, dedupe, and order boolean structure; fold constants; turn
    bare existentials into min-1 cardinalities so rules need one shape."""
    if isinstance(c, DLExists):
        return DLCard(c.slot, "min", 1, _norm(c.filler))
    if isinstance(c, DLCard):
        return DLCard(c.slot, c.kind, c.n, _norm(c.filler))
    if isinstance(c, DLForAll):
        return DLForAll(c.slot, _norm(c.filler))
    if isinstance(c, DLExistsInverse):
        return DLExistsInverse(c.slot, _norm(c.filler))
    if isinstance(c, DLNot):
        inner = _norm(c.inner)
        if isinstance(inner, DLNot):
            return inner.inner
        if isinstance(inner, DLThing):
            return DL_NOTHING
        if isinstance(inner, DLNothing):
            return DL_THING
        return DLNot(inner)
    if isinstance(c, (DLAnd, DLOr)):
        flat: list[DLConcept] = []
        for arg in c.args:
            normed = _norm(arg)
            if isinstance(normed, type(c)):
                flat.extend(normed.args)
            else:
                flat.append(normed)
        if isinstance(c, DLAnd):
            flat = [a for a in flat if not isinstance(a, DLThing)]
            if any(isinstance(a, DLNothing) for a in flat):
                return DL_NOTHING
            if not flat:
                return DL_THING
        else:
            flat = [a for a in flat if not isinstance(a, DLNothing)]
            if any(isinstance(a, DLThing) for a in flat):
                return DL_THING
            if not flat:
                return DL_NOTHING
        unique: dict = {}
        for arg in flat:
            unique.setdefault(_dl_key(arg), arg)
        ordered = tuple(unique[k] for k in sorted(unique))
        if len(ordered) == 1:
            return ordered[0]
        return DLAnd(ordered) if isinstance(c, DLAnd) else DLOr(ordered)
    return c


def _as_dl_axiom(axiom) -> DLSubClassOf:
    if isinstance(axiom, DLSubClassOf):
        return DLSubClassOf(_norm(axiom.sub), _norm(axiom.sup))
    if isinstance(axiom, Subsumption):
        return DLSubClassOf(
            _norm(translate_description(axiom.subsumee)),
            _norm(translate_description(axiom.subsumer)),
        )
    raise TypeError(f"not an axiom: {axiom!r}")


def collect_axioms(model: Model) -> list[DLSubClassOf]:
    """Model-level axioms plus those carried by subsumption-bodied elements."""
    axioms = [_as_dl_axiom(a) for a in model.axioms]
    for element in model.elements:
        if isinstance(element.body, Subsumption):
            _, derived = translate_element(element)
            axioms.extend(_as_dl_axiom(a) for a in derived)
    seen: dict = {}
    for ax in axioms:
        seen.setdefault((_dl_key(ax.sub), _dl_key(ax.sup)), ax)
    return list(seen.values())


# ===== PART 2: structural derivation =====

_NO = 0
_PURE = 1
_VIA_AXIOM = 2


class _Derivation:
    def __init__(self, axioms: list[DLSubClassOf]):
        self.axioms = axioms
        self.memo: dict = {}
        self.active: set = set()

    def entails(self, sub: DLConcept, sup: DLConcept) -> int:
        key = (sub, sup)
        if key in self.memo:
            return self.memo[key]
        if key in self.active:
            return _NO
        self.active.add(key)
        try:
            result = self._rules(sub, sup)
        finally:
            self.active.discard(key)
        self.memo[key] = result
        return result

    def _all(self, pairs) -> int:
        best = _PURE
        for sub, sup in pairs:
            r = self.entails(sub, sup)
            if not r:
                return _NO
            best = max(best, r)
        return best

    def _rules(self, sub: DLConcept, sup: DLConcept) -> int:
        if sub == sup:
            return _PURE
        if isinstance(sup, DLThing) or isinstance(sub, DLNothing):
            return _PURE
        if isinstance(sub, DLOr):
            return self._all((arg, sup) for arg in sub.args)
        if isinstance(sup, DLAnd):
            return self._all((sub, arg) for arg in sup.args)
        if isinstance(sub, DLAnd):
            for arg in sub.args:
                r = self.entails(arg, sup)
                if r:
                    return r
        if isinstance(sup, DLOr):
            for arg in sup.args:
                r = self.entails(sub, arg)
                if r:
                    return r
        r = self._pair_rule(sub, sup)
        if r:
            return r
        for ax in self.axioms:
            left = self.entails(sub, ax.sub)
            if left:
                right = self.entails(ax.sup, sup)
                if right:
                    return _VIA_AXIOM
        return _NO

    def _pair_rule(self, sub: DLConcept, sup: DLConcept) -> int:
        if isinstance(sub, DLCard) and isinstance(sup, DLCard):
            if sub.slot != sup.slot:
                return _NO
            if sup.kind == "min" and sub.kind in ("min", "exact"):
                if sub.n >= sup.n:
                    return self.entails(sub.filler, sup.filler)
                return _NO
            if sup.kind == "max" and sub.kind in ("max", "exact"):
                if sub.n <= sup.n:
                    return self.entails(sup.filler, sub.filler)
                return _NO
            if sup.kind == "exact" and sub.kind == "exact" and sub.n == sup.n:
                forward = self.entails(sub.filler, sup.filler)
                if not forward:
                    return _NO
                backward = self.entails(sup.filler, sub.filler)
                if backward:
                    return max(forward, backward)
                # a strictly smaller filler keeps the same exact count only
                # when a declared axiom links the two; see the widening rule
                if forward == _VIA_AXIOM:
                    return _VIA_AXIOM
            return _NO
        if isinstance(sub, DLForAll) and isinstance(sup, DLForAll):
            if sub.slot == sup.slot:
                return self.entails(sub.filler, sup.filler)
            return _NO
        if isinstance(sub, DLExistsInverse) and isinstance(sup, DLExistsInverse):
            if sub.slot == sup.slot:
                return self.entails(sub.filler, sup.filler)
            return _NO
        if isinstance(sub, DLNot) and isinstance(sup, DLNot):
            return self.entails(sup.inner, sub.inner)
        if isinstance(sub, DLNominal) and isinstance(sup, DLNominal):
            return _PURE if set(sub.ids) <= set(sup.ids) else _NO
        if isinstance(sub, DLDataRange) and isinstance(sup, DLDataRange):
            return self._facet_rule(sub, sup)
        return _NO

    @staticmethod
    def _facet_rule(sub: DLDataRange, sup: DLDataRange) -> int:
        if sub.unit != sup.unit:
            return _NO
        a, b = sub.value, sup.value
        numeric = not isinstance(a, str) and not isinstance(b, str)
        if sub.facet == sup.facet == "min":
            return _PURE if numeric and a >= b else _NO
        if sub.facet == sup.facet == "max":
            return _PURE if numeric and a <= b else _NO
        if sub.facet == "eq" and sup.facet == "min":
            return _PURE if numeric and a >= b else _NO
        if sub.facet == "eq" and sup.facet == "max":
            return _PURE if numeric and a <= b else _NO
        return _NO


# ===== PART 3: counter-model search =====


@dataclass
class _Vocabulary:
    atoms: set[str] = field(default_factory=set)
    slots: set[str] = field(default_factory=set)
    nominals: set[str] = field(default_factory=set)
    data_slots: dict[str, set] = field(default_factory=dict)  # slot -> {(value, unit)}


def _facets(c: DLConcept) -> list[DLDataRange]:
    if isinstance(c, DLDataRange):
        return [c]
    if isinstance(c, (DLAnd, DLOr)):
        out = []
        for a in c.args:
            out.extend(_facets(a))
        return out
    return []


def _collect_vocabulary(concepts: Iterable[DLConcept]) -> _Vocabulary:
    vocab = _Vocabulary()

    def walk(c: DLConcept):
        if isinstance(c, DLAtomic):
            vocab.atoms.add(c.name)
        elif isinstance(c, DLNominal):
            vocab.nominals.update(c.ids)
        elif isinstance(c, (DLAnd, DLOr)):
            for a in c.args:
                walk(a)
        elif isinstance(c, DLNot):
            walk(c.inner)
        elif isinstance(c, (DLForAll, DLCard, DLExists, DLExistsInverse)):
            filler = c.filler
            if _is_dataish(filler):
                bucket = vocab.data_slots.setdefault(c.slot, set())
                for facet in _facets(filler):
                    if not isinstance(facet.value, str):
                        bucket.add((facet.value, facet.unit))
                    else:
                        bucket.add((facet.value, None))
            else:
                vocab.slots.add(c.slot)
                walk(filler)

    for concept in concepts:
        walk(concept)
    if not vocab.atoms:
        vocab.atoms.add("C0")
    return vocab


def _value_options(pairs: set) -> list:
    """Plausible data values around the facet boundaries, plus absence."""
    options: list = [None]
    for value, unit in sorted(pairs, key=str):
        if isinstance(value, str):
            options.append(value)
            continue
        for candidate in (value, value - 1, value + 1):
            options.append(Quantity(candidate, unit) if unit else candidate)
    seen = []
    for option in options:
        if option not in seen:
            seen.append(option)
    return seen[:8]


class _ModelSearch:
    def __init__(self, sub, sup, axioms, bound):
        self.sub = sub
        self.sup = sup
        self.axioms = axioms
        self.bound = bound
        self.vocab = _collect_vocabulary(
            [sub, sup] + [a.sub for a in axioms] + [a.sup for a in axioms]
        )
        self.rng = random.Random(7)

    def _axioms_hold(self, w: World) -> bool:
        return all(
            _eval_dl(ax.sub, w) <= _eval_dl(ax.sup, w) for ax in self.axioms
        )

    def _is_witness(self, w: World) -> bool:
        if not self._axioms_hold(w):
            return False
        return bool(_eval_dl(self.sub, w) - _eval_dl(self.sup, w))

    def run(self) -> Optional[World]:
        built = _construct_world(self.sub)
        if built is not None:
            if self._is_witness(built):
                return built
            repaired = _saturate(built, self.axioms).world
            if repaired is not None and self._is_witness(repaired):
                return repaired
        for w in self._size_one_worlds():
            if self._is_witness(w):
                return w
        for size in range(2, self.bound + 1):
            for _ in range(150):
                w = self._random_world(size)
                if self._is_witness(w):
                    return w
        return None

    def _size_one_worlds(self):
        atoms = sorted(self.vocab.atoms)[:6]
        slots = sorted(self.vocab.slots)[:3]
        data_slots = sorted(self.vocab.data_slots)[:2]
        roots = ["cw0"] + sorted(self.vocab.nominals)[:3]
        atom_subsets = list(
            itertools.chain.from_iterable(
                itertools.combinations(atoms, k) for k in range(len(atoms) + 1)
            )
        )
        loop_patterns = list(itertools.product([False, True], repeat=len(slots)))
        option_lists = [
            _value_options(self.vocab.data_slots[s]) for s in data_slots
        ]
        data_patterns = list(itertools.product(*option_lists)) if option_lists else [()]
        produced = 0
        for root in roots:
            for subset in atom_subsets:
                for loops in loop_patterns:
                    for data_choice in data_patterns:
                        produced += 1
                        if produced > 4000:
                            return
                        extensions = {a: frozenset({root}) for a in subset}
                        tuples = {
                            s: frozenset({(root, root)})
                            for s, present in zip(slots, loops)
                            if present
                        }
                        data = {
                            (root, s): v
                            for s, v in zip(data_slots, data_choice)
                            if v is not None
                        }
                        yield World(
                            individuals=frozenset({root}),
                            concept_extensions=extensions,
                            slot_tuples=tuples,
                            data_values=data,
                        )

    def _random_world(self, size: int) -> World:
        rng = self.rng
        names = [f"cw{i}" for i in range(size)]
        for nominal in sorted(self.vocab.nominals):
            if rng.random() < 0.5 and len(names) < size + 2:
                names.append(nominal)
        extensions = {
            a: frozenset(n for n in names if rng.random() < 0.5)
            for a in sorted(self.vocab.atoms)[:8]
        }
        tuples = {
            s: frozenset(
                (x, y) for x in names for y in names if rng.random() < 0.3
            )
            for s in sorted(self.vocab.slots)[:4]
        }
        data = {}
        for slot, pairs in self.vocab.data_slots.items():
            options = _value_options(pairs)
            for name in names:
                pick = rng.choice(options)
                if pick is not None:
                    data[(name, slot)] = pick
        return World(
            individuals=frozenset(names),
            concept_extensions=extensions,
            slot_tuples=tuples,
            data_values=data,
        )


class _Builder:
    def __init__(self):
        self.individuals: set[str] = set()
        self.extensions: dict[str, set[str]] = {}
        self.tuples: dict[str, set[tuple[str, str]]] = {}
        self.data: dict = {}
        self.counter = 0

    def fresh(self) -> str:
        name = f"n{self.counter}"
        self.counter += 1
        self.individuals.add(name)
        return name

    def snapshot(self):
        return (
            set(self.individuals),
            {k: set(v) for k, v in self.extensions.items()},
            {k: set(v) for k, v in self.tuples.items()},
            dict(self.data),
            self.counter,
        )

    def restore(self, snap):
        self.individuals, self.extensions, self.tuples, self.data, self.counter = (
            snap[0],
            snap[1],
            snap[2],
            snap[3],
            snap[4],
        )

    def world(self) -> World:
        return World(
            individuals=frozenset(self.individuals),
            concept_extensions={
                k: frozenset(v) for k, v in self.extensions.items()
            },
            slot_tuples={k: frozenset(v) for k, v in self.tuples.items()},
            data_values=dict(self.data),
        )


def _pick_value(filler: DLConcept):
    """A concrete data value satisfying the facet combination, if any."""
    if isinstance(filler, DLOr):
        for arg in filler.args:
            value = _pick_value(arg)
            if value is not None:
                return value
        return None
    facets = _facets(filler)
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    eq = None
    unit = None
    for facet in facets:
        if facet.unit:
            unit = facet.unit
        if facet.facet == "eq":
            eq = facet.value
        elif isinstance(facet.value, str):
            return None
        elif facet.facet == "min":
            lo = facet.value if lo is None else max(lo, facet.value)
        else:
            hi = facet.value if hi is None else min(hi, facet.value)
    if eq is not None:
        value = eq
    elif lo is not None:
        value = lo
    elif hi is not None:
        value = hi
    else:
        value = Fraction(0)
    if isinstance(value, Fraction) or isinstance(value, int):
        if lo is not None and value < lo:
            return None
        if hi is not None and value > hi:
            return None
    return Quantity(value, unit) if unit else value


def _construct_world(concept: DLConcept) -> Optional[World]:
    """Best-effort minimal world with one individual inside the concept."""
    builder = _Builder()
    root = builder.fresh()
    if _construct_into(builder, concept, root):
        return builder.world()
    return None


def _construct_into(builder: _Builder, c: DLConcept, node: str) -> bool:
    if isinstance(c, DLAtomic):
        builder.extensions.setdefault(c.name, set()).add(node)
        return True
    if isinstance(c, DLThing):
        return True
    if isinstance(c, (DLNothing, DLNominal, DLDataRange)):
        return False
    if isinstance(c, DLNot):
        return True  # fresh worlds leave everything out by default
    if isinstance(c, DLAnd):
        return all(_construct_into(builder, arg, node) for arg in c.args)
    if isinstance(c, DLOr):
        for arg in c.args:
            snap = builder.snapshot()
            if _construct_into(builder, arg, node):
                return True
            builder.restore(snap)
        return False
    if isinstance(c, DLForAll):
        return True
    if isinstance(c, DLExistsInverse):
        source = builder.fresh()
        builder.tuples.setdefault(c.slot, set()).add((source, node))
        return _construct_into(builder, c.filler, source)
    if isinstance(c, DLExists):
        c = DLCard(c.slot, "min", 1, c.filler)
    assert isinstance(c, DLCard)
    if c.kind == "max":
        return True
    if _is_dataish(c.filler):
        if c.n > 1:
            return False
        value = _pick_value(c.filler)
        if value is None:
            return False
        builder.data[(node, c.slot)] = value
        return True
    for _ in range(c.n):
        target = builder.fresh()
        builder.tuples.setdefault(c.slot, set()).add((node, target))
        if not _construct_into(builder, c.filler, target):
            return False
    return True


# ===== PART 4: subsumption verdicts =====


class VerdictStatus(Enum):
    PROVEN = "proven"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class SubsumptionVerdict:
    status: VerdictStatus
    witness: Optional[World] = None
    method: str = "structural"


def subsumes(
    sub: DLConcept,
    super_: DLConcept,
    axioms: Iterable = (),
    bound: Optional[int] = None,
) -> SubsumptionVerdict:
    """Decide sub `⊑` super under the axioms: Proven, Refuted, or Unknown.

    Proven verdicts come from the structural derivation and are sound;
    Refuted verdicts carry a finite world of at most `bound` individuals
    separating the two concepts.
    """
    if bound is None:
        bound = default_bound()
    dl_axioms = [_as_dl_axiom(a) for a in axioms]
    sub_n = _norm(sub)
    sup_n = _norm(super_)
    if _Derivation(dl_axioms).entails(sub_n, sup_n):
        return SubsumptionVerdict(VerdictStatus.PROVEN, method="structural")
    witness = _ModelSearch(sub_n, sup_n, dl_axioms, bound).run()
    if witness is not None:
        return SubsumptionVerdict(
            VerdictStatus.REFUTED, witness=witness, method="bounded-model"
        )
    return SubsumptionVerdict(VerdictStatus.UNKNOWN, method="bounded-model")


# ===== PART 5: saturation and consistency =====


def _dl_repr(c: DLConcept) -> str:
    if isinstance(c, DLAtomic):
        return c.name
    if isinstance(c, DLThing):
        return "Thing"
    if isinstance(c, DLNothing):
        return "Nothing"
    if isinstance(c, DLNominal):
        return "{" + ", ".join(c.ids) + "}"
    if isinstance(c, DLAnd):
        return "(" + " and ".join(_dl_repr(a) for a in c.args) + ")"
    if isinstance(c, DLOr):
        return "(" + " or ".join(_dl_repr(a) for a in c.args) + ")"
    if isinstance(c, DLNot):
        return f"not {_dl_repr(c.inner)}"
    if isinstance(c, DLForAll):
        return f"only {c.slot}.{_dl_repr(c.filler)}"
    if isinstance(c, DLExists):
        return f"some {c.slot}.{_dl_repr(c.filler)}"
    if isinstance(c, DLExistsInverse):
        return f"some inverse({c.slot}).{_dl_repr(c.filler)}"
    if isinstance(c, DLDataRange):
        symbol = {"min": ">=", "max": "<=", "eq": "="}[c.facet]
        unit = f" {c.unit}" if c.unit else ""
        return f"({symbol} {c.value}{unit})"
    assert isinstance(c, DLCard)
    symbol = {"min": ">=", "max": "<=", "exact": "="}[c.kind]
    return f"{symbol}{c.n} {c.slot}.{_dl_repr(c.filler)}"


def _axiom_repr(ax: DLSubClassOf) -> str:
    return f"{_dl_repr(ax.sub)} :< {_dl_repr(ax.sup)}"


@dataclass
class _Saturation:
    world: Optional[World]
    clashes: tuple[str, ...] = ()
    incomplete: bool = False


class _Saturator:
    def __init__(self, world: World, axioms: list[DLSubClassOf]):
        flat = world.materialize()
        self.individuals = set(flat.individuals)
        self.extensions = {k: set(v) for k, v in flat.concept_extensions.items()}
        self.tuples = flat.slot_tuples
        self.data = flat.data_values
        self.axioms = axioms
        self.clashes: list[str] = []
        self.incomplete = False
        self.changed = False

    def current(self) -> World:
        return World(
            individuals=frozenset(self.individuals),
            concept_extensions={k: frozenset(v) for k, v in self.extensions.items()},
            slot_tuples=self.tuples,
            data_values=self.data,
        )

    def run(self, max_rounds: int = 50) -> _Saturation:
        for _ in range(max_rounds):
            self.changed = False
            snapshot = self.current()
            for ax in self.axioms:
                for x in sorted(_eval_dl(ax.sub, snapshot)):
                    self._assert(x, ax.sup, ax, snapshot)
            if self.clashes:
                return _Saturation(None, tuple(self.clashes), self.incomplete)
            if not self.changed:
                break
        return _Saturation(self.current(), (), self.incomplete)

    def _clash(self, message: str):
        if message not in self.clashes:
            self.clashes.append(message)

    def _assert(self, x: str, c: DLConcept, ax: DLSubClassOf, snapshot: World):
        origin = f"axiom {_axiom_repr(ax)}"
        if isinstance(c, DLAtomic):
            members = self.extensions.setdefault(c.name, set())
            if x not in members:
                members.add(x)
                self.changed = True
            return
        if isinstance(c, DLThing):
            return
        if isinstance(c, DLNothing):
            self._clash(f"{origin} forces {x} into Nothing")
            return
        if isinstance(c, DLAnd):
            for arg in c.args:
                self._assert(x, arg, ax, snapshot)
            return
        if isinstance(c, DLOr):
            if any(x in _eval_dl(arg, snapshot) for arg in c.args):
                return
            self.incomplete = True
            return
        if isinstance(c, DLNominal):
            if x not in c.ids:
                self._clash(
                    f"{origin} forces {x} to be one of {{{', '.join(c.ids)}}}, "
                    "but distinct names denote distinct individuals"
                )
            return
        if isinstance(c, DLNot):
            if x in _eval_dl(c.inner, snapshot):
                self._clash(
                    f"{origin} forbids {x} from {_dl_repr(c.inner)}, which it inhabits"
                )
            return
        if isinstance(c, DLForAll):
            if _is_dataish(c.filler):
                value = self.data.get((x, c.slot))
                if value is not None and not _value_test(c.filler, value):
                    self._clash(
                        f"{origin}: value {value!r} of {x}.{c.slot} falls outside "
                        f"{_dl_repr(c.filler)}"
                    )
                return
            for subject, target in snapshot.tuples(c.slot):
                if subject == x:
                    self._assert(target, c.filler, ax, snapshot)
            return
        if isinstance(c, DLExistsInverse):
            sources = _eval_dl(c.filler, snapshot)
            if any((s, x) in snapshot.tuples(c.slot) for s in sources):
                return
            self.incomplete = True
            return
        if isinstance(c, DLExists):
            c = DLCard(c.slot, "min", 1, c.filler)
        assert isinstance(c, DLCard)
        if _is_dataish(c.filler):
            value = self.data.get((x, c.slot))
            count = 1 if value is not None and _value_test(c.filler, value) else 0
        else:
            targets = _eval_dl(c.filler, snapshot)
            count = sum(
                1 for (s, y) in snapshot.tuples(c.slot) if s == x and y in targets
            )
        if c.kind in ("max", "exact") and count > c.n:
            self._clash(
                f"{origin}: {x} has {count} {c.slot} fillers in "
                f"{_dl_repr(c.filler)}, more than {c.n}"
            )
        if c.kind in ("min", "exact") and count < c.n:
            self.incomplete = True


def _saturate(world: World, axioms: list[DLSubClassOf]) -> _Saturation:
    return _Saturator(world, axioms).run()


class ConsistencyStatus(Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ConsistencyResult:
    status: ConsistencyStatus
    witness: Optional[World] = None
    explanation: tuple[str, ...] = ()


def check_consistency(model: Model, bound: Optional[int] = None) -> ConsistencyResult:
    """Saturate the model's world under all axioms and look for a clash."""
    axioms = collect_axioms(model)
    world = model.world if model.world is not None else World()
    outcome = _saturate(world, axioms)
    if outcome.clashes:
        return ConsistencyResult(
            ConsistencyStatus.INCONSISTENT, explanation=outcome.clashes
        )
    saturated = outcome.world
    assert saturated is not None
    for ax in axioms:
        if not _eval_dl(ax.sub, saturated) <= _eval_dl(ax.sup, saturated):
            return ConsistencyResult(
                ConsistencyStatus.UNKNOWN,
                explanation=(
                    f"could not establish axiom {_axiom_repr(ax)} on the world",
                ),
            )
    return ConsistencyResult(ConsistencyStatus.CONSISTENT, witness=saturated)


# ===== PART 6: interrelation queries =====


def _mentions(d: Description) -> set[str]:
    if isinstance(d, AtomicConcept):
        return {d.name}
    if isinstance(d, Enumeration):
        return set(d.ids)
    if isinstance(d, (Intersection, Union, Difference)):
        return _mentions(d.left) | _mentions(d.right)
    if isinstance(d, SlotRestriction):
        return _mentions(d.filler)
    if isinstance(d, InverseProjection):
        return _mentions(d.source)
    if isinstance(d, Region) and isinstance(d.expr, NamedRegion):
        return {d.expr.name}
    return set()


def _reified_world(model: Model) -> World:
    individuals: set[str] = set()
    extensions: dict[str, set[str]] = {}
    tuples: dict[str, set[tuple[str, str]]] = {}

    def edge(slot: str, source: str, names: set[str]):
        for name in names:
            tuples.setdefault(slot, set()).add((source, name))
            individuals.add(name)
            extensions.setdefault(name, set()).add(name)

    for element in model.elements:
        individuals.add(element.id)
        extensions.setdefault(element.kind.display, set()).add(element.id)
        body = element.body
        referenced: set[str] = set()
        if isinstance(body, FunctionDesc):
            extensions.setdefault(body.head, set()).add(element.id)
            for slot in body.slots:
                names = _mentions(slot.filler)
                edge(slot.slot, element.id, names)
                referenced |= names
        elif isinstance(body, Subsumption):
            left, right = _mentions(body.subsumee), _mentions(body.subsumer)
            edge("subsumee", element.id, left)
            edge("subsumer", element.id, right)
            referenced = left | right
        elif isinstance(body, QualityStatement):
            subject_names = _mentions(body.subject)
            edge("inheres_in", element.id, subject_names)
            referenced |= subject_names
            for name in _mentions(body.quality):
                extensions.setdefault(name, set()).add(element.id)
            for observer in body.observers:
                names = _mentions(observer)
                edge("observed_by", element.id, names)
                referenced |= names
            if isinstance(body.region, NamedRegion):
                edge("has_value_in", element.id, {body.region.name})
                referenced.add(body.region.name)
        edge("refer_to", element.id, referenced)
    return World(
        individuals=frozenset(individuals),
        concept_extensions={k: frozenset(v) for k, v in extensions.items()},
        slot_tuples={k: frozenset(v) for k, v in tuples.items()},
    )


def query(model: Model, pattern: Description) -> frozenset[str]:
    """Element ids matching a pattern, via the interrelation graph and via
    proven concept subsumption."""
    element_ids = {e.id for e in model.elements}
    matches = set(eval_description(pattern, _reified_world(model))) & element_ids
    pattern_dl = translate_description(pattern)
    axioms = collect_axioms(model)
    for element in model.elements:
        if element.id in matches or isinstance(element.body, NaturalLanguage):
            continue
        concept, _ = translate_element(element)
        verdict = subsumes(concept, pattern_dl, axioms, bound=1)
        if verdict.status is VerdictStatus.PROVEN:
            matches.add(element.id)
    return frozenset(matches)


# ===== PART 7: strength tag audit =====


@dataclass(frozen=True)
class StrengthDiagnostic:
    application_index: int
    declared: Strength
    message: str


_FIXED_STRENGTH = {
    Operator.OBSERVE: (
        {Strength.STRENGTHENING},
        "observation always strengthens",
    ),
    Operator.DEUNIVERSALIZE: (
        {Strength.WEAKENING},
        "dropping universality always weakens",
    ),
    Operator.INTERPRET: (
        {Strength.STRENGTHENING, Strength.EQUATING},
        "interpretation cannot weaken",
    ),
    Operator.FOCUS: (
        {Strength.WEAKENING, Strength.EQUATING},
        "narrowing focus cannot strengthen",
    ),
}


def check_strength_tags(model: Model, bound: Optional[int] = None):
    """Audit declared strength tags against derivable subsumption directions.

    Each application yields at most one diagnostic: either its tag is
    illegal for the operator outright, or the declared direction is
    refutable (the opposite direction is Proven while the declared one is
    not). Unknown directions stay silent.
    """
    if bound is None:
        bound = default_bound()
    axioms = collect_axioms(model)
    concepts: dict[str, Optional[DLConcept]] = {}
    for element in model.elements:
        if isinstance(element.body, NaturalLanguage):
            concepts[element.id] = None
        else:
            concepts[element.id] = translate_element(element)[0]
    by_id = model.by_id()
    diagnostics: list[StrengthDiagnostic] = []
    for index, app in enumerate(model.applications):
        if app.op is Operator.RESOLVE:
            continue
        fixed = _FIXED_STRENGTH.get(app.op)
        if fixed is not None and app.strength not in fixed[0]:
            diagnostics.append(
                StrengthDiagnostic(
                    index,
                    app.strength,
                    f"{app.op.value} cannot be tagged {app.strength.value}: {fixed[1]}",
                )
            )
            continue
        input_concept = concepts.get(app.inputs[0])
        output_ids = [
            o for o in app.outputs if by_id.get(o) and by_id[o].kind is not Kind.DA
        ]
        output_concepts = [concepts.get(o) for o in output_ids]
        if input_concept is None or not output_concepts or None in output_concepts:
            continue
        if len(output_concepts) == 1:
            combined = output_concepts[0]
        else:
            combined = DLAnd(tuple(output_concepts))
        forward = subsumes(combined, input_concept, axioms, bound)
        backward = subsumes(input_concept, combined, axioms, bound)
        proven_f = forward.status is VerdictStatus.PROVEN
        proven_b = backward.status is VerdictStatus.PROVEN
        message = None
        if app.strength is Strength.STRENGTHENING and not proven_f and proven_b:
            message = (
                "tagged strengthen, but only the input is provably below the outputs"
            )
        elif app.strength is Strength.WEAKENING and not proven_b and proven_f:
            message = (
                "tagged weaken, but only the outputs are provably below the input"
            )
        elif app.strength is Strength.EQUATING and proven_f != proven_b:
            message = "tagged equate, but only one direction is provable"
        if message:
            diagnostics.append(StrengthDiagnostic(index, app.strength, message))
    return diagnostics


# ===== PART 8: fulfillment propagation =====


class FulfillmentStatus(Enum):
    FULFILLED = "fulfilled"
    UNFULFILLED = "unfulfilled"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FulfillmentState:
    states: dict[str, FulfillmentStatus]
    threshold: Optional[int] = None
    warnings: tuple[str, ...] = ()


def propagate_fulfillment(
    model: Model, threshold: Optional[int] = None
) -> FulfillmentState:
    """Propagate fulfillment marks backwards through operator applications.

    Design artifacts count as fulfilled from the start. A one-to-one
    application fulfills its input when its output is fulfilled; a
    one-to-many application needs all outputs (or `threshold` many when
    set). Several applications on the same input act as alternatives.
    Elements dropped by a resolution stay unfulfilled.
    """
    dropped = model.dropped_ids()
    states: dict[str, FulfillmentStatus] = {}
    for element in model.elements:
        if element.id in dropped:
            states[element.id] = FulfillmentStatus.UNFULFILLED
        elif element.id in model.fulfilled_marks or element.kind is Kind.DA:
            states[element.id] = FulfillmentStatus.FULFILLED
        else:
            states[element.id] = FulfillmentStatus.UNKNOWN

    warnings: tuple[str, ...] = ()
    if threshold is not None:
        fan_out = [
            len(app.outputs)
            for app in model.applications
            if app.op in ONE_TO_MANY_OPS
        ]
        if all(threshold > n for n in fan_out):
            warnings = (
                f"ThresholdUnreachable: no application has {threshold} outputs",
            )

    changed = True
    while changed:
        changed = False
        for app in model.applications:
            if app.op is Operator.RESOLVE:
                continue
            source = app.inputs[0]
            if states.get(source) is not FulfillmentStatus.UNKNOWN:
                continue
            done = sum(
                1
                for o in app.outputs
                if states.get(o) is FulfillmentStatus.FULFILLED
            )
            if app.op in ONE_TO_ONE_OPS:
                need = len(app.outputs)
            elif threshold is not None:
                need = threshold
            else:
                need = len(app.outputs)
            if app.outputs and done >= need:
                states[source] = FulfillmentStatus.FULFILLED
                changed = True
    return FulfillmentState(states, threshold, warnings)
