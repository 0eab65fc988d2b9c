"""Serialized content plans and model-input rendering.

A plan is a list of sentence-plans; each sentence-plan is an ordered list of
record references (and, in augmented plans, literal entity mentions that the
table does not account for).  Plans serialize to whitespace-separated text::

    Name_ID date_of_birth SEP occupation                 # attribute-only
    Name_ID : Mary Reid Macarthur SEP occupation : ...   # values attached
    ... occupation : trade unionist <ent> Glasgow </ent> # augmented

Attribute names use ``_`` for internal whitespace so that every attribute is a
single token.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .alignment import Alignment
from .corpus import Instance, Record, Table
from .errors import ParseError, UsageError, ValidationError

SEP = "SEP"
PLAN_MARKER = "<plan>"
ENT_OPEN = "<ent>"
ENT_CLOSE = "</ent>"
VALUE_MARKER = ":"
RECORD_SEP = " | "
NAME_ATTRIBUTE = "Name_ID"
ENTITY_ATTRIBUTE = "ENT"

_RESERVED = frozenset({SEP, PLAN_MARKER, ENT_OPEN, ENT_CLOSE, VALUE_MARKER})


@dataclass(frozen=True)
class RecordRef:
    index: int


@dataclass(frozen=True)
class EntityLiteral:
    text: str


PlanItem = Union[RecordRef, EntityLiteral]


@dataclass(frozen=True)
class Plan:
    sentences: tuple[tuple[PlanItem, ...], ...]

    @classmethod
    def of(cls, sentences: Iterable[Iterable[PlanItem]]) -> "Plan":
        return cls(tuple(tuple(s) for s in sentences))

    def records(self) -> list[int]:
        return [it.index for s in self.sentences for it in s if isinstance(it, RecordRef)]

    def literals(self) -> list[str]:
        return [it.text for s in self.sentences for it in s if isinstance(it, EntityLiteral)]


class RenderMode(enum.Enum):
    R = "r"
    R_PLAN = "rp"
    R_AUGPLAN = "rep"
    E = "e"
    VAL = "val"


def attribute_key(attribute: str) -> str:
    return "_".join(attribute.split())


def _key_index(table: Table) -> dict[str, list[int]]:
    keys: dict[str, list[int]] = defaultdict(list)
    for k, record in enumerate(table):
        keys[attribute_key(record.attribute)].append(k)
    return dict(keys)


# --- gold and augmented plans ----------------------------------------------

def _witness_starts(instance: Instance, alignment: Alignment) -> dict[int, list[int]]:
    starts: dict[int, list[int]] = {}
    for k, witness in alignment.covered_records.items():
        offsets = [s.start for s in witness.spans]
        offsets += [instance.entities[i].start for i in witness.entities]
        starts[k] = sorted(offsets)
    return starts


def _first_in_sentence(instance: Instance, offsets: Sequence[int]) -> dict[int, int]:
    first: dict[int, int] = {}
    for off in offsets:
        first.setdefault(instance.sentence_index(off), off)
    return first


def extract_gold_plan(instance: Instance, alignment: Alignment) -> Plan:
    """One sentence-plan per sentence, records ordered by first witness.

    Sentences without any witnessed record give empty sentence-plans, and a
    record witnessed in several sentences appears in each of them.
    """
    per_sentence: list[list[tuple[int, int]]] = [[] for _ in instance.sentences]
    for k, offsets in _witness_starts(instance, alignment).items():
        for sent, off in _first_in_sentence(instance, offsets).items():
            per_sentence[sent].append((off, k))
    return Plan.of(
        [RecordRef(k) for _, k in sorted(items)] for items in per_sentence
    )


def augment_plan(plan: Plan, instance: Instance, alignment: Alignment) -> Plan:
    """Insert hallucinated entity mentions into a gold plan by text position."""
    if len(plan.sentences) != len(instance.sentences):
        raise ValidationError(
            f"plan has {len(plan.sentences)} sentence-plans, "
            f"instance {instance.id!r} has {len(instance.sentences)} sentences"
        )
    literals: list[list[tuple[int, str]]] = [[] for _ in instance.sentences]
    for i in alignment.hallucinated_entities:
        ent = instance.entities[i]
        literals[instance.sentence_index(ent.start)].append((ent.start, ent.text))
    if not any(literals):
        return plan
    starts = _witness_starts(instance, alignment)
    out = []
    for s, items in enumerate(plan.sentences):
        keyed = []
        pos = -1
        for item in items:
            if isinstance(item, RecordRef):
                first = _first_in_sentence(instance, starts.get(item.index, ()))
                pos = first.get(s, pos)
            keyed.append((pos, 0, item))
        keyed += [(off, 1, EntityLiteral(text)) for off, text in literals[s]]
        # stable on ties: records before literals, original order within each
        keyed.sort(key=lambda t: (t[0], t[1]))
        out.append(tuple(item for _, _, item in keyed))
    return Plan(tuple(out))


def pseudo_parallel_instance(instance: Instance, plan: Plan) -> Instance:
    """The instance with each plan literal appended as an ``ENT`` record."""
    extra = tuple(Record(ENTITY_ATTRIBUTE, text) for text in plan.literals())
    return instance.replace(table=Table(instance.table.records + extra))


# --- learned plans ---------------------------------------------------------

def _fallback_plan(table: Table) -> Plan:
    return Plan(((tuple(RecordRef(idxs[0]) for idxs in _key_index(table).values())),))


def _finish(sentences: list[list[PlanItem]], table: Table) -> Plan:
    kept = [tuple(s) for s in sentences if s]
    if not kept:
        return _fallback_plan(table)
    return Plan(tuple(kept))


class _Resolver:
    """Maps plan tokens to records while enforcing the one-use rule."""

    def __init__(self, table: Table):
        self.table = table
        self.keys = _key_index(table)
        self.used: set[int] = set()
        self.name_uses = 0

    def default(self, key: str) -> int:
        idxs = self.keys[key]
        if key == NAME_ATTRIBUTE:
            return idxs[self.name_uses % len(idxs)]
        return idxs[0]

    def take(self, key: str, index: int) -> RecordRef | None:
        if key == NAME_ATTRIBUTE:
            self.name_uses += 1
            return RecordRef(index)
        if index in self.used:
            return None
        self.used.add(index)
        return RecordRef(index)


def postedit_plan(raw: str | Sequence[str], table: Table) -> Plan:
    """Clean a planner's raw output into a well-formed plan.

    Unknown tokens are dropped, empty sentence-plans removed, and every
    attribute except ``Name_ID`` kept only at its first occurrence.  Repeated
    ``Name_ID`` mentions cycle through the table's ``Name_ID`` records.  If
    nothing survives, the table-order single-sentence plan is returned.
    """
    tokens = raw.split() if isinstance(raw, str) else list(raw)
    resolver = _Resolver(table)
    sentences: list[list[PlanItem]] = [[]]
    for tok in tokens:
        if tok == SEP:
            sentences.append([])
        elif tok in resolver.keys and tok not in _RESERVED:
            ref = resolver.take(tok, resolver.default(tok))
            if ref is not None:
                sentences[-1].append(ref)
    return _finish(sentences, table)


def check_plan_grammar(plan: Plan, table: Table) -> list[str]:
    """Violations of the post-edited plan grammar (empty list when valid)."""
    problems = []
    if not plan.sentences:
        problems.append("plan has no sentence-plans")
    seen: set[int] = set()
    for s, items in enumerate(plan.sentences):
        if not items:
            problems.append(f"sentence-plan {s} is empty")
        for item in items:
            if not isinstance(item, RecordRef):
                problems.append(f"sentence-plan {s} contains a non-record item {item!r}")
                continue
            if not 0 <= item.index < len(table):
                problems.append(f"record index {item.index} is not in the table")
                continue
            key = attribute_key(table[item.index].attribute)
            if key == NAME_ATTRIBUTE:
                continue
            if item.index in seen:
                problems.append(f"record {item.index} ({key}) repeated")
            seen.add(item.index)
    return problems


# --- rendering -------------------------------------------------------------

def _check_attribute(attribute: str) -> None:
    if RECORD_SEP in attribute or PLAN_MARKER in attribute:
        raise ValidationError(f"attribute {attribute!r} contains a reserved delimiter")


def _render_item(item: PlanItem, table: Table, attach_values: bool) -> str:
    if isinstance(item, EntityLiteral):
        words = item.text.split()
        if not words or ENT_OPEN in words or ENT_CLOSE in words:
            raise ValidationError(f"entity literal {item.text!r} cannot be serialized")
        return f"{ENT_OPEN} {' '.join(words)} {ENT_CLOSE}"
    record = table[item.index]
    _check_attribute(record.attribute)
    key = attribute_key(record.attribute)
    if key in _RESERVED:
        raise ValidationError(f"attribute {record.attribute!r} collides with a plan keyword")
    if attach_values:
        return f"{key} {VALUE_MARKER} {record.value}"
    return key


def render_plan(plan: Plan, table: Table, attach_values: bool = False) -> str:
    return f" {SEP} ".join(
        " ".join(_render_item(item, table, attach_values) for item in items)
        for items in plan.sentences
    )


def render_records(table: Table) -> str:
    for record in table:
        _check_attribute(record.attribute)
    return RECORD_SEP.join(f"{r.attribute} {VALUE_MARKER} {r.value}" for r in table)


def render_input(
    instance: Instance,
    mode: RenderMode | str,
    plan: Plan | None = None,
    attach_values: bool = False,
) -> str:
    """Serialize an instance as model input.

    ``R_PLAN`` renders attribute-only plans unless ``attach_values`` is set;
    ``R_AUGPLAN`` always attaches values and keeps entity literals inline.
    """
    mode = RenderMode(mode) if isinstance(mode, str) else mode
    if mode in (RenderMode.R_PLAN, RenderMode.R_AUGPLAN):
        if plan is None:
            raise UsageError(f"mode {mode.name} requires a plan")
        attach = attach_values or mode is RenderMode.R_AUGPLAN
        body = render_plan(plan, instance.table, attach_values=attach)
        return f"{render_records(instance.table)} {PLAN_MARKER} {body}"
    if mode is RenderMode.R:
        return render_records(instance.table)
    if mode is RenderMode.E:
        return RECORD_SEP.join(e.text for e in instance.entities)
    return RECORD_SEP.join(r.value for r in instance.table)


# --- parsing ---------------------------------------------------------------

def _match_value(tokens: Sequence[str], pos: int, candidates: Sequence[int], table: Table,
                 preferred: int) -> tuple[int, int] | None:
    best_len, best = -1, []
    for k in candidates:
        words = table[k].value.split()
        if words and tokens[pos:pos + len(words)] == words:
            if len(words) > best_len:
                best_len, best = len(words), [k]
            elif len(words) == best_len:
                best.append(k)
    if not best:
        return None
    return (preferred if preferred in best else best[0]), best_len


def parse_plan(text: str, table: Table) -> Plan:
    """Parse a plan body in attribute-only or value-attached form.

    Tokens that are not plan vocabulary are dropped and the result obeys the
    same rules as :func:`postedit_plan`.  Raises :class:`ParseError` on
    unbalanced ``<ent>`` markup.
    """
    tokens = text.split()
    resolver = _Resolver(table)
    sentences: list[list[PlanItem]] = [[]]
    i, n = 0, len(tokens)
    while i < n:
        tok = tokens[i]
        if tok == ENT_OPEN:
            try:
                close = tokens.index(ENT_CLOSE, i + 1)
            except ValueError:
                raise ParseError(f"unclosed {ENT_OPEN} at token {i}") from None
            words = tokens[i + 1:close]
            if not words or ENT_OPEN in words:
                raise ParseError(f"malformed entity literal at token {i}")
            sentences[-1].append(EntityLiteral(" ".join(words)))
            i = close + 1
            continue
        if tok == ENT_CLOSE:
            raise ParseError(f"unmatched {ENT_CLOSE} at token {i}")
        if tok == SEP:
            sentences.append([])
            i += 1
            continue
        if tok in resolver.keys and tok not in _RESERVED:
            index = resolver.default(tok)
            i += 1
            if i < n and tokens[i] == VALUE_MARKER:
                i += 1
                hit = _match_value(tokens, i, resolver.keys[tok], table, index)
                if hit is not None:
                    index, width = hit
                    i += width
            ref = resolver.take(tok, index)
            if ref is not None:
                sentences[-1].append(ref)
            continue
        i += 1
    return _finish(sentences, table)
