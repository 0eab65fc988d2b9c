"""Core data types, JSON Lines ingestion, tokenization and sentence splitting.

All offsets are code-point indices into the original text (Python ``str``
indexing), half-open.  Nothing here depends on an external NLP toolkit: entity
annotations are ingested, and the tokenizer/splitter are small fixed rule sets
so results are reproducible byte for byte.
"""

from __future__ import annotations

import bisect
import json
import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .errors import ParseError, ValidationError

ENTITY_LABELS = frozenset(
    {
        "PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT",
        "WORK_OF_ART", "DATE", "TIME", "CARDINAL", "ORDINAL", "QUANTITY",
        "PERCENT", "MONEY", "LANGUAGE", "LAW", "OTHER",
    }
)

# lower-cased, trailing period included
ABBREVIATIONS = frozenset(
    {"mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "prof.", "vs.",
     "etc.", "e.g.", "i.e.", "no.", "u.s."}
)

SENTENCE_TERMINATORS = ".!?"
OPENING_QUOTES = "\"'“‘«„"
POSSESSIVES = ("'s", "’s", "'S", "’S")

_CHUNK_RE = re.compile(r"\S+")
_KNOWN_KEYS = ("id", "table", "text", "entities", "sentences")


@dataclass(frozen=True)
class Record:
    attribute: str
    value: str


@dataclass(frozen=True)
class Table:
    records: tuple[Record, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def __getitem__(self, index: int) -> Record:
        return self.records[index]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "Table":
        return cls(tuple(Record(a, v) for a, v in pairs))


@dataclass(frozen=True)
class EntityMention:
    text: str
    label: str
    start: int
    end: int


@dataclass(frozen=True)
class Span:
    start: int
    end: int


class Token(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenSpan:
    """Half-open token range ``[first, last)`` plus the characters it covers."""

    first: int
    last: int
    start: int
    end: int


@dataclass(frozen=True)
class Instance:
    """One (table, text, entity annotations) triple.

    ``extra`` carries any additional top-level JSON fields through pipelines
    untouched (``plan``, ``rendered``, ``raw_plan`` ...).
    """

    id: str
    table: Table
    text: str
    entities: tuple[EntityMention, ...] = ()
    sentences: tuple[Span, ...] = ()
    extra: Mapping[str, Any] = field(default_factory=dict, hash=False)

    @property
    def table_empty(self) -> bool:
        """Set on instances whose table lost every record (caller should drop them)."""
        return len(self.table) == 0

    def sentence_index(self, offset: int) -> int:
        """Index of the sentence containing ``offset`` (or the last one starting before it)."""
        starts = [s.start for s in self.sentences]
        return max(bisect.bisect_right(starts, offset) - 1, 0)

    def entity_sentences(self) -> tuple[int, ...]:
        """Sentence index of every entity, assigned by its start offset."""
        return tuple(self.sentence_index(e.start) for e in self.entities)

    def crossing_entities(self) -> tuple[int, ...]:
        """Entities whose span is not contained in a single sentence span."""
        out = []
        for i, ent in enumerate(self.entities):
            sent = self.sentences[self.sentence_index(ent.start)] if self.sentences else None
            if sent is None or not (sent.start <= ent.start and ent.end <= sent.end):
                out.append(i)
        return tuple(out)

    def replace(self, **changes) -> "Instance":
        values = dict(
            id=self.id, table=self.table, text=self.text, entities=self.entities,
            sentences=self.sentences, extra=self.extra,
        )
        values.update(changes)
        return Instance(**values)


class _PunctTable(dict):
    """char -> is punctuation, filled lazily from the Unicode database."""

    def __missing__(self, ch):
        flag = self[ch] = unicodedata.category(ch).startswith("P")
        return flag


_PUNCT = _PunctTable()
_is_punct = _PUNCT.__getitem__


def is_punctuation(token: str) -> bool:
    """True for non-empty strings made only of punctuation characters."""
    return bool(token) and all(_is_punct(c) for c in token)


def _split_chunk(chunk: str, offset: int) -> list[Token]:
    lo, hi = 0, len(chunk)
    trailing = []
    while hi > lo and _is_punct(chunk[hi - 1]):
        hi -= 1
        trailing.append(Token(chunk[hi], offset + hi, offset + hi + 1))
    trailing.reverse()
    if chunk[lo:hi] in POSSESSIVES:
        # detached possessive ("Jackson 's") stays one token
        return [Token(chunk[lo:hi], offset + lo, offset + hi)] + trailing
    leading = []
    while lo < hi and _is_punct(chunk[lo]):
        leading.append(Token(chunk[lo], offset + lo, offset + lo + 1))
        lo += 1
    core = []
    if hi > lo:
        word = chunk[lo:hi]
        if len(word) > 2 and word.endswith(POSSESSIVES):
            core.append(Token(word[:-2], offset + lo, offset + hi - 2))
            core.append(Token(word[-2:], offset + hi - 2, offset + hi))
        else:
            core.append(Token(word, offset + lo, offset + hi))
    return leading + core + trailing


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens with character spans.

    Whitespace separates chunks; leading and trailing punctuation characters of
    a chunk become single-character tokens and a trailing possessive ``'s`` is
    split off.  Internal hyphens and apostrophes stay inside the token.

    >>> [t.text for t in tokenize("Mary (born 1880).")]
    ['Mary', '(', 'born', '1880', ')', '.']
    """
    return list(_tokenize(text))


# small: only meant to catch repeated calls on the same instance's strings
@lru_cache(maxsize=512)
def _tokenize(text: str) -> tuple[Token, ...]:
    tokens: list[Token] = []
    punct = _PUNCT
    for m in _CHUNK_RE.finditer(text):
        chunk, start = m.group(), m.start()
        if punct[chunk[0]] or punct[chunk[-1]] or chunk.endswith(POSSESSIVES):
            tokens.extend(_split_chunk(chunk, start))
        else:
            tokens.append(Token(chunk, start, start + len(chunk)))
    return tuple(tokens)


def _ends_with_abbreviation(text: str, end: int) -> bool:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:end]
    while word and _is_punct(word[0]) and word[0] != ".":
        word = word[1:]
    return word.lower() in ABBREVIATIONS


def segment_sentences(text: str) -> list[Span]:
    """Rule-based sentence spans; inter-sentence whitespace is excluded."""
    spans: list[Span] = []
    n = len(text)
    start = 0
    while start < n and text[start].isspace():
        start += 1
    i = start
    while i < n:
        ch = text[i]
        if ch in SENTENCE_TERMINATORS and i + 1 < n and text[i + 1].isspace():
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            if j < n:
                nxt = text[j]
                opens = nxt.isupper() or nxt.isdigit() or nxt in OPENING_QUOTES
                if opens and not (ch == "." and _ends_with_abbreviation(text, i + 1)):
                    spans.append(Span(start, i + 1))
                    start = j
                    i = j
                    continue
        i += 1
    end = len(text.rstrip())
    if start < end:
        spans.append(Span(start, end))
    return spans


def normalize_for_match(tokens: Iterable[Token | str]) -> list[str]:
    """Case-fold + NFC every token and drop punctuation-only tokens."""
    out = []
    for tok in tokens:
        norm = normalize_token(tok if isinstance(tok, str) else tok.text)
        if norm is not None:
            out.append(norm)
    return out


@lru_cache(maxsize=1 << 16)
def normalize_token(s: str) -> str | None:
    """Match form of a single token, or None for punctuation-only tokens."""
    if is_punctuation(s):
        return None
    return unicodedata.normalize("NFC", unicodedata.normalize("NFC", s).casefold())


# --- ingestion -------------------------------------------------------------

def _is_object(value) -> bool:
    return type(value) is dict or isinstance(value, Mapping)


def _require_str(obj, key, what):
    value = obj.get(key)
    if not isinstance(value, str):
        raise ValidationError(f"{what}: field {key!r} must be a string")
    return value


def _require_int(obj, key, what):
    value = obj.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{what}: field {key!r} must be an integer")
    return value


def _validate_sentences(text: str, spans: Sequence[Span]) -> None:
    prev_end = 0
    for k, s in enumerate(spans):
        if not (0 <= s.start < s.end <= len(text)):
            raise ValidationError(f"sentence {k} [{s.start},{s.end}) out of bounds")
        if s.start < prev_end:
            raise ValidationError(f"sentence {k} overlaps or precedes the previous one")
        if text[prev_end:s.start].strip():
            raise ValidationError(f"non-whitespace text before sentence {k} is not covered")
        prev_end = s.end
    if text[prev_end:].strip():
        raise ValidationError("non-whitespace text after the last sentence is not covered")


def instance_from_dict(obj: Mapping[str, Any]) -> Instance:
    """Build and validate an :class:`Instance` from a decoded JSON object."""
    if not isinstance(obj, Mapping):
        raise ValidationError("instance must be a JSON object")
    iid = _require_str(obj, "id", "instance")
    if not iid:
        raise ValidationError("instance id must be non-empty")
    text = _require_str(obj, "text", f"instance {iid!r}")
    if not text:
        raise ValidationError(f"instance {iid!r}: empty text")

    raw_table = obj.get("table")
    if not isinstance(raw_table, list):
        raise ValidationError(f"instance {iid!r}: table must be an array")
    if not raw_table:
        raise ValidationError(f"instance {iid!r}: empty table")
    records = []
    for k, rec in enumerate(raw_table):
        what = f"instance {iid!r} record {k}"
        if not _is_object(rec):
            raise ValidationError(f"{what}: must be an object")
        attribute = _require_str(rec, "attribute", what).strip()
        value = _require_str(rec, "value", what).strip()
        if not attribute or not value:
            raise ValidationError(f"{what}: attribute and value must be non-empty")
        records.append(Record(attribute, value))

    entities = []
    for k, ent in enumerate(obj.get("entities") or []):
        what = f"instance {iid!r} entity {k}"
        if not _is_object(ent):
            raise ValidationError(f"{what}: must be an object")
        mention = EntityMention(
            _require_str(ent, "text", what), _require_str(ent, "label", what),
            _require_int(ent, "start", what), _require_int(ent, "end", what),
        )
        if mention.label not in ENTITY_LABELS:
            raise ValidationError(f"{what}: unknown label {mention.label!r}")
        if not (0 <= mention.start < mention.end <= len(text)):
            raise ValidationError(
                f"{what} ({mention.text!r}): span [{mention.start},{mention.end}) out of bounds"
            )
        if text[mention.start:mention.end] != mention.text:
            raise ValidationError(
                f"{what} ({mention.text!r}): text at [{mention.start},{mention.end}) "
                f"is {text[mention.start:mention.end]!r}"
            )
        entities.append(mention)
    entities.sort(key=lambda e: (e.start, e.end))

    raw_sentences = obj.get("sentences")
    if raw_sentences is None:
        sentences = segment_sentences(text)
    else:
        if not isinstance(raw_sentences, list):
            raise ValidationError(f"instance {iid!r}: sentences must be an array")
        sentences = []
        for k, s in enumerate(raw_sentences):
            what = f"instance {iid!r} sentence {k}"
            if not _is_object(s):
                raise ValidationError(f"{what}: must be an object")
            sentences.append(Span(_require_int(s, "start", what), _require_int(s, "end", what)))
        _validate_sentences(text, sentences)

    extra = {k: v for k, v in obj.items() if k not in _KNOWN_KEYS}
    return Instance(iid, Table(tuple(records)), text, tuple(entities), tuple(sentences), extra)


def parse_instance(line: str, line_no: int | None = None) -> Instance:
    """Parse one JSON Lines record into a validated :class:`Instance`."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} (column {exc.colno})", line_no) from None
    return instance_from_dict(obj)


def instance_to_dict(instance: Instance) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": instance.id,
        "table": [{"attribute": r.attribute, "value": r.value} for r in instance.table],
        "text": instance.text,
        "entities": [
            {"text": e.text, "label": e.label, "start": e.start, "end": e.end}
            for e in instance.entities
        ],
        "sentences": [{"start": s.start, "end": s.end} for s in instance.sentences],
    }
    for key, value in instance.extra.items():
        obj[key] = value
    return obj


def serialize_instance(instance: Instance) -> str:
    """One JSON Lines record (no trailing newline), UTF-8 safe."""
    return json.dumps(instance_to_dict(instance), ensure_ascii=False, separators=(",", ":"))
