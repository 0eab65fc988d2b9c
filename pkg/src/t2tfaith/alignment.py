"""Heuristic record/entity alignment.

Two matching rules decide whether a record is expressed by the text:

* exact match -- a contiguous token span whose normalized tokens equal the
  normalized tokens of the record value;
* filtered sub-sequence match -- for an entity with a non-numeric label, its
  stop-word-filtered tokens form an order-preserving sub-sequence of the
  filtered value tokens.

Entities that align to no record under either rule are hallucinated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .corpus import (
    EntityMention, Instance, Record, TokenSpan, normalize_for_match, normalize_token, tokenize,
)
from .stopwords import STOPWORDS

SUBSEQUENCE_LABELS = frozenset(
    {"PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT", "WORK_OF_ART"}
)


@dataclass(frozen=True)
class RecordWitness:
    spans: tuple[TokenSpan, ...]
    entities: tuple[int, ...]


@dataclass(frozen=True)
class Alignment:
    """Result of :func:`align_instance`.

    ``covered_records`` maps record index -> witnesses, ``aligned_entities``
    maps entity index -> matched record indices, ``hallucinated_entities``
    lists the remaining entity indices.
    """

    covered_records: Mapping[int, RecordWitness]
    aligned_entities: Mapping[int, tuple[int, ...]]
    hallucinated_entities: tuple[int, ...]

    @property
    def n_covered(self) -> int:
        return len(self.covered_records)

    @property
    def n_hallu(self) -> int:
        return len(self.hallucinated_entities)


def filter_stopwords(tokens):
    return [t for t in tokens if t not in STOPWORDS]


def _filtered(text: str) -> list[str]:
    return filter_stopwords(normalize_for_match(tokenize(text)))


def is_subsequence(needle, haystack) -> bool:
    it = iter(haystack)
    return all(any(x == y for y in it) for x in needle)


def filtered_subsequence_match(entity: EntityMention, record: Record) -> bool:
    """Filtered sub-sequence rule for one (entity, record) pair."""
    if entity.label not in SUBSEQUENCE_LABELS:
        return False
    needle = _filtered(entity.text)
    return bool(needle) and is_subsequence(needle, _filtered(record.value))


def _find_spans(norm_text, positions, index, value_norm, tokens):
    m = len(value_norm)
    spans = []
    next_free = 0
    for p in index.get(value_norm[0], ()):
        if p < next_free or p + m > len(norm_text):
            continue
        if norm_text[p:p + m] == value_norm:
            first, last = positions[p], positions[p + m - 1] + 1
            spans.append(TokenSpan(first, last, tokens[first].start, tokens[last - 1].end))
            next_free = p + m
    return spans


def _text_index(instance: Instance):
    tokens = tokenize(instance.text)
    norm_text, positions = [], []
    for i, tok in enumerate(tokens):
        norm = normalize_token(tok.text)
        if norm is not None:
            norm_text.append(norm)
            positions.append(i)
    index: dict[str, list[int]] = {}
    for p, t in enumerate(norm_text):
        index.setdefault(t, []).append(p)
    return tokens, norm_text, positions, index


def exact_match_spans(instance: Instance) -> dict[int, list[TokenSpan]]:
    """Left-to-right, non-overlapping exact matches of every record value.

    Punctuation-only tokens are ignored on both sides, so a value like
    ``"University of California, Berkeley"`` matches the same words in the
    text with or without the comma.  Records without a match are omitted.
    """
    tokens, norm_text, positions, index = _text_index(instance)
    out = {}
    for k, record in enumerate(instance.table):
        value_norm = normalize_for_match(tokenize(record.value))
        if not value_norm:
            continue
        spans = _find_spans(norm_text, positions, index, value_norm, tokens)
        if spans:
            out[k] = spans
    return out


def align_instance(instance: Instance) -> Alignment:
    exact = exact_match_spans(instance)
    record_filtered = [_filtered(r.value) for r in instance.table]

    witness_entities: dict[int, list[int]] = {}
    aligned: dict[int, tuple[int, ...]] = {}
    hallucinated = []
    for i, ent in enumerate(instance.entities):
        matched = set()
        for k, spans in exact.items():
            if any(s.start < ent.end and ent.start < s.end for s in spans):
                matched.add(k)
        if ent.label in SUBSEQUENCE_LABELS:
            needle = _filtered(ent.text)
            if needle:
                for k, hay in enumerate(record_filtered):
                    if is_subsequence(needle, hay):
                        matched.add(k)
        if matched:
            aligned[i] = tuple(sorted(matched))
            for k in matched:
                witness_entities.setdefault(k, []).append(i)
        else:
            hallucinated.append(i)

    covered = {}
    for k in sorted(set(exact) | set(witness_entities)):
        covered[k] = RecordWitness(tuple(exact.get(k, ())), tuple(witness_entities.get(k, ())))
    return Alignment(covered, aligned, tuple(hallucinated))


def alignment_to_dict(instance: Instance, alignment: Alignment) -> dict:
    """Audit sidecar record for one instance."""
    entities = []
    for i, ent in enumerate(instance.entities):
        records = alignment.aligned_entities.get(i, ())
        entities.append({
            "index": i,
            "text": ent.text,
            "label": ent.label,
            "status": "aligned" if records else "hallucinated",
            "records": list(records),
        })
    return {
        "id": instance.id,
        "covered_records": sorted(alignment.covered_records),
        "entities": entities,
    }


def alignment_to_json(instance: Instance, alignment: Alignment) -> str:
    return json.dumps(alignment_to_dict(instance, alignment), ensure_ascii=False, separators=(",", ":"))
