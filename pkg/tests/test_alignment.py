import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from t2tfaith.alignment import (
    SUBSEQUENCE_LABELS,
    align_instance,
    exact_match_spans,
    filtered_subsequence_match,
)
from t2tfaith.corpus import (
    EntityMention,
    Instance,
    Record,
    Table,
    normalize_for_match,
    segment_sentences,
    tokenize,
)
from t2tfaith.stopwords import STOPWORDS

from synth import random_corpus


def make(text, pairs, entities=()):
    ents = []
    for surface, label in entities:
        start = text.index(surface)
        ents.append(EntityMention(surface, label, start, start + len(surface)))
    return Instance("t", Table.from_pairs(pairs), text, tuple(ents), tuple(segment_sentences(text)))


# --- independent oracles -----------------------------------------------------

def brute_subsequence(needle, haystack):
    """Try every increasing index choice into ``haystack``."""
    if not needle:
        return False
    return any(
        [haystack[i] for i in idx] == list(needle)
        for idx in itertools.combinations(range(len(haystack)), len(needle))
    )


def oracle_filtered(text):
    return [t for t in normalize_for_match(tokenize(text)) if t not in STOPWORDS]


def oracle_subsequence_match(entity, record):
    return entity.label in SUBSEQUENCE_LABELS and brute_subsequence(
        oracle_filtered(entity.text), oracle_filtered(record.value)
    )


def oracle_align(instance):
    """Enumerate every token span of the text; keep left-most non-overlapping hits."""
    tokens = tokenize(instance.text)
    covered, aligned = set(), set()
    witness_chars = {}
    for k, rec in enumerate(instance.table):
        target = normalize_for_match(tokenize(rec.value))
        if not target:
            continue
        hits = []
        for i in range(len(tokens)):
            for j in range(i + 1, len(tokens) + 1):
                if normalize_for_match(tokens[i:j]) == target and normalize_for_match(tokens[i:i + 1]) \
                        and normalize_for_match(tokens[j - 1:j]):
                    hits.append((i, j))
        chosen, last = [], -1
        for i, j in sorted(hits):
            if i > last:
                chosen.append((tokens[i].start, tokens[j - 1].end))
                last = j - 1
        if chosen:
            covered.add(k)
            witness_chars[k] = chosen
    for e_idx, ent in enumerate(instance.entities):
        for k, rec in enumerate(instance.table):
            overlap = any(s < ent.end and ent.start < e for s, e in witness_chars.get(k, ()))
            if overlap or oracle_subsequence_match(ent, rec):
                aligned.add(e_idx)
                covered.add(k)
    hallucinated = set(range(len(instance.entities))) - aligned
    return covered, aligned, hallucinated


# --- exact match -------------------------------------------------------------

def test_exact_match_examples():
    inst = make("Mary was a trade unionist from Glasgow, born 1880.",
                [("occupation", "trade unionist"), ("date of birth", "1880"), ("place", "Edinburgh")])
    spans = exact_match_spans(inst)
    assert [(s.first, s.last) for s in spans[0]] == [(3, 5)]
    assert inst.text[spans[0][0].start:spans[0][0].end] == "trade unionist"
    assert inst.text[spans[1][0].start:spans[1][0].end] == "1880"
    assert 2 not in spans


def test_exact_match_ignores_punctuation_and_case():
    inst = make("She taught at the University of California Berkeley.",
                [("employer", "university of california, Berkeley")])
    (span,) = exact_match_spans(inst)[0]
    assert inst.text[span.start:span.end] == "University of California Berkeley"


def test_exact_match_repeated_occurrences_non_overlapping():
    inst = make("a a a and a a", [("x", "a a")])
    spans = exact_match_spans(inst)[0]
    assert [(s.first, s.last) for s in spans] == [(0, 2), (4, 6)]


def test_punctuation_only_value_never_matches():
    inst = make("Hello - world.", [("x", "-")])
    assert exact_match_spans(inst) == {}


# --- filtered sub-sequence -----------------------------------------------------

@pytest.mark.parametrize(
    "surface, label, value, expected",
    [
        ("the University of California", "ORG", "University of California, Berkeley", True),
        ("1880", "DATE", "1880s", False),
        ("1880", "DATE", "1880", False),
        ("Berkeley", "GPE", "Berkeley", True),
        ("California University", "ORG", "University of California", False),
        ("The Of", "ORG", "The Of", False),
        ("Glasgow's", "GPE", "Glasgow", True),
    ],
)
def test_filtered_subsequence_examples(surface, label, value, expected):
    entity = EntityMention(surface, label, 0, len(surface))
    assert filtered_subsequence_match(entity, Record("a", value)) is expected
    assert oracle_subsequence_match(entity, Record("a", value)) is expected


VOCAB = ["the", "of", "and", "royal", "society", "london", "paris", "a", "in", "city", "x"]


@settings(max_examples=300)
@given(
    st.lists(st.sampled_from(VOCAB), max_size=8),
    st.lists(st.sampled_from(VOCAB), max_size=8),
    st.sampled_from(["PERSON", "ORG", "GPE", "DATE", "CARDINAL"]),
)
def test_subsequence_matches_oracle(ent_tokens, val_tokens, label):
    surface = " ".join(ent_tokens) or "the"
    entity = EntityMention(surface, label, 0, len(surface))
    record = Record("a", " ".join(val_tokens) or "x")
    assert filtered_subsequence_match(entity, record) == oracle_subsequence_match(entity, record)


@given(st.lists(st.sampled_from(VOCAB), min_size=1, max_size=6),
       st.sampled_from(sorted(SUBSEQUENCE_LABELS)))
def test_equal_filtered_lists_imply_match(tokens, label):
    surface = " ".join(tokens)
    if not oracle_filtered(surface):
        return
    entity = EntityMention(surface, label, 0, len(surface))
    assert filtered_subsequence_match(entity, Record("a", surface.upper()))


# --- align_instance --------------------------------------------------------------

def test_align_fixture_a(fixture_a):
    a = align_instance(fixture_a)
    assert sorted(a.covered_records) == [0, 1, 2]
    assert sorted(a.aligned_entities) == [0, 1]
    assert a.hallucinated_entities == (2,)
    assert oracle_align(fixture_a) == ({0, 1, 2}, {0, 1}, {2})
    assert all(w.spans or w.entities for w in a.covered_records.values())


def test_align_without_entities():
    inst = make("Mary Reid Macarthur was a trade unionist.",
                [("Name_ID", "Mary Reid Macarthur"), ("occupation", "trade unionist")])
    a = align_instance(inst)
    assert sorted(a.covered_records) == [0, 1]
    assert a.hallucinated_entities == ()


def test_align_unrelated_text():
    inst = make("Bob Dylan sang in Paris on 1 May.", [("Name_ID", "Ann Lee"), ("sport", "rugby")],
                [("Bob Dylan", "PERSON"), ("Paris", "GPE"), ("1 May", "DATE")])
    a = align_instance(inst)
    assert a.covered_records == {}
    assert a.hallucinated_entities == (0, 1, 2)


def test_partial_person_mention_is_aligned_by_overlap():
    inst = make("Mary Reid Macarthur was famous.", [("Name_ID", "Mary Reid Macarthur")],
                [("Mary", "DATE")])
    assert align_instance(inst).aligned_entities == {0: (0,)}


def test_alignment_matches_oracle_on_random_instances():
    for inst in random_corpus(3, 150):
        a = align_instance(inst)
        covered, aligned, hallucinated = oracle_align(inst)
        assert set(a.covered_records) == covered
        assert set(a.aligned_entities) == aligned
        assert set(a.hallucinated_entities) == hallucinated


def test_aligned_and_hallucinated_partition_entities():
    for inst in random_corpus(4, 200):
        a = align_instance(inst)
        assert set(a.aligned_entities).isdisjoint(a.hallucinated_entities)
        assert set(a.aligned_entities) | set(a.hallucinated_entities) == set(range(len(inst.entities)))
        assert align_instance(inst) == a


def test_monotone_in_text():
    rng = random.Random(5)
    for inst in random_corpus(5, 150):
        before = align_instance(inst)
        longer = inst.replace(text=inst.text + " " + rng.choice(["Paris was big.", "The end."]))
        after = align_instance(longer)
        assert set(before.covered_records) <= set(after.covered_records)
        assert set(before.aligned_entities) <= set(after.aligned_entities)


def test_monotone_in_table():
    rng = random.Random(6)
    for inst in random_corpus(6, 150):
        before = align_instance(inst)
        extra = Record("extra", rng.choice(["Paris", "the city", "Royal Society", "1901"]))
        after = align_instance(inst.replace(table=Table(inst.table.records + (extra,))))
        assert set(before.aligned_entities) <= set(after.aligned_entities)
