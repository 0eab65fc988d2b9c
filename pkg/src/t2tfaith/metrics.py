"""Instance- and corpus-level coverage / hallucination statistics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .alignment import Alignment
from .corpus import Instance, tokenize
from .errors import DegenerateInstance, EmptyCorpus


@dataclass(frozen=True)
class InstanceMetrics:
    id: str
    covered: int
    n_records: int
    n_hallu: int
    l: int
    sentence_count: int
    n_entities: int = 0

    @property
    def p_cover_exact(self) -> Fraction:
        return Fraction(self.covered, self.n_records)

    @property
    def p_cover(self) -> float:
        return self.covered / self.n_records

    @property
    def r_hallu(self) -> Fraction:
        return hallucination_ratio(self)


@dataclass(frozen=True)
class CorpusMetrics:
    n: int
    sum_p_cover: Fraction
    total_hallu: int
    total_tokens: int
    total_sentences: int = 0

    @property
    def p_cover_exact(self) -> Fraction:
        return self.sum_p_cover / self.n

    @property
    def r_hallu_exact(self) -> Fraction:
        return Fraction(self.total_hallu, self.total_tokens)

    @property
    def l_exact(self) -> Fraction:
        return Fraction(self.total_tokens, self.n)

    @property
    def P_cover(self) -> float:
        return float(self.p_cover_exact)

    @property
    def R_hallu(self) -> float:
        return float(self.r_hallu_exact)

    @property
    def L(self) -> float:
        return float(self.l_exact)

    @property
    def mean_sentences(self) -> float:
        return self.total_sentences / self.n

    def merge(self, other: "CorpusMetrics") -> "CorpusMetrics":
        return CorpusMetrics(
            self.n + other.n,
            self.sum_p_cover + other.sum_p_cover,
            self.total_hallu + other.total_hallu,
            self.total_tokens + other.total_tokens,
            self.total_sentences + other.total_sentences,
        )


def instance_metrics(instance: Instance, alignment: Alignment) -> InstanceMetrics:
    length = len(tokenize(instance.text))
    if length == 0:
        raise DegenerateInstance(f"instance {instance.id!r}: text has no tokens")
    return InstanceMetrics(
        id=instance.id,
        covered=alignment.n_covered,
        n_records=len(instance.table),
        n_hallu=alignment.n_hallu,
        l=length,
        sentence_count=len(instance.sentences),
        n_entities=len(instance.entities),
    )


class CorpusAccumulator:
    """Streaming sum of instance metrics; merge-able for parallel reductions."""

    def __init__(self):
        self.n = 0
        self.sum_p_cover = Fraction(0)
        self.total_hallu = 0
        self.total_tokens = 0
        self.total_sentences = 0

    def add(self, m: InstanceMetrics) -> None:
        self.n += 1
        self.sum_p_cover += m.p_cover_exact
        self.total_hallu += m.n_hallu
        self.total_tokens += m.l
        self.total_sentences += m.sentence_count

    def result(self) -> CorpusMetrics:
        if self.n == 0:
            raise EmptyCorpus("no instances to aggregate")
        return CorpusMetrics(
            self.n, self.sum_p_cover, self.total_hallu, self.total_tokens, self.total_sentences
        )


def corpus_metrics(metrics: Iterable[InstanceMetrics]) -> CorpusMetrics:
    """Mean coverage, mean length and hallucinations per token over a corpus.

    ``R_hallu`` is total hallucinated entities over total tokens, which equals
    ``sum(n_hallu) / (N * L)`` without rounding ``L`` first.
    """
    acc = CorpusAccumulator()
    for m in metrics:
        acc.add(m)
    return acc.result()


def hallucination_ratio(m: InstanceMetrics) -> Fraction:
    return Fraction(m.n_hallu, m.l)


def ranking_key(m: InstanceMetrics):
    return (hallucination_ratio(m), m.n_hallu, -m.p_cover_exact, m.id)


def rank_instances(metrics: Sequence[InstanceMetrics]) -> list[str]:
    """Ids ordered from most to least faithful.

    Ascending ``n_hallu / l``; ties go to fewer hallucinations, then higher
    coverage, then ascending id.
    """
    return [m.id for m in sorted(metrics, key=ranking_key)]


TSV_HEADER = "id\tp_cover\tn_hallu\tl\tsentences\tr_hallu"


def format_tsv_row(m: InstanceMetrics) -> str:
    return (
        f"{m.id}\t{m.p_cover:.6f}\t{m.n_hallu}\t{m.l}\t{m.sentence_count}"
        f"\t{float(m.r_hallu):.6f}"
    )


def format_summary(c: CorpusMetrics) -> str:
    return (
        f"#N\t{c.n}\n"
        f"#P_cover\t{c.P_cover:.6f}\n"
        f"#R_hallu\t{c.R_hallu:.6f}\n"
        f"#L\t{c.L:.6f}\n"
    )
