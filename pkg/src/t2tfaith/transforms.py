"""Corpus modification operators: record filtering, truncation, selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .alignment import Alignment
from .corpus import Instance, Table
from .errors import ValidationError
from .hashing import MASK64, seeded_hash, unit_float
from .metrics import InstanceMetrics, rank_instances


def _check_seed(seed: int) -> None:
    if not (0 <= seed <= MASK64):
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed}")


def _count(fraction, n: int) -> int:
    # decimal reading of floats so that e.g. 0.05 * 100 is exactly 5
    exact = Fraction(repr(fraction)) if isinstance(fraction, float) else Fraction(fraction)
    if not (0 < exact <= 1):
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    return math.ceil(exact * n)


@dataclass(frozen=True)
class FilterConfig:
    lam: float
    seed: int = 0

    def __post_init__(self):
        if not (0 <= self.lam <= 1):
            raise ValidationError(f"lambda must be in [0, 1], got {self.lam}")
        _check_seed(self.seed)


@dataclass(frozen=True)
class TruncateConfig:
    n_keep: int

    def __post_init__(self):
        if self.n_keep < 1:
            raise ValidationError(f"n_keep must be >= 1, got {self.n_keep}")


def record_draw(instance_id: str, attribute: str, value: str, index: int, seed: int) -> float:
    """Uniform draw in [0, 1) for one record, a pure function of its content."""
    return unit_float(seeded_hash(seed, instance_id, attribute, value, str(index)))


def filter_uncovered_records(instance: Instance, alignment: Alignment, cfg: FilterConfig) -> Instance:
    """Drop each uncovered record whose draw falls below ``cfg.lam``.

    Covered records always survive.  If every record goes, the result has an
    empty table (``instance.table_empty``) and should be dropped by the caller.
    """
    if cfg.lam == 0:
        return instance
    kept = []
    for k, record in enumerate(instance.table):
        if k in alignment.covered_records:
            kept.append(record)
        elif record_draw(instance.id, record.attribute, record.value, k, cfg.seed) >= cfg.lam:
            kept.append(record)
    if len(kept) == len(instance.table):
        return instance
    return instance.replace(table=Table(tuple(kept)))


def truncate_reference(instance: Instance, cfg: TruncateConfig) -> Instance:
    """Keep the first ``n_keep`` sentences of the text.

    Entity offsets are unchanged; mentions that do not end inside the kept
    prefix are dropped.
    """
    if cfg.n_keep >= len(instance.sentences):
        return instance
    kept = instance.sentences[:cfg.n_keep]
    end = kept[-1].end
    entities = tuple(e for e in instance.entities if e.end <= end)
    return instance.replace(text=instance.text[:end], entities=entities, sentences=kept)


def select_top_fraction(metrics: Sequence[InstanceMetrics], fraction: float) -> list[str]:
    ranked = rank_instances(metrics)
    return ranked[:_count(fraction, len(ranked))]


def sample_random_fraction(ids: Sequence[str], fraction: float, seed: int) -> list[str]:
    """Seeded uniform sample without replacement, in hash order."""
    n = _count(fraction, len(ids))
    _check_seed(seed)
    order = sorted(ids, key=lambda i: (seeded_hash(seed, i), i))
    return order[:n]
