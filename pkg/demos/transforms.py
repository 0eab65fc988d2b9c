# %% [markdown]
# Data-side fixes: dropping unexpressed records, cutting references to their
# first sentences, and keeping only the most faithful instances.

# %%
import random

from t2tfaith import (
    FilterConfig, TruncateConfig, align_instance, filter_uncovered_records, instance_metrics,
    parse_instance, sample_random_fraction, select_top_fraction, truncate_reference,
)

inst = parse_instance(
    '{"id": "B", "table": [{"attribute": "Name_ID", "value": "Ann Lee"},'
    ' {"attribute": "place of birth", "value": "Dublin"},'
    ' {"attribute": "member of", "value": "Royal Society"}],'
    ' "text": "Ann Lee was a writer. She lived in Paris and later in Rome.",'
    ' "entities": [{"text": "Ann Lee", "label": "PERSON", "start": 0, "end": 7},'
    ' {"text": "Paris", "label": "GPE", "start": 35, "end": 40},'
    ' {"text": "Rome", "label": "GPE", "start": 54, "end": 58}]}'
)
a = align_instance(inst)

# %% each uncovered record survives with probability 1 - lambda; the draw is
# a hash of (seed, id, record) so reruns and worker counts do not matter
for lam in (0.0, 0.5, 1.0):
    out = filter_uncovered_records(inst, a, FilterConfig(lam, seed=42))
    print(lam, [r.value for r in out.table])

# %% truncation keeps the first sentence and the entities inside it
short = truncate_reference(inst, TruncateConfig(1))
print(repr(short.text), [e.text for e in short.entities])
for version in (inst, short):
    m = instance_metrics(version, align_instance(version))
    print(m.n_hallu, m.l, m.r_hallu)

# %% ranked selection: lowest hallucination ratio first
from t2tfaith.metrics import InstanceMetrics

rng = random.Random(0)
metrics = [InstanceMetrics(f"doc{j}", 1, 1, rng.randint(0, 4), rng.randint(10, 40), 1) for j in range(50)]
print(select_top_fraction(metrics, 0.1))
print(sample_random_fraction([m.id for m in metrics], 0.1, seed=7))
