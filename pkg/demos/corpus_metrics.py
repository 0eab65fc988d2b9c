# %% [markdown]
# Measuring coverage and hallucination on a tiny biography corpus.
#
# Each instance pairs an infobox-style table with a reference text and the
# named entities found in that text.  Alignment decides which records the
# text expresses and which entities have no support in the table.

# %%
from t2tfaith import align_instance, corpus_metrics, instance_metrics, parse_instance
from t2tfaith.metrics import format_summary, format_tsv_row, TSV_HEADER

lines = [
    '{"id": "A", "table": [{"attribute": "Name_ID", "value": "Mary Reid Macarthur"},'
    ' {"attribute": "date of birth", "value": "1880"},'
    ' {"attribute": "occupation", "value": "trade unionist"}],'
    ' "text": "Mary Reid Macarthur (born 1880) was a trade unionist from Glasgow.",'
    ' "entities": [{"text": "Mary Reid Macarthur", "label": "PERSON", "start": 0, "end": 19},'
    ' {"text": "1880", "label": "DATE", "start": 26, "end": 30},'
    ' {"text": "Glasgow", "label": "GPE", "start": 58, "end": 65}]}',
    '{"id": "X", "table": [{"attribute": "Name_ID", "value": "John Smith"},'
    ' {"attribute": "occupation", "value": "carpenter"}],'
    ' "text": "John Smith was a painter from Leeds in England.",'
    ' "entities": [{"text": "John Smith", "label": "PERSON", "start": 0, "end": 10},'
    ' {"text": "Leeds", "label": "GPE", "start": 30, "end": 35}]}',
]
corpus = [parse_instance(line) for line in lines]

# %% which records are covered, which entities are unsupported
for inst in corpus:
    a = align_instance(inst)
    print(inst.id, "covered:", sorted(a.covered_records),
          "hallucinated:", [inst.entities[i].text for i in a.hallucinated_entities])

# %% per-instance rows, same layout as `t2tfaith metrics`
rows = [instance_metrics(inst, align_instance(inst)) for inst in corpus]
print(TSV_HEADER)
for m in rows:
    print(format_tsv_row(m))

# %% corpus level: coverage is a macro average, the hallucination rate is
# pooled over all tokens so long texts weigh more
summary = corpus_metrics(rows)
print(format_summary(summary), end="")
print("exact values:", summary.p_cover_exact, summary.r_hallu_exact)
