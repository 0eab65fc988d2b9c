# %% [markdown]
# The two matching rules, one at a time.

# %%
from t2tfaith import EntityMention, Instance, Record, Table, segment_sentences
from t2tfaith.corpus import instance_to_dict, instance_from_dict
from t2tfaith import align_instance, exact_match_spans, filtered_subsequence_match

text = "She studied at the University of California, Berkeley and at Oxford."
table = Table.from_pairs([
    ("educated at", "University of California Berkeley"),
    ("educated at", "University of Oxford"),
])

# %% exact match ignores case and punctuation-only tokens (the comma here)
inst = Instance("u", table, text, (), tuple(segment_sentences(text)))
for k, spans in exact_match_spans(inst).items():
    print(k, [text[s.start:s.end] for s in spans])

# %% "Oxford" is not a contiguous match for record 1, but after dropping
# stop words it is an ordered sub-sequence of it
oxford = EntityMention("Oxford", "ORG", 61, 67)
print(filtered_subsequence_match(oxford, table[1]))

# numeric labels never use the sub-sequence rule
print(filtered_subsequence_match(EntityMention("1880", "DATE", 0, 4), Record("born", "1880 Glasgow")))

# %% put together: both entities aligned, both records covered
entities = (EntityMention("University of California, Berkeley", "ORG", 19, 53), oxford)
inst = Instance("u", table, text, entities, tuple(segment_sentences(text)))
a = align_instance(inst)
print(sorted(a.covered_records), a.aligned_entities, a.hallucinated_entities)

# offsets above were written by hand; round-tripping through the validator checks them
instance_from_dict(instance_to_dict(inst))
