# %% [markdown]
# Content plans: which records each sentence talks about, plus any entity the
# table cannot account for.

# %%
from t2tfaith import (
    RenderMode, align_instance, augment_plan, check_plan_grammar, extract_gold_plan,
    parse_instance, parse_plan, postedit_plan, render_input, render_plan,
)
from t2tfaith.planning import pseudo_parallel_instance

inst = parse_instance(
    '{"id": "A", "table": [{"attribute": "Name_ID", "value": "Mary Reid Macarthur"},'
    ' {"attribute": "date of birth", "value": "1880"},'
    ' {"attribute": "occupation", "value": "trade unionist"}],'
    ' "text": "Mary Reid Macarthur (born 1880) was a trade unionist from Glasgow.",'
    ' "entities": [{"text": "Mary Reid Macarthur", "label": "PERSON", "start": 0, "end": 19},'
    ' {"text": "1880", "label": "DATE", "start": 26, "end": 30},'
    ' {"text": "Glasgow", "label": "GPE", "start": 58, "end": 65}]}'
)
a = align_instance(inst)

# %% gold plan from the reference, then the hallucinated entity slotted in
gold = extract_gold_plan(inst, a)
aug = augment_plan(gold, inst, a)
print(render_plan(gold, inst.table))
print(render_plan(aug, inst.table, attach_values=True))

# %% linearized model inputs
for mode in RenderMode:
    plan = aug if mode in (RenderMode.R_PLAN, RenderMode.R_AUGPLAN) else None
    print(mode.value, "->", render_input(inst, mode, plan))

# %% adding the literal as an ENT record makes the pair hallucination-free
pseudo = pseudo_parallel_instance(inst, aug)
print(align_instance(pseudo).hallucinated_entities)

# %% a noisy predicted plan is repaired into something well formed
raw = "Name_ID bogus SEP SEP occupation occupation"
fixed = postedit_plan(raw, inst.table)
print(render_plan(fixed, inst.table), check_plan_grammar(fixed, inst.table))
print(parse_plan(render_plan(fixed, inst.table), inst.table) == fixed)
