"""
Answering a question about one entity
=====================================

Aggregators are ranked on sample pages of other entities, then the
entity's own pages on the best aggregators supply candidate phrases.
"""

import json
import tempfile

from bew.corpus import load_corpus, sample_entity_ids
from bew.harness.synth import generate_synthetic_corpus
from bew.scoring import EntityRef, MatchConfig, answer_detailed, deentity, load_entities
from bew.template import extract_template

root = tempfile.mkdtemp()
fx = generate_synthetic_corpus(root, n_aggregators=3, n_entities=20, seed=7)
index = load_corpus(root)
for agg in index.aggregator_ids():
    pages = [index.page(agg, e) for e in sample_entity_ids(index, agg, 100)]
    index.set_template(extract_template(pages, agg))
entities = load_entities(fx.entities_path)

record = fx.records[0]
print(record.question)
print(deentity(record.question, entities))

# %%
# The detailed result exposes every stage: the aggregator ranking, the
# scored sections of the entity page and the ranked candidates.

result = answer_detailed(record.question, EntityRef(record.entity), index, MatchConfig(), entities)
for agg, score in result.ranking:
    print(f"{agg}: {score:.3f}")
for s in result.sections[:4]:
    print(f"{s.final_score:.3f} = {s.sec_score:.3f} + {s.prior:.3f}  {s.section.title}")
print(json.dumps({"answers": [c.to_json() for c in result.candidates[:3]]}, indent=2))
print("gold:", sorted(set(record.answers)))
