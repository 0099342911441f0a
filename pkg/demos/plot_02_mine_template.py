"""
Mining a template from one aggregator
=====================================

Pages of one aggregator share their section titles. Texts that recur on
most pages and are styled like titles form the template; everything else
is entity-specific content.
"""

import tempfile

from bew.corpus import load_corpus
from bew.harness.synth import generate_synthetic_corpus
from bew.sectionize import sectionize_page
from bew.template import build_frequency_map, extract_template

root = tempfile.mkdtemp()
generate_synthetic_corpus(root, n_aggregators=1, n_entities=40, dropout=0.2, seed=1)
index = load_corpus(root)
pages = [index.page("agg0", e) for e in index.entity_ids("agg0")]

# %%
# The frequency map counts on how many pages each text appears.

freq = build_frequency_map(pages)
for text, count in sorted(freq.items(), key=lambda kv: -kv[1])[:12]:
    print(f"{count:3d}  {text}")

# %%
# Only frequent texts with title styling survive.

template = extract_template(pages, "agg0", theta=0.5)
for title in template.titles:
    print(f"{title.page_frequency:.2f}  {title.min_font_size_px:4.1f}px  bold={title.bold}  {title.text}")

# %%
# Applying the template splits one page into titled sections.

first = pages[0]
for section in sectionize_page(first, template).sections:
    print(section.title, "->", [p.text for p in section.body])
