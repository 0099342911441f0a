"""Template-guided answering of business-entity questions over aggregator pages."""

from .corpus import CorpusIndex, FetchJob, fetch_entity_pages, load_corpus, sample_pages
from .dom import PageSnapshot, StyleMap, TextLeaf, UiNode, collect_text_leaves, parse_snapshot, strip_boilerplate
from .scoring import EntityRef, MatchConfig, answer, deentity, rank_aggregators
from .sectionize import PageSections, Phrase, Section, sectionize_page
from .semantic import EmbedderSpec, Embedding, cosine, embed, match
from .template import Template, TitleSignature, extract_template

__version__ = "0.1.0"
