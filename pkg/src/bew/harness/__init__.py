"""Evaluation metrics, dataset handling and synthetic corpora."""

from .evaluate import EvalReport, GoldAnnotation, QaRecord, load_dataset, run_eval, save_dataset
from .metrics import exact_match_at_k, f1_at_k, normalize_answer, sec_precision_at_k
from .synth import generate_synthetic_corpus
