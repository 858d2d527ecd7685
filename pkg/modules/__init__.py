"""
Graph-Guided Document Translation - Modules Package
===================================================

This package contains all core modules of the document translation pipeline:
- core_model: Documents, discourses, graphs, memories and assembly
- prompts: Agent prompt templates with few-shot examples
- llm_gateway: Chat backends, response cache and usage accounting
- run_config: Validated run configuration
- text_vectors: TF-IDF and spaCy sentence vectors
- segmenter: Discourse segmentation strategies
- graph_builder: Discourse graph strategies and path enumeration
- memory_agent: Local memory extraction and aggregation
- translator: Translation agent and the per-document pipeline
- ingestion: Corpus loading and sentence splitting
- run_store: Run directory persistence
- metrics: d-BLEU, terminology and zero-pronoun metrics, path consistency
- corpus_stats: Graph statistics over a run
- exporter: CSV, JSON and Markdown reports
"""

from . import core_model
from . import prompts
from . import llm_gateway
from . import run_config
from . import text_vectors
from . import segmenter
from . import graph_builder
from . import memory_agent
from . import translator
from . import ingestion
from . import run_store
from . import metrics
from . import corpus_stats
from . import exporter

__all__ = [
    'core_model',
    'prompts',
    'llm_gateway',
    'run_config',
    'text_vectors',
    'segmenter',
    'graph_builder',
    'memory_agent',
    'translator',
    'ingestion',
    'run_store',
    'metrics',
    'corpus_stats',
    'exporter',
]


def verify_nlp_setup(model_name: str) -> bool:
    """
    Verify a spaCy model is installed and loadable.
    Called before runs that use spaCy sentence vectors.
    Returns True if ready, False if the model needs downloading.
    """
    try:
        import spacy
        spacy.load(model_name)
        return True
    except (ImportError, OSError):
        import logging
        logging.getLogger(__name__).error(
            f"spaCy model '{model_name}' not found. "
            f"Run: python -m spacy download {model_name}"
        )
        return False
