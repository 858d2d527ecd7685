"""
Translation Agent and Document Pipeline
=======================================

Translates discourses with their incident memory and orchestrates the whole
document pipeline: segment -> build graph -> for every node in index order
(aggregate predecessor memories, translate, extract memory) -> assemble.

Functions:
  - normalize_output(text) -> str
  - translate_discourse(client, discourse, d_text, mem_inc, normalize) -> Translation
  - run_pipeline(doc, run_config, gateway) -> RunRecord
"""

import logging
import time
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from modules.core_model import (
    Discourse,
    DiscourseGraph,
    Document,
    LocalMemory,
    Translation,
    assemble,
    discourse_text,
)
from modules.errors import StageError, TranslationError
from modules.graph_builder import build_chain, build_graph, predecessors
from modules.memory_agent import aggregate, extract
from modules.segmenter import segment_document
from modules.text_vectors import tokenize

logger = logging.getLogger(__name__)


def normalize_output(text: str) -> str:
    """NFC-normalize and collapse whitespace runs to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def translate_discourse(
    client,
    discourse: Discourse,
    d_text: str,
    mem_inc: Optional[LocalMemory] = None,
    normalize: bool = False,
) -> Translation:
    """
    Translate one discourse with the Translation Agent.

    The prompt carries every non-empty component of the incident memory; an
    empty memory adds no memory section at all.

    Args:
        client: AgentClient for the document
        discourse: Node being translated (its index is the call ordinal)
        d_text: Source text of the discourse
        mem_inc: Incident memory
        normalize: Apply normalize_output to the answer

    Returns:
        Translation: the model answer verbatim, or normalized when asked

    Raises:
        TranslationError: if the model answers with nothing but whitespace
    """
    if not d_text:
        raise TranslationError(f"discourse {discourse.index} has no source text")

    prompt = client.render("translation", {"memory": mem_inc or LocalMemory(), "discourse": d_text})
    text = client.ask("translation", prompt, ordinal=discourse.index)
    if normalize:
        text = normalize_output(text)
    if not text.strip():
        raise TranslationError(f"empty translation for discourse {discourse.index}")
    return Translation(discourse.index, text, discourse.lo, discourse.hi)


# ============================================================================
# RUN RECORD
# ============================================================================

@dataclass
class RunRecord:
    """Everything one document run produced; partially filled if a stage failed."""

    doc_id: str
    source: Document
    segmentation: List[Discourse] = field(default_factory=list)
    graph: Optional[DiscourseGraph] = None
    memories: Dict[int, LocalMemory] = field(default_factory=dict)
    translations: List[Translation] = field(default_factory=list)
    document: str = ""
    accounting: Dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return bool(self.document)

    def translation_of(self, i: int) -> str:
        return self.translations[i].target_text

    def to_dict(self) -> Dict:
        return {
            "doc_id": self.doc_id,
            "source": self.source.to_dict(),
            "segmentation": [[d.lo, d.hi] for d in self.segmentation],
            "graph": self.graph.to_dict() if self.graph else None,
            "memories": {str(i): m.to_dict() for i, m in sorted(self.memories.items())},
            "translations": [t.to_dict() for t in self.translations],
            "document": self.document,
            "accounting": self.accounting,
        }


# ============================================================================
# PIPELINE
# ============================================================================

def _accounting(client, run_config, doc: Document) -> Dict:
    words = len(tokenize(doc.full_text(), doc.language))
    return client.ledger.to_dict(
        prompt_per_1k=run_config.pricing.prompt_per_1k,
        completion_per_1k=run_config.pricing.completion_per_1k,
        source_words=words,
    )


def run_pipeline(doc: Document, run_config, gateway) -> RunRecord:
    """
    Translate one document end to end.

    The ablation profile of the configuration decides which agents run:
    ta_only translates the document as one block, ta_da segments and
    translates with empty memory over a chain graph, ta_da_ma adds memory
    along the chain, and full also runs the configured graph strategy.

    Args:
        doc: Source document
        run_config: modules.run_config.RunConfig
        gateway: LLMGateway shared across documents

    Returns:
        RunRecord: complete record with per-document accounting

    Raises:
        StageError: naming the failed stage (and node), carrying the partial record
    """
    client = gateway.client(doc.doc_id, run_config.corpus.source_lang, run_config.corpus.target_lang)
    record = RunRecord(doc_id=doc.doc_id, source=doc)
    components = run_config.memory_components()
    stage, node = "segmentation", None
    start = time.perf_counter()

    try:
        # ========== STEP 1: Segment ==========
        if run_config.segments_document():
            record.segmentation = segment_document(doc, run_config.segmentation, client)
        else:
            record.segmentation = [Discourse(0, 0, len(doc) - 1)]
        logger.info(f"[Pipeline] Step 1: {doc.doc_id} segmented into {len(record.segmentation)} discourses")

        # ========== STEP 2: Build graph ==========
        stage = "graph"
        edge_kind = run_config.effective_edge_kind()
        if edge_kind is None:
            record.graph = build_chain(record.segmentation)
        else:
            record.graph = build_graph(doc, record.segmentation, edge_kind, run_config.edges, client)
        logger.info(f"[Pipeline] Step 2: {doc.doc_id} graph has {len(record.graph.edges)} edges")

        # ========== STEP 3: Translate nodes in index order ==========
        for discourse in record.segmentation:
            node = discourse.index
            d_text = discourse_text(doc, discourse)

            stage = "translation"
            mem_inc = LocalMemory()
            if components:
                preds = predecessors(record.graph, node)
                mem_inc = aggregate([record.memories[j] for j in preds], preds, run_config.memory.summary_cap)
            translation = translate_discourse(client, discourse, d_text, mem_inc, run_config.decoding.normalize_output)
            record.translations.append(translation)

            if components:
                stage = "memory"
                record.memories[node] = extract(client, d_text, translation.target_text, components, ordinal=node)
        node = None
        logger.info(f"[Pipeline] Step 3: {doc.doc_id} translated {len(record.translations)} discourses")

        # ========== STEP 4: Assemble ==========
        stage = "assembly"
        record.document = assemble(record.translations, run_config.corpus.target_lang)
    except Exception as e:
        record.accounting = _accounting(client, run_config, doc)
        logger.error(f"[Pipeline] {doc.doc_id} failed in {stage} (node {node}): {e}", exc_info=True)
        raise StageError(stage, e, node=node, partial=record) from e

    record.accounting = _accounting(client, run_config, doc)
    logger.info(
        f"[Pipeline] Step 4: {doc.doc_id} done in {time.perf_counter() - start:.2f}s "
        f"with {record.accounting['totals']['calls']} calls"
    )
    return record


__all__ = [
    "normalize_output",
    "translate_discourse",
    "RunRecord",
    "run_pipeline",
]
