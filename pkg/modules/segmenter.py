"""
Discourse Segmentation
======================

Splits a Document into contiguous discourses.

Strategies:
  - segment_llm: Discourse Agent, one yes/no decision per sentence after the first
  - segment_random: K ~ U{0..floor(n/3)} boundaries at distinct random positions
  - segment_semantic: break wherever consecutive sentence similarity < threshold
  - segment_sentences: one discourse per sentence

All strategies return a list of Discourse that passes validate_segmentation.
"""

import logging
import zlib
from typing import List, Optional, Sequence

import numpy as np

import config
from modules.core_model import Discourse, Document, joiner_for, spans_to_discourses, validate_segmentation
from modules.text_vectors import Embedder, TfidfEmbedder, consecutive_similarities, get_embedder

logger = logging.getLogger(__name__)


def _spans_from_starts(starts: Sequence[int], n: int) -> List[Discourse]:
    """Discourses for segments opening at the given sentence indices (0 included)."""
    starts = sorted(set(starts) | {0})
    ends = [s - 1 for s in starts[1:]] + [n - 1]
    discourses = spans_to_discourses(zip(starts, ends))
    validate_segmentation(discourses, n)
    return discourses


def segment_llm(doc: Document, client, max_sentences: int = config.MAX_DISCOURSE_SENTENCES) -> List[Discourse]:
    """
    Segment with the Discourse Agent.

    Sentence 0 opens the first discourse. Every later sentence s_i is shown to
    the agent together with the whole in-progress discourse: yes extends the
    discourse, no closes it and s_i opens the next one. The last discourse is
    flushed after the loop. When the in-progress discourse already holds
    `max_sentences` sentences a boundary is forced without asking.

    Args:
        doc: Source document
        client: AgentClient for this document
        max_sentences: Hard cap on sentences per discourse

    Returns:
        List[Discourse]: valid segmentation

    Raises:
        GatewayError: backend failure or an answer that is not yes/no after one re-ask
    """
    joiner = joiner_for(doc.language)
    starts = [0]
    current = [doc.sentences[0].text]

    for sentence in doc.sentences[1:]:
        i = sentence.index
        if len(current) >= max_sentences:
            logger.warning(f"[{doc.doc_id}] discourse reached {max_sentences} sentences, forcing a boundary before {i}")
            starts.append(i)
            current = [sentence.text]
            continue

        prompt = client.render("segmentation", {"current_segment": joiner.join(current), "sentence": sentence.text})
        if client.ask_binary("segmentation", prompt, ordinal=i - 1):
            current.append(sentence.text)
        else:
            starts.append(i)
            current = [sentence.text]

    discourses = _spans_from_starts(starts, len(doc))
    logger.info(f"[{doc.doc_id}] Discourse Agent: {len(doc)} sentences -> {len(discourses)} discourses")
    return discourses


def document_seed(seed: int, doc_id: str) -> List[int]:
    """Per-document entropy: the run seed plus a stable hash of the document id."""
    return [seed, zlib.crc32(doc_id.encode("utf-8"))]


def segment_random(doc: Document, seed: int) -> List[Discourse]:
    """
    Random segmentation baseline.

    Draws K uniformly from {0, ..., floor(n/3)}, then K distinct boundary
    positions from {1, ..., n-1}; the result has K+1 discourses. The same seed
    and document id always give the same segmentation.

    Example:
        >>> doc = Document.from_texts("d", ["A.", "B."], "en")
        >>> [d.span for d in segment_random(doc, seed=7)]
        [(0, 1)]
    """
    n = len(doc)
    rng = np.random.default_rng(document_seed(seed, doc.doc_id))
    k = int(rng.integers(0, n // 3 + 1))
    starts = []
    if k:
        starts = [int(b) for b in rng.choice(np.arange(1, n), size=k, replace=False)]
    return _spans_from_starts(starts, n)


def segment_semantic(
    doc: Document,
    embedder: Optional[Embedder] = None,
    threshold: float = config.SEMANTIC_THRESHOLD,
    window: int = config.SEMANTIC_WINDOW,
) -> List[Discourse]:
    """
    Semantic chunking baseline.

    Embeds every sentence (optionally buffered with `window` neighbours on each
    side) and opens a new discourse wherever the cosine similarity between
    consecutive embeddings falls below `threshold`.

    Args:
        doc: Source document
        embedder: Sentence embedder (default: TF-IDF over the document)
        threshold: Break threshold in (0, 1)
        window: Neighbour sentences merged into each embedded unit
    """
    embedder = embedder or TfidfEmbedder()
    n = len(doc)
    if n == 1:
        return _spans_from_starts([], 1)

    texts = doc.texts
    if window:
        joiner = joiner_for(doc.language)
        texts = [joiner.join(texts[max(0, i - window):i + window + 1]) for i in range(n)]

    vectors = embedder.embed(texts, doc.language)
    if vectors.shape[0] != n:
        raise ValueError(f"embedder returned {vectors.shape[0]} vectors for {n} sentences")

    similarities = consecutive_similarities(vectors)
    starts = [i + 1 for i, sim in enumerate(similarities) if sim < threshold]
    logger.debug(f"[{doc.doc_id}] semantic breaks at {starts}")
    return _spans_from_starts(starts, n)


def segment_sentences(doc: Document) -> List[Discourse]:
    """Sentence-level baseline: every sentence is its own discourse."""
    return _spans_from_starts(range(len(doc)), len(doc))


def segment_document(doc: Document, settings, client=None) -> List[Discourse]:
    """
    Run the strategy selected in the run configuration.

    Args:
        doc: Source document
        settings: modules.run_config.SegmentationSettings
        client: AgentClient, required for the llm strategy
    """
    if settings.kind == "llm":
        return segment_llm(doc, client, max_sentences=settings.max_sentences)
    if settings.kind == "random":
        return segment_random(doc, settings.seed)
    if settings.kind == "semantic":
        return segment_semantic(doc, get_embedder(settings.embedder), settings.threshold, settings.window)
    return segment_sentences(doc)


__all__ = [
    "segment_llm",
    "segment_random",
    "segment_semantic",
    "segment_sentences",
    "segment_document",
    "document_seed",
]
