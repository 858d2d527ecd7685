"""
Discourse Graph Builder
=======================

Builds the dependency DAG over a segmentation: mandatory chain edges plus
strategy-selected extra edges, and answers predecessor and path queries.

Functions:
  - relevance_pairs(k, window) -> list of (j, i)
  - build_llm(doc, segments, client, window, workers) -> DiscourseGraph
  - build_chain(segments) -> DiscourseGraph
  - build_tfidf(doc, segments, tau) -> DiscourseGraph
  - build_graph(doc, segments, kind, settings, client) -> DiscourseGraph
  - predecessors(g, i) -> list of int
  - enumerate_paths(g, max_len) -> list of paths
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

import config
from modules.core_model import Discourse, DiscourseGraph, Document, discourse_text
from modules.errors import EdgeQueryError
from modules.text_vectors import tfidf_similarity

logger = logging.getLogger(__name__)


def relevance_pairs(k: int, window: Optional[int] = None) -> List[Tuple[int, int]]:
    """
    Non-adjacent forward pairs (j, i), j < i-1, ordered by i then j.

    With a window only pairs with i - j <= window are kept. The position of a
    pair in this list is the ordinal of its Edge Agent call.

    Example:
        >>> relevance_pairs(4)
        [(0, 2), (0, 3), (1, 3)]
    """
    return [
        (j, i)
        for i in range(2, k)
        for j in range(i - 1)
        if window is None or i - j <= window
    ]


def build_llm(
    doc: Document,
    segments: Sequence[Discourse],
    client,
    window: Optional[int] = None,
    workers: int = config.EDGE_WORKERS,
) -> DiscourseGraph:
    """
    Chain edges plus every pair the Edge Agent judges relevant.

    Each non-adjacent pair is asked exactly once; the queries run concurrently
    and their answers are applied in pair order.

    Raises:
        EdgeQueryError: with the failing pair attached
    """
    pairs = relevance_pairs(len(segments), window)
    if not pairs:
        return build_chain(segments)

    texts = [discourse_text(doc, d) for d in segments]

    def ask(ordinal: int, pair: Tuple[int, int]) -> bool:
        j, i = pair
        prompt = client.render("edge", {"earlier": texts[j], "later": texts[i]})
        return client.ask_binary("edge", prompt, ordinal=ordinal)

    answers: Dict[Tuple[int, int], bool] = {}
    errors: Dict[Tuple[int, int], Exception] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        tasks = {executor.submit(ask, ordinal, pair): pair for ordinal, pair in enumerate(pairs)}
        for future in as_completed(tasks):
            pair = tasks[future]
            try:
                answers[pair] = future.result()
            except Exception as e:
                errors[pair] = e

    if errors:
        first = next(pair for pair in pairs if pair in errors)
        raise EdgeQueryError(first, errors[first]) from errors[first]

    extra = [pair for pair in pairs if answers[pair]]
    logger.info(f"[{doc.doc_id}] Edge Agent: {len(pairs)} queries, {len(extra)} extra edges")
    return DiscourseGraph.chain(segments, extra)


def build_chain(segments: Sequence[Discourse]) -> DiscourseGraph:
    """Chain edges only: K-1 edges for K discourses."""
    return DiscourseGraph.chain(segments)


def build_tfidf(doc: Document, segments: Sequence[Discourse], tau: float = config.TFIDF_TAU) -> DiscourseGraph:
    """
    Chain edges plus (j, i), j < i-1, whenever the TF-IDF cosine of the two
    discourses exceeds `tau`. Vectors are fitted on this document's discourses.
    """
    texts = [discourse_text(doc, d) for d in segments]
    sims = tfidf_similarity(texts, doc.language)
    extra = [(j, i) for j, i in relevance_pairs(len(segments)) if sims[j, i] > tau]
    return DiscourseGraph.chain(segments, extra)


def build_graph(doc: Document, segments: Sequence[Discourse], kind: str, settings=None, client=None) -> DiscourseGraph:
    """
    Dispatch on the graph strategy.

    Args:
        kind: "llm", "chain" or "tfidf"
        settings: modules.run_config.EdgeSettings (window, tau, workers)
        client: AgentClient, required for "llm"
    """
    if kind == "llm":
        window = settings.window if settings else None
        workers = settings.workers if settings else config.EDGE_WORKERS
        return build_llm(doc, segments, client, window=window, workers=workers)
    if kind == "tfidf":
        return build_tfidf(doc, segments, settings.tau if settings else config.TFIDF_TAU)
    return build_chain(segments)


def predecessors(g: DiscourseGraph, i: int) -> List[int]:
    """All j with an edge (j, i), ascending."""
    return sorted(j for j, target in g.edges if target == i)


def enumerate_paths(g: DiscourseGraph, max_len: int = config.MAX_PATH_LENGTH) -> List[List[int]]:
    """
    All directed paths with 2..max_len nodes, ordered by length then nodes.

    Example:
        >>> enumerate_paths(build_chain(spans_to_discourses([(0, 0), (1, 1), (2, 2)])), 8)
        [[0, 1], [1, 2], [0, 1, 2]]
    """
    if max_len < 2:
        raise ValueError("max_len must be at least 2")

    nxg = g.to_networkx()
    paths = []
    for source in nxg.nodes:
        for target in nxg.nodes:
            if target <= source:
                continue
            paths.extend(nx.all_simple_paths(nxg, source, target, cutoff=max_len - 1))
    return sorted(paths, key=lambda p: (len(p), p))


__all__ = [
    "relevance_pairs",
    "build_llm",
    "build_chain",
    "build_tfidf",
    "build_graph",
    "predecessors",
    "enumerate_paths",
]
