"""
Graph Statistics for a Run
==========================

Distribution statistics over the discourse graphs of a run: how many
discourses each document has, how long the discourses are, how many edges
(and how many long-range, non-consecutive edges) each graph carries, and how
long its paths are.

Functions:
  - document_rows(graphs) -> DataFrame, one row per document
  - get_graph_summary(graphs, max_len) -> summary dict with distributions
  - edges_trend(rows) -> DataFrame of mean edges per discourse count
"""

import logging
from collections import Counter
from typing import Dict

import pandas as pd

import config
from modules.core_model import DiscourseGraph
from modules.graph_builder import enumerate_paths

logger = logging.getLogger(__name__)

ROW_COLUMNS = ["doc_id", "discourses", "sentences", "edges", "non_consecutive_edges", "paths"]


def document_rows(graphs: Dict[str, DiscourseGraph], max_len: int = config.MAX_PATH_LENGTH) -> pd.DataFrame:
    """
    One row per document, in the order given.

    Columns: doc_id, discourses, sentences, edges, non_consecutive_edges, paths
    """
    rows = []
    for doc_id, g in graphs.items():
        rows.append({
            "doc_id": doc_id,
            "discourses": len(g),
            "sentences": sum(d.size for d in g.nodes),
            "edges": len(g.edges),
            "non_consecutive_edges": len(g.non_consecutive_edges()),
            "paths": len(enumerate_paths(g, max_len)),
        })
    return pd.DataFrame(rows, columns=ROW_COLUMNS)


def edges_trend(rows: pd.DataFrame) -> pd.DataFrame:
    """Mean total and non-consecutive edges per document, grouped by discourse count."""
    if rows.empty:
        return pd.DataFrame(columns=["discourses", "documents", "mean_edges", "mean_non_consecutive_edges"])
    grouped = rows.groupby("discourses").agg(
        documents=("doc_id", "count"),
        mean_edges=("edges", "mean"),
        mean_non_consecutive_edges=("non_consecutive_edges", "mean"),
    )
    return grouped.reset_index().round(4)


def get_graph_summary(graphs: Dict[str, DiscourseGraph], max_len: int = config.MAX_PATH_LENGTH) -> Dict:
    """
    Summary statistics over all graphs of a run.

    Returns:
        Dict with structure:
        {
            "documents": int,
            "discourse_count_distribution": {K: documents},
            "sentences_per_discourse_distribution": {size: discourses},
            "edges_per_document_distribution": {edges: documents},
            "non_consecutive_edges": {doc_id: count},
            "path_length_distribution": {nodes: paths},
            "share_discourses_3_40_sentences": float or None,
            "share_documents_3_20_non_consecutive": float or None,
            "share_paths_length_2_5": float or None
        }

    Example:
        >>> from modules.graph_builder import build_chain
        >>> from modules.core_model import spans_to_discourses
        >>> g = build_chain(spans_to_discourses([(0, 0), (1, 1), (2, 2), (3, 3)]))
        >>> get_graph_summary({"d": g})["path_length_distribution"]
        {2: 3, 3: 2, 4: 1}
    """
    if not graphs:
        logger.warning("No graphs provided to get_graph_summary()")

    sizes = Counter()
    lengths = Counter()
    for g in graphs.values():
        sizes.update(d.size for d in g.nodes)
        lengths.update(len(p) for p in enumerate_paths(g, max_len))

    rows = document_rows(graphs, max_len)
    num_discourses = sum(sizes.values())
    num_paths = sum(lengths.values())
    non_consecutive = dict(zip(rows["doc_id"], (int(v) for v in rows["non_consecutive_edges"])))

    return {
        "documents": len(graphs),
        "discourse_count_distribution": dict(sorted(Counter(int(v) for v in rows["discourses"]).items())),
        "sentences_per_discourse_distribution": dict(sorted(sizes.items())),
        "edges_per_document_distribution": dict(sorted(Counter(int(v) for v in rows["edges"]).items())),
        "non_consecutive_edges": non_consecutive,
        "path_length_distribution": dict(sorted(lengths.items())),
        "share_discourses_3_40_sentences": (
            sum(c for size, c in sizes.items() if 3 <= size <= 40) / num_discourses if num_discourses else None
        ),
        "share_documents_3_20_non_consecutive": (
            sum(1 for v in non_consecutive.values() if 3 <= v <= 20) / len(graphs) if graphs else None
        ),
        "share_paths_length_2_5": (
            sum(c for n, c in lengths.items() if 2 <= n <= 5) / num_paths if num_paths else None
        ),
    }


__all__ = [
    "ROW_COLUMNS",
    "document_rows",
    "edges_trend",
    "get_graph_summary",
]
