"""
Graph Statistics Tests
======================

Run with: pytest test_corpus_stats.py
"""

from modules.core_model import DiscourseGraph, spans_to_discourses
from modules.corpus_stats import document_rows, edges_trend, get_graph_summary


def graph(spans, extra=()):
    return DiscourseGraph.chain(spans_to_discourses(spans), extra)


GRAPHS = {
    "a": graph([(0, 2), (3, 5), (6, 6), (7, 9)], [(0, 2), (0, 3), (1, 3)]),
    "b": graph([(0, 0), (1, 1)]),
    "c": graph([(0, 4)]),
}


def test_document_rows():
    rows = document_rows(GRAPHS)
    assert list(rows["doc_id"]) == ["a", "b", "c"]
    assert list(rows["discourses"]) == [4, 2, 1]
    assert list(rows["sentences"]) == [10, 2, 5]
    assert list(rows["edges"]) == [6, 1, 0]
    assert list(rows["non_consecutive_edges"]) == [3, 0, 0]


def test_graph_summary_distributions():
    summary = get_graph_summary(GRAPHS)
    assert summary["documents"] == 3
    assert summary["discourse_count_distribution"] == {1: 1, 2: 1, 4: 1}
    assert summary["sentences_per_discourse_distribution"] == {1: 3, 3: 3, 5: 1}
    assert summary["edges_per_document_distribution"] == {0: 1, 1: 1, 6: 1}
    assert summary["non_consecutive_edges"] == {"a": 3, "b": 0, "c": 0}
    assert summary["share_discourses_3_40_sentences"] == 4 / 7
    assert summary["share_documents_3_20_non_consecutive"] == 1 / 3
    assert summary["share_paths_length_2_5"] == 1.0


def test_edges_trend_groups_by_discourse_count():
    trend = edges_trend(document_rows(GRAPHS))
    assert list(trend["discourses"]) == [1, 2, 4]
    assert list(trend["mean_edges"]) == [0.0, 1.0, 6.0]


def test_empty_summary():
    summary = get_graph_summary({})
    assert summary["documents"] == 0
    assert summary["share_paths_length_2_5"] is None
    assert edges_trend(document_rows({})).empty
