"""
Core Data Model Tests
=====================

Run with: pytest test_core_model.py
"""

import random

import pytest

from modules.core_model import (
    Discourse,
    DiscourseGraph,
    Document,
    LocalMemory,
    Sentence,
    Translation,
    assemble,
    discourse_text,
    joiner_for,
    spans_to_discourses,
    validate_segmentation,
)
from modules.errors import AssemblyError, SegmentationError, SpanRangeError


def make_doc(n=4, lang="en"):
    return Document.from_texts("doc", [f"Sentence {i}." for i in range(n)], lang)


# ========== Documents ==========

def test_sentence_rejects_empty_and_multiline_text():
    with pytest.raises(ValueError):
        Sentence(0, "")
    with pytest.raises(ValueError):
        Sentence(0, "two\nlines")
    with pytest.raises(ValueError):
        Sentence(0, " padded ")


def test_document_indices_must_be_contiguous():
    with pytest.raises(ValueError):
        Document("d", (Sentence(0, "A."), Sentence(2, "B.")), "en")
    with pytest.raises(ValueError):
        Document("d", (), "en")


def test_document_dict_roundtrip_keeps_text():
    doc = make_doc(3)
    assert Document.from_dict(doc.to_dict()) == doc
    assert doc.full_text() == "Sentence 0. Sentence 1. Sentence 2."


def test_joiner_for_spaceless_languages():
    assert joiner_for("en") == " "
    assert joiner_for("zh") == ""
    assert joiner_for("zh-Hans") == ""
    assert joiner_for("ja_JP") == ""
    assert joiner_for(None) == " "


# ========== Segmentations ==========

def test_validate_segmentation_accepts_partition():
    validate_segmentation(spans_to_discourses([(0, 1), (2, 2), (3, 3)]), 4)


@pytest.mark.parametrize("spans", [
    [(0, 1), (3, 3)],          # gap
    [(0, 1), (1, 3)],          # overlap
    [(0, 2)],                  # short coverage
    [(1, 3)],                  # does not start at 0
])
def test_validate_segmentation_rejects_bad_spans(spans):
    with pytest.raises(SegmentationError):
        validate_segmentation(spans_to_discourses(spans), 4)


def test_validate_segmentation_rejects_misnumbered_discourses():
    with pytest.raises(SegmentationError):
        validate_segmentation([Discourse(1, 0, 3)], 4)


def test_discourse_rejects_inverted_span():
    with pytest.raises(ValueError):
        Discourse(0, 3, 1)


def test_discourse_text_joins_with_language_separator():
    assert discourse_text(make_doc(4), Discourse(0, 1, 2)) == "Sentence 1. Sentence 2."
    zh = Document.from_texts("z", ["你好。", "再见。"], "zh")
    assert discourse_text(zh, Discourse(0, 0, 1)) == "你好。再见。"


def test_discourse_text_out_of_range():
    with pytest.raises(SpanRangeError):
        discourse_text(make_doc(2), Discourse(0, 1, 2))


# ========== Graphs ==========

def test_chain_graph_has_k_minus_one_edges():
    g = DiscourseGraph.chain(spans_to_discourses([(0, 0), (1, 1), (2, 2), (3, 3)]))
    assert g.sorted_edges() == [(0, 1), (1, 2), (2, 3)]
    assert g.non_consecutive_edges() == []


def test_graph_rejects_backward_edges_and_missing_chain():
    nodes = tuple(spans_to_discourses([(0, 0), (1, 1), (2, 2)]))
    with pytest.raises(ValueError):
        DiscourseGraph(nodes, frozenset({(0, 1), (1, 2), (2, 0)}))
    with pytest.raises(ValueError):
        DiscourseGraph(nodes, frozenset({(0, 1)}))


def test_graph_dict_orders_edges_by_target_then_source():
    g = DiscourseGraph.chain(spans_to_discourses([(0, 0), (1, 1), (2, 2), (3, 3)]), [(1, 3), (0, 2), (0, 3)])
    assert g.to_dict()["edges"] == [[0, 1], [0, 2], [1, 2], [0, 3], [1, 3], [2, 3]]
    assert DiscourseGraph.from_dict(g.to_dict()) == g
    assert g.to_networkx().number_of_edges() == 6


def test_single_node_graph_has_no_edges():
    g = DiscourseGraph.chain(spans_to_discourses([(0, 4)]))
    assert len(g) == 1
    assert g.edges == frozenset()


# ========== Memory and assembly ==========

def test_local_memory_validation_and_emptiness():
    assert LocalMemory().is_empty()
    assert not LocalMemory(summary="x").is_empty()
    with pytest.raises(ValueError):
        LocalMemory(entities={"": "x"})
    with pytest.raises(ValueError):
        LocalMemory(summary="a\nb")


def test_local_memory_dict_keeps_insertion_order():
    memory = LocalMemory(entities={"zeta": "Z", "alpha": "A"}, summary="s")
    data = memory.to_dict()
    assert list(data) == ["noun_pronoun", "entities", "phrases", "connectives", "summary"]
    assert list(data["entities"]) == ["zeta", "alpha"]
    assert LocalMemory.from_dict(data) == memory


def test_assemble_orders_by_index():
    parts = [Translation(1, "Zwei.", 1, 1), Translation(0, "Eins.", 0, 0)]
    assert assemble(parts, "de") == "Eins. Zwei."
    assert assemble(parts, "ja") == "Eins.Zwei."


def test_assemble_rejects_missing_and_duplicate_indices():
    with pytest.raises(AssemblyError):
        assemble([Translation(0, "a", 0, 0), Translation(2, "c", 2, 2)])
    with pytest.raises(AssemblyError):
        assemble([Translation(0, "a", 0, 0), Translation(0, "b", 0, 0)])
    with pytest.raises(AssemblyError):
        assemble([])


def test_translation_requires_text():
    with pytest.raises(ValueError):
        Translation(0, "", 0, 0)


def random_spans(rng, n):
    starts = sorted(rng.sample(range(1, n), rng.randint(0, n - 1))) if n > 1 else []
    bounds = [0] + starts + [n]
    return [(lo, hi - 1) for lo, hi in zip(bounds, bounds[1:])]


def test_identity_translations_reassemble_the_source():
    rng = random.Random(21)
    words = {"en": ["The bank", "raised fees", "again", "Maria"], "de": ["Die Bank", "Gebühren"],
             "zh": ["银行", "提高了", "费用"], "ja": ["銀行", "手数料"]}
    for _ in range(300):
        lang = rng.choice(sorted(words))
        n = rng.randint(1, 12)
        texts = [" ".join(rng.choice(words[lang]) for _ in range(rng.randint(1, 3))) + "." for _ in range(n)]
        doc = Document.from_texts("doc", texts, lang)
        discourses = spans_to_discourses(random_spans(rng, n))
        translations = [Translation(d.index, discourse_text(doc, d), d.lo, d.hi) for d in discourses]
        rng.shuffle(translations)
        assert assemble(translations, lang) == joiner_for(lang).join(texts)
