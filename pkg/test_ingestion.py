"""
Corpus Ingestion Tests
======================

Run with: pytest test_ingestion.py
"""

import json
import random
from pathlib import Path

import pytest

from modules.errors import CorpusFormatError
from modules.ingestion import clean_text, load_corpus, load_references, preprocess, save_corpus, split_sentences

FIXTURES = Path(__file__).parent / "fixtures"


def test_clean_text_collapses_whitespace():
    assert clean_text("  One\n\ttwo   three ") == "One two three"


def test_split_sentences_keeps_abbreviations():
    assert split_sentences("Dr. Weber arrived. Was she late? Yes!", "en") == [
        "Dr. Weber arrived.", "Was she late?", "Yes!",
    ]


def test_split_sentences_closing_quotes():
    assert split_sentences('He said "stop." Then he left.', "en") == ['He said "stop."', "Then he left."]


def test_split_sentences_cjk():
    assert split_sentences("今天下雨了。我们在家。", "zh") == ["今天下雨了。", "我们在家。"]


def test_preprocess_without_boundary_is_one_sentence():
    doc = preprocess("no final punctuation here", "en", "d")
    assert doc.texts == ["no final punctuation here"]
    with pytest.raises(CorpusFormatError):
        preprocess("   ", "en")


def test_load_fixture_corpus():
    entries = load_corpus(FIXTURES / "source.txt", "lines", [FIXTURES / "reference.txt"], "en", "de")
    assert [e.document.doc_id for e in entries] == ["source-0000", "source-0001", "source-0002"]
    assert [len(e.document) for e in entries] == [4, 3, 2]
    assert entries[2].references == ("Es regnete den ganzen Tag. Wir blieben zu Hause.",)


def test_reference_count_mismatch(tmp_path):
    source = tmp_path / "src.txt"
    source.write_text("A.\n\nB.\n", encoding="utf-8")
    ref = tmp_path / "ref.txt"
    ref.write_text("X.\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        load_corpus(source, "lines", [ref])


def test_empty_corpus(tmp_path):
    source = tmp_path / "src.txt"
    source.write_text("\n\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        load_corpus(source)


def test_jsonl_corpus_and_save_roundtrip(tmp_path):
    source = tmp_path / "docs.jsonl"
    source.write_text("\n".join([
        json.dumps({"doc_id": "a", "sentences": ["One.", "Two."], "references": ["Eins. Zwei."]}),
        json.dumps({"doc_id": "b", "text": "Three. Four."}),
    ]), encoding="utf-8")
    entries = load_corpus(source, "jsonl")
    assert entries[1].document.texts == ["Three.", "Four."]
    assert entries[0].references == ("Eins. Zwei.",)

    out = tmp_path / "saved.jsonl"
    save_corpus(entries, out)
    assert load_corpus(out, "jsonl") == entries


def test_jsonl_duplicate_ids(tmp_path):
    source = tmp_path / "docs.jsonl"
    source.write_text(json.dumps({"doc_id": "a", "text": "X."}) + "\n" + json.dumps({"doc_id": "a", "text": "Y."}), encoding="utf-8")
    with pytest.raises(CorpusFormatError):
        load_corpus(source, "jsonl")


def test_load_references_by_order_and_by_id(tmp_path):
    refs = load_references([FIXTURES / "reference.txt"], ["x", "y", "z"], "de")
    assert refs["y"] == ["Maria eröffnete eine Bäckerei in Basel. Sie verkauft jeden Morgen Brot. Ihre Bäckerei ist beliebt."]
    with pytest.raises(CorpusFormatError):
        load_references([FIXTURES / "reference.txt"], ["x"], "de")

    jsonl = tmp_path / "refs.jsonl"
    jsonl.write_text(json.dumps({"doc_id": "y", "references": ["R."]}) + "\n", encoding="utf-8")
    assert load_references([jsonl], ["x", "y"], "de", "jsonl") == {"x": [], "y": ["R."]}


def test_jsonl_rejects_ids_that_leave_the_run_folder(tmp_path):
    for doc_id in ["../escape", "a/b", "..", ".hidden"]:
        source = tmp_path / "docs.jsonl"
        source.write_text(json.dumps({"doc_id": doc_id, "text": "X."}) + "\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError):
            load_corpus(source, "jsonl")


def test_cjk_straight_quotes_open_the_next_sentence():
    doc = preprocess('他说！ "好的。"', "zh")
    assert doc.texts == ["他说！", '"好的。"']
    assert preprocess("".join(doc.texts), "zh").texts == doc.texts
    assert split_sentences('他说："好的！"然后走了。', "zh") == ['他说："好的！"', "然后走了。"]


PIECES = {
    "en": ["Bank", "fees", "Dr.", "rose", ".", "!", "?", '"', "'", ")", "”", " ", " ", " "],
    "zh": ["银行", "费用", "Hi.", "。", "！", "？", "!", '"', "”", "」", "（", ")", " ", " "],
}


def test_preprocess_is_idempotent_on_its_output():
    rng = random.Random(17)
    for lang, pieces in PIECES.items():
        joiner = " " if lang == "en" else ""
        for _ in range(1500):
            raw = "".join(rng.choice(pieces) for _ in range(rng.randint(1, 25)))
            if not raw.strip():
                continue
            doc = preprocess(raw, lang)
            assert preprocess(joiner.join(doc.texts), lang).texts == doc.texts, raw
