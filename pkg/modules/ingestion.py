"""
Corpus Ingestion
================

Reads document-aligned parallel corpora into the core data model and splits
raw text into sentences.

Formats (UTF-8):
  - lines: one sentence per line, a blank line between documents; reference
    files use the same layout and are paired with the source by document order
  - jsonl: one document per line, {"doc_id", "sentences" | "text", "references"}

Functions:
  - clean_text(raw_text) -> str
  - split_sentences(text, lang) -> list of str
  - preprocess(raw_text, lang, doc_id) -> Document
  - load_corpus(path, fmt, references, source_lang, target_lang) -> list of CorpusEntry
  - load_references(paths, doc_ids, target_lang, fmt) -> dict
  - save_corpus(entries, path) -> None
  - is_safe_doc_id(doc_id) -> bool
"""

import json
import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import config
from modules.core_model import Document, joiner_for
from modules.errors import CorpusFormatError

logger = logging.getLogger(__name__)

# Sentence-final punctuation, trailing quotes/brackets, then the whitespace gap
_LATIN_BOUNDARY = re.compile(r"[.!?]+[\"'”’»)\]]*(?=\s)")
_CJK_TERMINATORS = "。！？!?"
_CJK_CLOSERS = "」』）)]”’"

_ABBREVIATIONS = frozenset(a.lower() for a in config.ABBREVIATIONS)

_UNSAFE_ID_CHARS = re.compile(r"[/\\\x00]")


@dataclass(frozen=True)
class CorpusEntry:
    """A source document and its reference translation(s), each one full document."""

    document: Document
    references: Tuple[str, ...] = ()


def is_safe_doc_id(doc_id: str) -> bool:
    """True when the id can be used as a single folder name under docs/."""
    return bool(doc_id.strip(".")) and not doc_id.startswith(".") and not _UNSAFE_ID_CHARS.search(doc_id)


def clean_text(raw_text: str) -> str:
    """NFC-normalize and collapse every whitespace run (newlines included) to one space."""
    return " ".join(unicodedata.normalize("NFC", raw_text).split())


def _absorbs(text: str, start: int, j: int) -> bool:
    ch = text[j]
    if ch in _CJK_TERMINATORS or ch in _CJK_CLOSERS:
        return True
    # a straight quote closes only an open one
    return ch == '"' and text[start:j].count('"') % 2 == 1


def _split_cjk(text: str) -> List[str]:
    """
    Break after each terminator run together with the closing marks and
    further terminators that follow it, across whitespace. The boundary never
    depends on whitespace, so joining the sentences without spaces splits
    back into the same sentences.
    """
    sentences, start, i = [], 0, 0
    while i < len(text):
        if text[i] not in _CJK_TERMINATORS:
            i += 1
            continue
        end = j = i + 1
        while j < len(text):
            if text[j].isspace():
                j += 1
            elif _absorbs(text, start, j):
                j += 1
                end = j
            else:
                break
        sentences.append(text[start:end])
        start = i = end
    sentences.append(text[start:])
    return [s.strip() for s in sentences if s.strip()]


def split_sentences(text: str, lang: str) -> List[str]:
    """
    Regex sentence splitter.

    Space-delimited languages break after . ! ? (plus closing quotes or
    brackets) followed by whitespace, unless the word ending in "." is a known
    abbreviation. zh/ja break after 。！？ and their Western equivalents,
    keeping the closing marks that follow.

    Example:
        >>> split_sentences("Dr. Weber arrived. Was she late?", "en")
        ['Dr. Weber arrived.', 'Was she late?']
    """
    if joiner_for(lang) == "":
        return _split_cjk(text)

    sentences, start = [], 0
    for match in _LATIN_BOUNDARY.finditer(text):
        candidate = text[start:match.end()]
        last_word = candidate.split()[-1].lower() if candidate.split() else ""
        if match.group().startswith(".") and last_word.rstrip("\"'”’»)]") in _ABBREVIATIONS:
            continue
        sentences.append(candidate)
        start = match.end()

    sentences.append(text[start:])
    return [s.strip() for s in sentences if s.strip()]


def preprocess(raw_text: str, lang: str, doc_id: str = "doc") -> Document:
    """
    Turn raw text into a Document.

    Text without any sentence boundary becomes a single-sentence document.

    Raises:
        CorpusFormatError: if the text is empty after cleaning
    """
    text = clean_text(raw_text or "")
    if not text:
        raise CorpusFormatError(f"document {doc_id!r} is empty")
    return Document.from_texts(doc_id, split_sentences(text, lang), lang)


# ============================================================================
# Reading and writing corpora
# ============================================================================

def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise CorpusFormatError(f"cannot read {path}: {e}") from e


def _read_blocks(path) -> List[List[str]]:
    """Blank-line separated blocks of non-empty, whitespace-collapsed lines."""
    blocks, current = [], []
    for line in _read_text(path).splitlines():
        line = clean_text(line)
        if line:
            current.append(line)
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    if not blocks:
        raise CorpusFormatError(f"{path} contains no documents")
    return blocks


def _load_lines(path, references, source_lang, target_lang) -> List[CorpusEntry]:
    blocks = _read_blocks(path)
    ref_blocks = [_read_blocks(r) for r in references]
    for ref_path, rb in zip(references, ref_blocks):
        if len(rb) != len(blocks):
            raise CorpusFormatError(
                f"{path} has {len(blocks)} documents but reference {ref_path} has {len(rb)}"
            )

    joiner = joiner_for(target_lang)
    stem = Path(path).stem
    entries = []
    for k, block in enumerate(blocks):
        doc = Document.from_texts(f"{stem}-{k:04d}", block, source_lang)
        refs = tuple(joiner.join(rb[k]) for rb in ref_blocks)
        entries.append(CorpusEntry(doc, refs))
    return entries


def _load_jsonl(path, references, source_lang, target_lang) -> List[CorpusEntry]:
    entries = []
    for line_no, line in enumerate(_read_text(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError as e:
            raise CorpusFormatError(f"{path}:{line_no}: invalid JSON: {e}") from e
        if not isinstance(record, dict):
            raise CorpusFormatError(f"{path}:{line_no}: record must be an object")

        doc_id = str(record.get("doc_id") or f"{Path(path).stem}-{len(entries):04d}")
        if not is_safe_doc_id(doc_id):
            raise CorpusFormatError(f"{path}:{line_no}: doc_id {doc_id!r} cannot name a run folder")
        language = record.get("language") or source_lang
        if isinstance(record.get("sentences"), list):
            sentences = [clean_text(str(s)) for s in record["sentences"]]
            if not sentences or not all(sentences):
                raise CorpusFormatError(f"{path}:{line_no}: document {doc_id!r} has empty sentences")
            doc = Document.from_texts(doc_id, sentences, language)
        elif isinstance(record.get("text"), str):
            doc = preprocess(record["text"], language, doc_id)
        else:
            raise CorpusFormatError(f"{path}:{line_no}: record needs 'sentences' or 'text'")

        refs = record.get("references") or []
        if isinstance(refs, str):
            refs = [refs]
        entries.append(CorpusEntry(doc, tuple(str(r) for r in refs)))

    if not entries:
        raise CorpusFormatError(f"{path} contains no documents")

    if references:
        joiner = joiner_for(target_lang)
        for ref_path in references:
            rb = _read_blocks(ref_path)
            if len(rb) != len(entries):
                raise CorpusFormatError(f"{path} has {len(entries)} documents but reference {ref_path} has {len(rb)}")
            entries = [CorpusEntry(e.document, e.references + (joiner.join(b),)) for e, b in zip(entries, rb)]
    return entries


def load_corpus(
    path,
    fmt: str = "lines",
    references: Sequence = (),
    source_lang: str = "en",
    target_lang: str = "de",
) -> List[CorpusEntry]:
    """
    Load a document-aligned corpus.

    Args:
        path: Source file
        fmt: "lines" or "jsonl"
        references: Reference files in lines format, paired by document order
        source_lang: Source language tag
        target_lang: Target language tag (joins reference sentences)

    Returns:
        List[CorpusEntry]: validated documents with their references

    Raises:
        CorpusFormatError: unreadable or empty input, or mismatched document counts
    """
    if fmt == "lines":
        entries = _load_lines(path, list(references), source_lang, target_lang)
    elif fmt == "jsonl":
        entries = _load_jsonl(path, list(references), source_lang, target_lang)
    else:
        raise CorpusFormatError(f"unknown corpus format {fmt!r}")

    ids = [e.document.doc_id for e in entries]
    if len(set(ids)) != len(ids):
        raise CorpusFormatError(f"{path} has duplicate document ids")

    logger.info(f"Loaded {len(entries)} documents from {path} ({fmt})")
    return entries


def load_references(paths: Sequence, doc_ids: Sequence[str], target_lang: str, fmt: str = "lines") -> Dict[str, List[str]]:
    """
    Reference documents for an existing run.

    lines files are paired with `doc_ids` by document order; jsonl files
    carry {"doc_id", "references"} records and are matched by id.

    Raises:
        CorpusFormatError: unreadable files or a document count mismatch
    """
    references = {doc_id: [] for doc_id in doc_ids}
    joiner = joiner_for(target_lang)
    for path in paths:
        if fmt == "jsonl":
            for line_no, line in enumerate(_read_text(path).splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except ValueError as e:
                    raise CorpusFormatError(f"{path}:{line_no}: invalid JSON: {e}") from e
                refs = record.get("references") or []
                if record.get("doc_id") in references:
                    references[record["doc_id"]].extend([refs] if isinstance(refs, str) else refs)
            continue

        blocks = _read_blocks(path)
        if len(blocks) != len(doc_ids):
            raise CorpusFormatError(f"reference {path} has {len(blocks)} documents, the run has {len(doc_ids)}")
        for doc_id, block in zip(doc_ids, blocks):
            references[doc_id].append(joiner.join(block))
    return references


def save_corpus(entries: Sequence[CorpusEntry], path) -> None:
    """Write entries as jsonl; load_corpus(path, "jsonl") reads them back unchanged."""
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            record = entry.document.to_dict()
            record["references"] = list(entry.references)
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


__all__ = [
    "CorpusEntry",
    "clean_text",
    "split_sentences",
    "preprocess",
    "load_corpus",
    "load_references",
    "save_corpus",
    "is_safe_doc_id",
]
