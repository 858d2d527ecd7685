"""
Translation Metrics
===================

Document-level evaluation of a run.

Functions:
  - bleu_tokenize(text, lang) -> str
  - d_bleu(hypothesis_doc, reference_docs, lang) -> float
  - corpus_d_bleu(hypotheses, references, lang) -> float
  - load_lexicon(path) -> TermLexicon
  - recover_term_translations(record, lexicon) -> dict
  - pair_agreement(translations) -> float
  - ctt(translated_doc, lexicon, alignments) -> float
  - load_zp_annotations(path) -> ZPAnnotation
  - exact_match_judge(span, gold) -> bool
  - azpt(translations, zp, judge) -> float
  - node_consistency(record) -> list of bool
  - consistency_ratio(path, node_consistency) -> float
  - path_stats(g, max_len, consistency) -> dict

Undefined metrics raise UndefinedMetricError instead of returning 0.
"""

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sacrebleu.metrics import BLEU

import config
from modules.core_model import DiscourseGraph, Translation, discourse_text, joiner_for
from modules.errors import CorpusFormatError, SpanRangeError, UndefinedMetricError
from modules.graph_builder import enumerate_paths, predecessors
from modules.memory_agent import aggregate

logger = logging.getLogger(__name__)

BLEU_SIGNATURE = (
    f"d-BLEU: whole-document BLEU, n=1..4, brevity penalty, floor smoothing "
    f"(zero n-gram matches count as {config.BLEU_SMOOTH_VALUE}), whitespace tokens "
    f"(characters for zh/ja); documents under 4 tokens use the orders they have, "
    f"an exact match with a reference scores 100"
)


# ============================================================================
# d-BLEU
# ============================================================================

def bleu_tokenize(text: str, lang: str) -> str:
    """Space-separated tokens: whitespace words, or single characters for zh/ja."""
    if joiner_for(lang) == "":
        return " ".join(ch for ch in text if not ch.isspace())
    return " ".join(text.split())


def _bleu(effective_order: bool = False) -> BLEU:
    return BLEU(
        tokenize="none",
        smooth_method="floor",
        smooth_value=config.BLEU_SMOOTH_VALUE,
        effective_order=effective_order,
    )


def _short(tokenized: str) -> bool:
    return len(tokenized.split()) < config.BLEU_MAX_ORDER


def d_bleu(hypothesis_doc: str, reference_docs: Sequence[str], lang: str) -> float:
    """
    BLEU over a whole document treated as one segment.

    Args:
        hypothesis_doc: Translated document
        reference_docs: One or more reference documents
        lang: Target language (selects the tokenization)

    Returns:
        float: score in [0, 100]

    Raises:
        UndefinedMetricError: empty hypothesis or no reference
    """
    hypothesis = bleu_tokenize(hypothesis_doc or "", lang)
    references = [bleu_tokenize(r, lang) for r in reference_docs if r and r.strip()]
    if not hypothesis:
        raise UndefinedMetricError("d-BLEU needs a non-empty hypothesis")
    if not references:
        raise UndefinedMetricError("d-BLEU needs at least one non-empty reference")
    if hypothesis in references:
        return 100.0
    bleu = _bleu(effective_order=_short(hypothesis))
    return bleu.corpus_score([hypothesis], [[r] for r in references]).score


def corpus_d_bleu(hypotheses: Sequence[str], references: Sequence[Sequence[str]], lang: str) -> float:
    """
    d-BLEU over a corpus: each document is one segment, n-gram statistics are pooled.

    Documents may have different numbers of references; missing ones are padded
    with the document's first reference.
    """
    if not hypotheses or len(hypotheses) != len(references):
        raise UndefinedMetricError("corpus d-BLEU needs one reference set per hypothesis")
    if any(not refs for refs in references):
        raise UndefinedMetricError("every document needs at least one reference")

    width = max(len(refs) for refs in references)
    streams = [[] for _ in range(width)]
    for refs in references:
        for k in range(width):
            streams[k].append(bleu_tokenize(refs[k] if k < len(refs) else refs[0], lang))
    hyps = [bleu_tokenize(h, lang) for h in hypotheses]
    if all(h and h in {s[i] for s in streams} for i, h in enumerate(hyps)):
        return 100.0
    return _bleu(effective_order=all(_short(h) for h in hyps)).corpus_score(hyps, streams).score


# ============================================================================
# Terminology consistency (cTT)
# ============================================================================

@dataclass(frozen=True)
class Term:
    source: str
    variants: Tuple[str, ...] = ()


@dataclass(frozen=True)
class TermLexicon:
    """Source-language terms with optional gold target variants."""

    terms: Tuple[Term, ...]

    def __post_init__(self):
        seen = set()
        for term in self.terms:
            if not term.source.strip():
                raise CorpusFormatError("lexicon contains an empty term")
            if term.source in seen:
                raise CorpusFormatError(f"duplicate lexicon term {term.source!r}")
            seen.add(term.source)

    @classmethod
    def from_data(cls, data) -> "TermLexicon":
        """Accepts ["term", ...], [{"term": ..., "variants": [...]}, ...] or {"term": [variants]}."""
        if isinstance(data, dict):
            items = [{"term": k, "variants": v} for k, v in data.items()]
        elif isinstance(data, list):
            items = [{"term": x} if isinstance(x, str) else x for x in data]
        else:
            raise CorpusFormatError("lexicon must be a JSON list or object")

        terms = []
        for item in items:
            if not isinstance(item, dict) or not isinstance(item.get("term"), str):
                raise CorpusFormatError(f"invalid lexicon entry: {item!r}")
            variants = item.get("variants") or []
            if isinstance(variants, str):
                variants = [variants]
            terms.append(Term(item["term"], tuple(variants)))
        return cls(tuple(terms))


def load_lexicon(path) -> TermLexicon:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise CorpusFormatError(f"cannot read lexicon {path}: {e}") from e
    return TermLexicon.from_data(data)


def count_occurrences(needle: str, haystack: str, lang: str) -> int:
    """Case-insensitive occurrences; whole words only for space-delimited languages."""
    if not needle:
        return 0
    if joiner_for(lang) == "":
        return haystack.count(needle)
    pattern = r"(?<!\w)" + re.escape(needle) + r"(?!\w)"
    return len(re.findall(pattern, haystack, flags=re.IGNORECASE))


def _memory_lookup(memory, term: str) -> Optional[str]:
    if memory is None:
        return None
    folded = term.casefold()
    for mapping in (memory.entities, memory.phrases):
        for key, value in mapping.items():
            if key.casefold() == folded and value:
                return value
    return None


def recover_term_translations(record, lexicon: TermLexicon) -> Dict[str, List[str]]:
    """
    Target-side translation of every source occurrence of every lexicon term.

    An occurrence in discourse i takes the translation bound to the term in the
    entity or phrase map of memory i; without one, the first gold variant found
    in the translation of discourse i. Occurrences with neither are skipped.

    Args:
        record: RunRecord of one document
        lexicon: Terms to track

    Returns:
        Dict[str, List[str]]: term -> translations in document order
    """
    doc = record.source
    recovered = {term.source: [] for term in lexicon.terms}

    for discourse, translation in zip(record.segmentation, record.translations):
        source_text = discourse_text(doc, discourse)
        memory = record.memories.get(discourse.index)
        for term in lexicon.terms:
            k = count_occurrences(term.source, source_text, doc.language)
            if not k:
                continue
            target = _memory_lookup(memory, term.source)
            if target is None:
                target = next(
                    (v for v in term.variants if v.casefold() in translation.target_text.casefold()),
                    None,
                )
            if target is None:
                logger.debug(f"[{record.doc_id}] no translation recovered for {term.source!r} in discourse {discourse.index}")
                continue
            recovered[term.source].extend([target] * k)

    return recovered


def pair_agreement(translations: Sequence[str]) -> float:
    """
    Share of equal unordered pairs among k >= 2 translations.

    Example:
        >>> pair_agreement(["a", "a", "b"])
        0.3333333333333333
    """
    k = len(translations)
    if k < 2:
        raise UndefinedMetricError("pair agreement needs at least two translations")
    equal = sum(comb(c, 2) for c in Counter(translations).values())
    return equal / comb(k, 2)


def _variant_occurrences(translated_doc: str, lexicon: TermLexicon, lang: str) -> Dict[str, List[str]]:
    """Fallback alignment: every occurrence of a gold variant in the document."""
    result = {}
    for term in lexicon.terms:
        occurrences = []
        for variant in term.variants:
            occurrences.extend([variant] * count_occurrences(variant, translated_doc, lang))
        result[term.source] = occurrences
    return result


def ctt(
    translated_doc: str,
    lexicon: TermLexicon,
    alignments: Optional[Dict[str, Sequence[str]]] = None,
    lang: str = "en",
) -> float:
    """
    Consistent terminology translation.

    Mean pair agreement over the terms translated at least twice. Without
    alignments, occurrences of each term's gold variants in the translated
    document stand in for its translations.

    Raises:
        UndefinedMetricError: no term has two or more translations
    """
    if alignments is None:
        alignments = _variant_occurrences(translated_doc, lexicon, lang)

    scores = [pair_agreement(list(ts)) for ts in alignments.values() if len(ts) >= 2]
    if not scores:
        raise UndefinedMetricError("no lexicon term is translated at least twice")
    return sum(scores) / len(scores)


# ============================================================================
# Zero pronouns (aZPT)
# ============================================================================

@dataclass(frozen=True)
class ZeroPronoun:
    locator: str                 # "discourse" or "sentence"
    index: int
    gold: Tuple[str, ...]
    doc_id: Optional[str] = None


@dataclass(frozen=True)
class ZPAnnotation:
    records: Tuple[ZeroPronoun, ...] = field(default_factory=tuple)

    def for_doc(self, doc_id: str) -> "ZPAnnotation":
        return ZPAnnotation(tuple(r for r in self.records if r.doc_id in (None, doc_id)))

    def __len__(self) -> int:
        return len(self.records)


def load_zp_annotations(path) -> ZPAnnotation:
    """
    Read zero-pronoun annotations: a JSON list of
    {"doc_id"?: str, "discourse" | "sentence": int, "gold": str | [str, ...]}.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise CorpusFormatError(f"cannot read zero-pronoun annotations {path}: {e}") from e
    if not isinstance(data, list):
        raise CorpusFormatError("zero-pronoun annotations must be a JSON list")

    records = []
    for item in data:
        locator = "discourse" if "discourse" in item else "sentence" if "sentence" in item else None
        gold = item.get("gold")
        if locator is None or gold is None:
            raise CorpusFormatError(f"invalid zero-pronoun record: {item!r}")
        gold = (gold,) if isinstance(gold, str) else tuple(gold)
        records.append(ZeroPronoun(locator, int(item[locator]), gold, item.get("doc_id")))
    return ZPAnnotation(tuple(records))


def exact_match_judge(span: str, gold: Sequence[str]) -> bool:
    """Accept when any gold resolution appears verbatim (ignoring case) in the span."""
    folded = span.casefold()
    return any(g.casefold() in folded for g in gold if g)


def _locate(translations: Sequence[Translation], zp: ZeroPronoun) -> str:
    if zp.locator == "discourse":
        for t in translations:
            if t.discourse_index == zp.index:
                return t.target_text
    else:
        for t in translations:
            if t.source_lo <= zp.index <= t.source_hi:
                return t.target_text
    raise SpanRangeError(f"zero pronoun at {zp.locator} {zp.index} is outside the translated document")


def azpt(
    translations: Sequence[Translation],
    zp: ZPAnnotation,
    judge: Callable[[str, Sequence[str]], bool] = exact_match_judge,
) -> float:
    """
    Accurate zero-pronoun translation: mean judge outcome over annotated zero pronouns.

    Sentence locators resolve to the discourse containing the sentence.

    Raises:
        UndefinedMetricError: when there is no annotation
    """
    if len(zp) == 0:
        raise UndefinedMetricError("no zero-pronoun annotations")
    accepted = sum(1 for record in zp.records if judge(_locate(translations, record), record.gold))
    return accepted / len(zp)


# ============================================================================
# Consistency along DAG paths
# ============================================================================

def node_consistency(record) -> List[bool]:
    """
    Per-node terminology consistency of a translated document.

    Node 0 is consistent by definition. A later node v is consistent when every
    entity of its incident memory whose source string occurs in d_v has its
    memorized target string in the translation of v.
    """
    doc, graph = record.source, record.graph
    flags = []
    for discourse in record.segmentation:
        v = discourse.index
        if v == 0:
            flags.append(True)
            continue
        preds = [j for j in predecessors(graph, v) if j in record.memories]
        visible = aggregate([record.memories[j] for j in preds], preds)
        source_text = discourse_text(doc, discourse).casefold()
        target_text = record.translation_of(v).casefold()
        flags.append(all(
            target.casefold() in target_text
            for key, target in visible.entities.items()
            if key.casefold() in source_text
        ))
    return flags


def consistency_ratio(path: Sequence[int], node_consistency: Sequence[bool]) -> float:
    """
    CL / k for a path of k nodes, CL being the number of leading nodes before
    the first inconsistent one. The first node always counts as consistent.

    Args:
        path: Node indices of the path
        node_consistency: One flag per path position

    Example:
        >>> consistency_ratio([2, 3, 4], [True, True, False])
        0.6666666666666666
    """
    k = len(path)
    if k < 2:
        raise UndefinedMetricError("consistency ratio needs a path of at least 2 nodes")
    if len(node_consistency) != k:
        raise UndefinedMetricError(
            f"consistency ratio got {len(node_consistency)} flags for a path of {k} nodes"
        )
    leading = 1
    for flag in node_consistency[1:]:
        if not flag:
            break
        leading += 1
    return leading / k


def path_stats(
    g: DiscourseGraph,
    max_len: int = config.MAX_PATH_LENGTH,
    consistency: Optional[Sequence[bool]] = None,
) -> Dict:
    """
    Path-length and consistency-ratio distributions over all DAG paths.

    Returns:
        Dict with keys:
          - num_paths
          - length_histogram: {node count: paths}
          - cr_histogram: {CR rounded to 4 places: paths} (empty without consistency flags)
          - share_length_2_5: share of paths with 2..5 nodes (None without paths)
          - share_cr_above_0_6: share of paths with CR > 0.6 (None without flags or paths)
    """
    paths = enumerate_paths(g, max_len)
    lengths = Counter(len(p) for p in paths)
    crs = []
    if consistency is not None:
        crs = [consistency_ratio(p, [consistency[v] for v in p]) for p in paths]
    cr_hist = Counter(round(cr, 4) for cr in crs)

    return {
        "num_paths": len(paths),
        "length_histogram": dict(sorted(lengths.items())),
        "cr_histogram": dict(sorted(cr_hist.items())),
        "share_length_2_5": (sum(c for n, c in lengths.items() if 2 <= n <= 5) / len(paths)) if paths else None,
        "share_cr_above_0_6": (sum(1 for cr in crs if cr > 0.6) / len(crs)) if crs else None,
    }


# ============================================================================
# Run report
# ============================================================================

def _guarded(compute) -> Tuple[Optional[float], Optional[str]]:
    try:
        return compute(), None
    except UndefinedMetricError as e:
        return None, str(e)


def evaluate_run(
    records: Sequence,
    references: Dict[str, Sequence[str]],
    lang: str,
    lexicon: Optional[TermLexicon] = None,
    zp: Optional[ZPAnnotation] = None,
    max_len: int = config.MAX_PATH_LENGTH,
) -> Dict:
    """
    Score every document of a run and the corpus as a whole.

    Undefined metrics are reported as None together with the reason.

    Args:
        records: RunRecords in corpus order
        references: doc_id -> reference documents
        lang: Target language
        lexicon: Terminology for cTT (optional)
        zp: Zero-pronoun annotations for aZPT (optional)
        max_len: Longest path (in nodes) considered for path statistics

    Returns:
        Dict: {"signature", "documents": {doc_id: {...}}, "corpus": {...}}
    """
    documents = {}
    term_scores: List[float] = []
    zp_accepted, zp_total = 0, 0
    lengths, crs = Counter(), Counter()
    hyps, refs = [], []

    for record in records:
        entry = {"num_discourses": len(record.segmentation), "reasons": {}}
        doc_refs = list(references.get(record.doc_id) or [])

        entry["d_bleu"], reason = _guarded(lambda: d_bleu(record.document, doc_refs, lang))
        if reason:
            entry["reasons"]["d_bleu"] = reason
        elif record.document:
            hyps.append(record.document)
            refs.append(doc_refs)

        if lexicon is None:
            entry["ctt"], entry["reasons"]["ctt"] = None, "no lexicon supplied"
        else:
            alignments = recover_term_translations(record, lexicon)
            entry["ctt"], reason = _guarded(lambda: ctt(record.document, lexicon, alignments, lang))
            if reason:
                entry["reasons"]["ctt"] = reason
            term_scores.extend(pair_agreement(ts) for ts in alignments.values() if len(ts) >= 2)

        if zp is None:
            entry["azpt"], entry["reasons"]["azpt"] = None, "no zero-pronoun annotations supplied"
        else:
            doc_zp = zp.for_doc(record.doc_id)
            entry["azpt"], reason = _guarded(lambda: azpt(record.translations, doc_zp))
            if reason:
                entry["reasons"]["azpt"] = reason
            else:
                zp_total += len(doc_zp)
                zp_accepted += entry["azpt"] * len(doc_zp)

        stats = path_stats(record.graph, max_len, node_consistency(record))
        entry["path_length_histogram"] = stats["length_histogram"]
        entry["cr_histogram"] = stats["cr_histogram"]
        lengths.update(stats["length_histogram"])
        crs.update(stats["cr_histogram"])
        documents[record.doc_id] = entry

    corpus = {"documents": len(documents), "reasons": {}}
    corpus["d_bleu"], reason = _guarded(lambda: corpus_d_bleu(hyps, refs, lang))
    if reason:
        corpus["reasons"]["d_bleu"] = reason
    if term_scores:
        corpus["ctt"] = sum(term_scores) / len(term_scores)
    else:
        corpus["ctt"] = None
        corpus["reasons"]["ctt"] = "no lexicon supplied" if lexicon is None else "no lexicon term is translated at least twice"
    if zp_total:
        corpus["azpt"] = zp_accepted / zp_total
    else:
        corpus["azpt"] = None
        corpus["reasons"]["azpt"] = "no zero-pronoun annotations supplied" if zp is None else "no zero-pronoun annotations"

    num_paths = sum(lengths.values())
    corpus["num_paths"] = num_paths
    corpus["path_length_histogram"] = dict(sorted(lengths.items()))
    corpus["cr_histogram"] = dict(sorted(crs.items()))
    corpus["share_length_2_5"] = (sum(c for n, c in lengths.items() if 2 <= n <= 5) / num_paths) if num_paths else None
    corpus["share_cr_above_0_6"] = (sum(c for cr, c in crs.items() if cr > 0.6) / num_paths) if num_paths else None

    return {"signature": BLEU_SIGNATURE, "documents": documents, "corpus": corpus}


__all__ = [
    "BLEU_SIGNATURE",
    "bleu_tokenize",
    "d_bleu",
    "corpus_d_bleu",
    "Term",
    "TermLexicon",
    "load_lexicon",
    "count_occurrences",
    "recover_term_translations",
    "pair_agreement",
    "ctt",
    "ZeroPronoun",
    "ZPAnnotation",
    "load_zp_annotations",
    "exact_match_judge",
    "azpt",
    "node_consistency",
    "consistency_ratio",
    "path_stats",
    "evaluate_run",
]
