"""
Core Data Model
===============

Document, discourse, graph and memory types shared by every pipeline stage.
All types are frozen after construction and serialize to plain JSON-ready
dicts (the wire format of the run directory).

Types:
  - Sentence, Document: ordered source text with stable sentence indices
  - Discourse: contiguous sentence span, one node of the dependency graph
  - DiscourseGraph: DAG over discourse indices (chain edges always present)
  - LocalMemory: noun->pronoun, entity, phrase and connective maps + summary
  - Translation: target text for one discourse

Functions:
  - joiner_for(lang) -> str
  - discourse_text(doc, d) -> str
  - assemble(translations, lang) -> str
  - validate_segmentation(discourses, n) -> None
  - spans_to_discourses(spans) -> list[Discourse]
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

import config
from modules.errors import AssemblyError, SegmentationError, SpanRangeError

logger = logging.getLogger(__name__)

# Order matters: prompts, ablation flags and dumps all follow it
MAP_COMPONENTS = ("noun_pronoun", "entities", "phrases", "connectives")
MEMORY_COMPONENTS = MAP_COMPONENTS + ("summary",)


def joiner_for(lang: Optional[str]) -> str:
    """
    Return the separator used between sentences and between translated segments.

    Languages written without spaces (zh, ja and their regional variants such as
    zh-Hans or ja-JP) join with the empty string; every other language uses a
    single space.

    Example:
        >>> joiner_for("de")
        ' '
        >>> joiner_for("zh-CN")
        ''
    """
    if not lang:
        return " "
    primary = lang.replace("_", "-").split("-")[0].lower()
    return "" if primary in config.SPACELESS_LANGUAGES else " "


# ============================================================================
# Documents
# ============================================================================

@dataclass(frozen=True)
class Sentence:
    """One source sentence; `index` is its 0-based position in the document."""

    index: int
    text: str

    def __post_init__(self):
        if not self.text or self.text != self.text.strip():
            raise ValueError(f"sentence {self.index} must be non-empty and trimmed: {self.text!r}")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"sentence {self.index} contains a newline")


@dataclass(frozen=True)
class Document:
    """An ordered, non-empty list of sentences in one language."""

    doc_id: str
    sentences: Tuple[Sentence, ...]
    language: str

    def __post_init__(self):
        if not self.sentences:
            raise ValueError(f"document {self.doc_id!r} has no sentences")
        for position, sentence in enumerate(self.sentences):
            if sentence.index != position:
                raise ValueError(
                    f"document {self.doc_id!r}: sentence indices must run 0..n-1, "
                    f"found {sentence.index} at position {position}"
                )

    @classmethod
    def from_texts(cls, doc_id: str, texts: Iterable[str], language: str) -> "Document":
        """Build a document from already-split sentence strings."""
        sentences = tuple(Sentence(i, text) for i, text in enumerate(texts))
        return cls(doc_id=doc_id, sentences=sentences, language=language)

    def __len__(self) -> int:
        return len(self.sentences)

    @property
    def texts(self) -> List[str]:
        return [s.text for s in self.sentences]

    def full_text(self) -> str:
        """All sentences joined with the language's separator."""
        return joiner_for(self.language).join(self.texts)

    def to_dict(self) -> Dict:
        return {"doc_id": self.doc_id, "language": self.language, "sentences": self.texts}

    @classmethod
    def from_dict(cls, data: Dict) -> "Document":
        return cls.from_texts(data["doc_id"], data["sentences"], data["language"])


# ============================================================================
# Discourses and segmentations
# ============================================================================

@dataclass(frozen=True)
class Discourse:
    """Sentences lo..hi (inclusive) of a document, at position `index` in its segmentation."""

    index: int
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise ValueError(f"discourse {self.index}: invalid span ({self.lo}, {self.hi})")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def span(self) -> Tuple[int, int]:
        return (self.lo, self.hi)

    def to_dict(self) -> Dict:
        return {"index": self.index, "span": [self.lo, self.hi]}

    @classmethod
    def from_dict(cls, data: Dict) -> "Discourse":
        lo, hi = data["span"]
        return cls(index=data["index"], lo=lo, hi=hi)


def spans_to_discourses(spans: Iterable[Sequence[int]]) -> List[Discourse]:
    """Number a list of (lo, hi) spans as discourses 0..K-1."""
    return [Discourse(index=i, lo=lo, hi=hi) for i, (lo, hi) in enumerate(spans)]


def validate_segmentation(discourses: Sequence[Discourse], n: int) -> None:
    """
    Check that discourses partition sentence indices 0..n-1 contiguously and in order.

    Raises:
        SegmentationError: on gaps, overlaps, wrong numbering or wrong coverage
    """
    if n < 1:
        raise SegmentationError("cannot segment an empty document")
    if not discourses:
        raise SegmentationError("segmentation is empty")

    expected_lo = 0
    for position, d in enumerate(discourses):
        if d.index != position:
            raise SegmentationError(f"discourse at position {position} is numbered {d.index}")
        if d.lo != expected_lo:
            raise SegmentationError(
                f"discourse {position} starts at {d.lo}, expected {expected_lo}"
            )
        expected_lo = d.hi + 1

    if expected_lo != n:
        raise SegmentationError(f"segmentation covers 0..{expected_lo - 1}, document has {n} sentences")


def discourse_text(doc: Document, d: Discourse) -> str:
    """
    Materialize the text of a discourse.

    Args:
        doc: Source document
        d: Discourse whose span lies inside the document

    Returns:
        str: sentences lo..hi joined with the document language's separator

    Raises:
        SpanRangeError: if the span falls outside the document

    Example:
        >>> doc = Document.from_texts("d", ["A.", "B.", "C."], "en")
        >>> discourse_text(doc, Discourse(0, 0, 1))
        'A. B.'
    """
    if d.lo < 0 or d.hi >= len(doc) or d.lo > d.hi:
        raise SpanRangeError(
            f"span ({d.lo}, {d.hi}) outside document {doc.doc_id!r} with {len(doc)} sentences"
        )
    joiner = joiner_for(doc.language)
    return joiner.join(s.text for s in doc.sentences[d.lo:d.hi + 1])


# ============================================================================
# Dependency graph
# ============================================================================

@dataclass(frozen=True)
class DiscourseGraph:
    """
    Dependency DAG over discourse indices.

    Edges always point forward (from < to), so index order is a topological
    order, and every chain edge (i-1, i) is present.
    """

    nodes: Tuple[Discourse, ...]
    edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        k = len(self.nodes)
        for j, i in self.edges:
            if not (0 <= j < i < k):
                raise ValueError(f"edge ({j}, {i}) is not a forward edge between 0..{k - 1}")
        for i in range(1, k):
            if (i - 1, i) not in self.edges:
                raise ValueError(f"chain edge ({i - 1}, {i}) missing")

    @classmethod
    def chain(cls, nodes: Sequence[Discourse], extra: Iterable[Tuple[int, int]] = ()) -> "DiscourseGraph":
        """Graph with every chain edge plus the given extra edges."""
        edges = {(i - 1, i) for i in range(1, len(nodes))}
        edges.update((int(j), int(i)) for j, i in extra)
        return cls(nodes=tuple(nodes), edges=frozenset(edges))

    def __len__(self) -> int:
        return len(self.nodes)

    def sorted_edges(self) -> List[Tuple[int, int]]:
        """Edges ordered by target, then source."""
        return sorted(self.edges, key=lambda e: (e[1], e[0]))

    def non_consecutive_edges(self) -> List[Tuple[int, int]]:
        return [e for e in self.sorted_edges() if e[1] - e[0] > 1]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from(self.sorted_edges())
        return g

    def to_dict(self) -> Dict:
        return {
            "nodes": [[d.lo, d.hi] for d in self.nodes],
            "edges": [[j, i] for j, i in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "DiscourseGraph":
        nodes = tuple(spans_to_discourses(data["nodes"]))
        edges = frozenset((int(j), int(i)) for j, i in data["edges"])
        return cls(nodes=nodes, edges=edges)


# ============================================================================
# Memory and translations
# ============================================================================

@dataclass(frozen=True)
class LocalMemory:
    """
    Structured context extracted from one translated discourse.

    Maps keep insertion order so rendered prompts are byte-identical across runs.
    """

    noun_pronoun: Dict[str, str] = field(default_factory=dict)
    entities: Dict[str, str] = field(default_factory=dict)
    phrases: Dict[str, str] = field(default_factory=dict)
    connectives: Dict[str, str] = field(default_factory=dict)
    summary: str = ""

    def __post_init__(self):
        for name in MAP_COMPONENTS:
            for key in getattr(self, name):
                if not key:
                    raise ValueError(f"memory component {name} has an empty key")
        if "\n" in self.summary or "\r" in self.summary:
            raise ValueError("memory summary must be a single line")

    def component(self, name: str):
        return getattr(self, name)

    def is_empty(self) -> bool:
        return not any(getattr(self, name) for name in MEMORY_COMPONENTS)

    def to_dict(self) -> Dict:
        data = {name: dict(getattr(self, name)) for name in MAP_COMPONENTS}
        data["summary"] = self.summary
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "LocalMemory":
        kwargs = {name: dict(data.get(name) or {}) for name in MAP_COMPONENTS}
        return cls(summary=data.get("summary", ""), **kwargs)


@dataclass(frozen=True)
class Translation:
    """Target text for one discourse, with the source span echoed for traceability."""

    discourse_index: int
    target_text: str
    source_lo: int
    source_hi: int

    def __post_init__(self):
        if not self.target_text:
            raise ValueError(f"translation of discourse {self.discourse_index} is empty")

    def to_dict(self) -> Dict:
        return {
            "discourse_index": self.discourse_index,
            "span": [self.source_lo, self.source_hi],
            "target_text": self.target_text,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Translation":
        lo, hi = data["span"]
        return cls(data["discourse_index"], data["target_text"], lo, hi)


def assemble(translations: Sequence[Translation], lang: Optional[str] = None) -> str:
    """
    Stitch discourse translations into the target document.

    Args:
        translations: One translation per discourse, indices 0..K-1
        lang: Target language tag; selects the separator (see joiner_for)

    Returns:
        str: target texts concatenated in index order

    Raises:
        AssemblyError: if an index is missing or duplicated

    Example:
        >>> assemble([Translation(0, "X", 0, 0), Translation(1, "Y", 1, 1)])
        'X Y'
    """
    if not translations:
        raise AssemblyError("no translations to assemble")

    ordered = sorted(translations, key=lambda t: t.discourse_index)
    indices = [t.discourse_index for t in ordered]
    if len(set(indices)) != len(indices):
        duplicates = sorted({i for i in indices if indices.count(i) > 1})
        raise AssemblyError(f"duplicate discourse indices: {duplicates}")
    if indices != list(range(len(ordered))):
        missing = sorted(set(range(max(indices) + 1)) - set(indices))
        raise AssemblyError(f"missing discourse indices: {missing}")

    return joiner_for(lang).join(t.target_text for t in ordered)


__all__ = [
    "MAP_COMPONENTS",
    "MEMORY_COMPONENTS",
    "Sentence",
    "Document",
    "Discourse",
    "DiscourseGraph",
    "LocalMemory",
    "Translation",
    "joiner_for",
    "discourse_text",
    "assemble",
    "validate_segmentation",
    "spans_to_discourses",
]
