"""
Sentence and discourse vectors for the similarity-based baselines.

TF-IDF vectors (fitted per document, smoothed idf, L2 norm) back both the
semantic segmentation baseline and the TF-IDF graph baseline. A spaCy
embedder is available for the semantic baseline when a model is installed.
"""

import logging
import string
from typing import Dict, List

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.metrics.pairwise import cosine_similarity

import config
from modules.core_model import joiner_for

logger = logging.getLogger(__name__)

_NLP_MODELS: Dict[str, object] = {}

_PUNCTUATION = string.punctuation + "“”‘’«»„‚…–—、，。！？；：「」『』（）"


def tokenize(text: str, lang: str) -> List[str]:
    """
    Lowercased word tokens; one token per non-space character for zh/ja.

    Example:
        >>> tokenize("The Bank, again.", "en")
        ['the', 'bank', 'again']
    """
    if joiner_for(lang) == "":
        return [ch for ch in text if not ch.isspace() and ch not in _PUNCTUATION]
    tokens = (tok.strip(_PUNCTUATION).lower() for tok in text.split())
    return [tok for tok in tokens if tok]


def tfidf_vectors(texts: List[str], lang: str):
    """
    TF-IDF matrix fitted on `texts` only.

    Returns a dense zero matrix when no text has a single token.
    """
    vectorizer = TfidfVectorizer(
        tokenizer=lambda text: tokenize(text, lang),
        token_pattern=None,
        lowercase=False,
        smooth_idf=True,
        norm="l2",
    )
    try:
        return vectorizer.fit_transform(texts)
    except ValueError:
        # empty vocabulary
        return np.zeros((len(texts), 1))


def tfidf_similarity(texts: List[str], lang: str) -> np.ndarray:
    """Pairwise cosine similarity of TF-IDF vectors; all-zero rows score 0."""
    if not texts:
        return np.zeros((0, 0))
    return cosine_similarity(tfidf_vectors(texts, lang))


def consecutive_similarities(vectors) -> np.ndarray:
    """Cosine similarity between each row and the next; zero vectors score 0."""
    n = vectors.shape[0]
    if n < 2:
        return np.zeros(0)
    return np.array([cosine_similarity(vectors[i:i + 1], vectors[i + 1:i + 2])[0, 0] for i in range(n - 1)])


# ============================================================================
# EMBEDDERS
# ============================================================================

class Embedder:
    """Maps sentences to fixed-dimension vectors (one row per text)."""

    name = "base"

    def embed(self, texts: List[str], lang: str):
        raise NotImplementedError


class TfidfEmbedder(Embedder):
    """Offline default: TF-IDF vectors fitted over the document's sentences."""

    name = "tfidf"

    def embed(self, texts: List[str], lang: str):
        return tfidf_vectors(texts, lang)


def _get_nlp(model_name: str):
    """
    Get a cached spaCy pipeline or load it on first use.

    Raises:
        OSError: if the model is not installed (python -m spacy download <model>)
    """
    if model_name not in _NLP_MODELS:
        try:
            import spacy
            _NLP_MODELS[model_name] = spacy.load(model_name)
            logger.info(f"spaCy model {model_name} loaded")
        except OSError as e:
            logger.error(f"spaCy model {model_name} not found. Install with: python -m spacy download {model_name}\n{e}")
            raise
    return _NLP_MODELS[model_name]


class SpacyEmbedder(Embedder):
    """Document vectors from a spaCy pipeline."""

    name = "spacy"

    def __init__(self, model_name: str = config.SPACY_MODEL):
        self.model_name = model_name

    def embed(self, texts: List[str], lang: str):
        nlp = _get_nlp(self.model_name)
        return np.vstack([doc.vector for doc in nlp.pipe(texts)])


def get_embedder(name: str) -> Embedder:
    if name == "spacy":
        return SpacyEmbedder()
    if name == "tfidf":
        return TfidfEmbedder()
    raise ValueError(f"unknown embedder {name!r}")


__all__ = [
    "tokenize",
    "tfidf_vectors",
    "tfidf_similarity",
    "consecutive_similarities",
    "Embedder",
    "TfidfEmbedder",
    "SpacyEmbedder",
    "get_embedder",
]
