"""
Error types for the translation pipeline.

Every failure the pipeline can report has its own class so callers (and the
CLI exit-code mapping) can tell them apart. All derive from GraftError.
"""

from typing import Any, Optional, Tuple


class GraftError(Exception):
    """Base class for every error raised by the modules package."""


# ============================================================================
# Core model
# ============================================================================

class SpanRangeError(GraftError):
    """A discourse span points outside its document."""


class AssemblyError(GraftError):
    """Translations are missing or duplicated when assembling a document."""


class SegmentationError(GraftError):
    """A list of discourses is not a valid partition of the sentences."""


# ============================================================================
# LLM gateway
# ============================================================================

class GatewayError(GraftError):
    """Base class for backend and prompt failures."""


class TransportError(GatewayError):
    """The backend could not be reached, even after retries."""


class MalformedResponseError(GatewayError):
    """The backend answered with a payload that is not a chat completion."""


class AuthenticationError(GatewayError):
    """The backend rejected the API key."""


class MockScriptError(GatewayError):
    """The mock script has no entry for a request, or cannot be read."""


class BinaryParseError(GatewayError):
    """A yes/no agent answered with something that is neither."""


class PromptRenderError(GatewayError):
    """A prompt template was rendered with an unbound slot."""


# ============================================================================
# Agents
# ============================================================================

class MemoryExtractionError(GraftError):
    """A memory component could not be parsed."""

    def __init__(self, component: str, message: str):
        super().__init__(f"[{component}] {message}")
        self.component = component


class EdgeQueryError(GraftError):
    """The relevance query for a discourse pair failed."""

    def __init__(self, pair: Tuple[int, int], cause: Exception):
        super().__init__(f"edge query {pair[0]}->{pair[1]} failed: {cause}")
        self.pair = pair
        self.cause = cause


class TranslationError(GraftError):
    """The translation agent returned nothing usable."""


class StageError(GraftError):
    """A pipeline stage failed; carries the partial run record."""

    def __init__(
        self,
        stage: str,
        cause: Exception,
        node: Optional[int] = None,
        partial: Any = None,
    ):
        where = f"stage '{stage}'" + (f" at node {node}" if node is not None else "")
        super().__init__(f"{where}: {cause}")
        self.stage = stage
        self.node = node
        self.cause = cause
        self.partial = partial


# ============================================================================
# Metrics, ingestion, configuration
# ============================================================================

class UndefinedMetricError(GraftError):
    """A metric has nothing to average over."""


class CorpusFormatError(GraftError):
    """A corpus file is empty, malformed, or mis-paired with its references."""


class ArtifactError(GraftError):
    """A run directory is missing artifacts or holds invalid ones."""


class ConfigError(GraftError):
    """The run configuration is invalid."""


__all__ = [
    "GraftError",
    "SpanRangeError",
    "AssemblyError",
    "SegmentationError",
    "GatewayError",
    "TransportError",
    "MalformedResponseError",
    "AuthenticationError",
    "MockScriptError",
    "BinaryParseError",
    "PromptRenderError",
    "MemoryExtractionError",
    "EdgeQueryError",
    "TranslationError",
    "StageError",
    "UndefinedMetricError",
    "CorpusFormatError",
    "ArtifactError",
    "ConfigError",
]
